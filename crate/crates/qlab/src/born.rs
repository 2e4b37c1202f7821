//! Reconstruction of outcome frequencies from moment constraints.
//!
//! Given the first `D` power moments of an observable with `D` distinct
//! eigenvalues, the Vandermonde system `sum_n f_n^N P_n = <F^N>` pins the
//! relative frequencies uniquely — that is the moment route to Born's rule.
//! [`forward_moments`] is the exact forward map and serves as the round-trip
//! oracle for the solver.

use std::io::Write;

use crate::error::{Error, Result};
use crate::hilbert::ComplexMatrix;
use crate::measure::OutcomeSampler;
use crate::numfmt::f64_repr;
use crate::observables::Observable;
use crate::rng::CounterRng;
use crate::states::PureState;
use crate::tol;

/// Which powers form the linear system.
///
/// `Classical` uses `N = 0..D-1`; the `N = 0` row is exactly the unitarity
/// constraint `sum P_n = 1` and the matrix is the textbook Vandermonde,
/// nonsingular whenever the nodes are distinct. `PowersFrom1` uses
/// `N = 1..D`, whose determinant carries an extra factor `prod f_n`, so a
/// zero eigenvalue must be rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MomentConvention {
    #[default]
    Classical,
    PowersFrom1,
}

/// Distinct eigenvalues and the moments `<F^N>` for `N = 1..D`.
#[derive(Debug, Clone)]
pub struct MomentSystem {
    nodes: Vec<f64>,
    moments: Vec<f64>,
}

impl MomentSystem {
    pub fn new(nodes: Vec<f64>, moments: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != moments.len() {
            return Err(Error::InvalidArgument {
                reason: format!(
                    "need one moment per node, got {} nodes and {} moments",
                    nodes.len(),
                    moments.len()
                ),
            });
        }
        let spread = node_spread(&nodes);
        for a in 0..nodes.len() {
            for b in (a + 1)..nodes.len() {
                let gap = (nodes[a] - nodes[b]).abs();
                if gap <= 1e-9 * spread {
                    return Err(Error::DegenerateNodes { a, b, gap });
                }
            }
        }
        Ok(Self { nodes, moments })
    }

    /// Moments of `psi` under `F`, read off the spectral decomposition.
    /// Degenerate spectra are refused here — their statistics need the
    /// joint-measurement treatment, not a moment solve.
    pub fn from_state(psi: &PureState, f: &Observable) -> Result<Self> {
        if f.is_degenerate() {
            let (a, b) = first_degenerate_pair(f);
            return Err(Error::DegenerateNodes { a, b, gap: 0.0 });
        }
        let d = f.outcome_count();
        let moments = (1..=d as u32)
            .map(|n| f.moment(psi, n))
            .collect::<Result<Vec<f64>>>()?;
        Self::new(f.spectrum().to_vec(), moments)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn moments(&self) -> &[f64] {
        &self.moments
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }
}

fn node_spread(nodes: &[f64]) -> f64 {
    let max = nodes.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let min = nodes.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    (max - min).max(nodes.iter().fold(0.0f64, |m, &x| m.max(x.abs()))).max(1e-300)
}

fn first_degenerate_pair(f: &Observable) -> (usize, usize) {
    let mut col = 0;
    for &mult in f.degeneracies() {
        if mult > 1 {
            return (col, col + 1);
        }
        col += mult;
    }
    (0, 0)
}

/// Outcome values with their normalized relative frequencies, optionally
/// carrying raw counts and the seed that produced them.
#[derive(Debug, Clone)]
pub struct FrequencyTable {
    outcomes: Vec<f64>,
    frequencies: Vec<f64>,
    counts: Option<Vec<u64>>,
    seed: Option<u64>,
}

impl FrequencyTable {
    pub fn new(outcomes: Vec<f64>, frequencies: Vec<f64>) -> Result<Self> {
        if outcomes.len() != frequencies.len() {
            return Err(Error::InvalidArgument {
                reason: "outcome and frequency lengths differ".into(),
            });
        }
        let mut sum = 0.0;
        for &p in &frequencies {
            if p < -tol::FREQUENCY_DUST {
                return Err(Error::InvalidArgument {
                    reason: format!("negative frequency {p:.3e}"),
                });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > tol::FREQUENCY_DUST {
            return Err(Error::WeightsNotNormalized { sum });
        }
        Ok(Self {
            outcomes,
            frequencies,
            counts: None,
            seed: None,
        })
    }

    /// Empirical table from raw counts; counts partition the shots, so the
    /// frequencies sum to one by construction.
    pub fn from_counts(outcomes: Vec<f64>, counts: Vec<u64>, seed: u64) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidArgument {
                reason: "cannot tabulate zero shots".into(),
            });
        }
        let frequencies = counts.iter().map(|&c| c as f64 / total as f64).collect();
        let mut table = Self::new(outcomes, frequencies)?;
        table.counts = Some(counts);
        table.seed = Some(seed);
        Ok(table)
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn counts(&self) -> Option<&[u64]> {
        self.counts.as_deref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }
}

/// Solves the moment system for the unique frequency vector, using the
/// classical power convention.
pub fn reconstruct_frequencies(sys: &MomentSystem) -> Result<FrequencyTable> {
    reconstruct_frequencies_with(sys, MomentConvention::Classical)
}

/// Same, with an explicit power convention.
pub fn reconstruct_frequencies_with(
    sys: &MomentSystem,
    convention: MomentConvention,
) -> Result<FrequencyTable> {
    let d = sys.dim();
    let spread = node_spread(sys.nodes());
    if convention == MomentConvention::PowersFrom1 {
        if let Some(idx) = sys.nodes().iter().position(|&f| f.abs() <= 1e-12 * spread) {
            return Err(Error::ZeroNode { index: idx });
        }
    }

    let mut v = ComplexMatrix::zeros(d, d);
    let mut rhs = ComplexMatrix::zeros(d, 1);
    for row in 0..d {
        let power = match convention {
            MomentConvention::Classical => row as i32,
            MomentConvention::PowersFrom1 => row as i32 + 1,
        };
        for (col, &f) in sys.nodes().iter().enumerate() {
            v[(row, col)] = num_complex::Complex64::new(f.powi(power), 0.0);
        }
        let m = match convention {
            MomentConvention::Classical => {
                if row == 0 {
                    1.0
                } else {
                    sys.moments()[row - 1]
                }
            }
            MomentConvention::PowersFrom1 => sys.moments()[row],
        };
        rhs[(row, 0)] = num_complex::Complex64::new(m, 0.0);
    }

    let estimate = v.condition_estimate().map_err(|e| match e {
        Error::Singular { .. } => Error::IllConditioned { estimate: f64::INFINITY },
        other => other,
    })?;
    if estimate > tol::CONDITION_LIMIT {
        return Err(Error::IllConditioned { estimate });
    }

    let solution = v.solve(&rhs)?;
    let residual = v.mul(&solution)?.sub(&rhs)?.max_abs();
    let rhs_scale = rhs.max_abs().max(1e-300);
    if residual / rhs_scale > 1e-8 {
        return Err(Error::IllConditioned { estimate });
    }

    let mut freqs: Vec<f64> = (0..d).map(|i| solution[(i, 0)].re).collect();
    for (i, p) in freqs.iter_mut().enumerate() {
        if *p < 0.0 {
            if *p < -tol::FREQUENCY_DUST {
                return Err(Error::NegativeFrequency { index: i, value: *p });
            }
            *p = 0.0;
        }
    }
    let total: f64 = freqs.iter().sum();
    for p in &mut freqs {
        *p /= total;
    }
    FrequencyTable::new(sys.nodes().to_vec(), freqs)
}

/// Exact forward map `moment_N = sum_n f_n^N P_n` for `N = 1..D`.
pub fn forward_moments(table: &FrequencyTable, d: usize) -> Result<MomentSystem> {
    let moments = (1..=d as i32)
        .map(|n| {
            table
                .outcomes()
                .iter()
                .zip(table.frequencies())
                .map(|(&f, &p)| f.powi(n) * p)
                .sum()
        })
        .collect();
    MomentSystem::new(table.outcomes()[..d].to_vec(), moments)
}

/// One outcome's theory-versus-experiment line.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub outcome: f64,
    pub theoretical: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub z_score: f64,
}

/// Per-outcome comparison of sampled frequencies against `|c_n|^2`.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub shots: u64,
    pub seed: u64,
}

impl ComparisonReport {
    pub fn max_abs_z(&self) -> f64 {
        self.rows.iter().map(|r| r.z_score.abs()).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "outcome,theoretical,empirical,stderr,z_score")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                f64_repr(r.outcome),
                f64_repr(r.theoretical),
                f64_repr(r.empirical),
                f64_repr(r.stderr),
                f64_repr(r.z_score)
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ASCII output")
    }
}

/// Samples `shots` measurement outcomes of `F` on `psi` and compares the
/// empirical frequencies against the Born weights, with binomial standard
/// errors. Deterministic for a fixed seed; shot `k` consumes counter `k`,
/// so shot ranges can run as parallel shards and merge.
pub fn empirical_vs_born(
    psi: &PureState,
    f: &Observable,
    shots: u64,
    seed: u64,
) -> Result<ComparisonReport> {
    if shots == 0 {
        return Err(Error::InvalidArgument {
            reason: "need at least one shot".into(),
        });
    }
    let sampler = OutcomeSampler::new(psi, f)?;
    let mut counts = vec![0u64; f.outcome_count()];
    let mut rng = CounterRng::new(seed);
    for _ in 0..shots {
        counts[sampler.draw(&mut rng)] += 1;
    }
    let theory = f.frequencies(psi)?;
    let rows = f
        .spectrum()
        .iter()
        .zip(theory.iter().zip(&counts))
        .map(|(&outcome, (&p, &c))| {
            let empirical = c as f64 / shots as f64;
            let stderr = (p * (1.0 - p) / shots as f64).sqrt();
            let z_score = if stderr > 0.0 {
                (empirical - p) / stderr
            } else {
                0.0
            };
            ComparisonRow {
                outcome,
                theoretical: p,
                empirical,
                stderr,
                z_score,
            }
        })
        .collect();
    Ok(ComparisonReport { rows, shots, seed })
}
