//! The measurement chain: outcome sampling, repeatable and non-repeatable
//! state-vector reduction, pointer-basis decoherence, joint measurement of
//! commuting observables, and metastable decay-time sampling.
//!
//! Every sampling call consumes explicit counter-based RNG state and stamps
//! its record with the event counter: distinct draws are distinct events,
//! and two records never share a post-state unless the caller chains them
//! deliberately.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{inner, ComplexMatrix, EigenDecomposition};
use crate::observables::Observable;
use crate::rng::{sample_index, CounterRng};
use crate::states::{DensityMatrix, PureState};
use crate::tol;

/// What the measurement leaves behind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionMode {
    /// The microsystem survives in the projected eigenstate; the outcome
    /// doubles as a state preparation.
    Repeatable,
    /// The microsystem is absorbed or lost; only the reading remains.
    NonRepeatable,
}

/// One measurement event.
#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    pub outcome_index: usize,
    pub outcome_value: f64,
    pub mode: ReductionMode,
    /// Present exactly when the mode is repeatable.
    pub post_state: Option<PureState>,
    /// Counter value of the draw; monotonically increasing along one RNG.
    pub event_counter: u64,
}

/// Precomputed Born weights of `(psi, F)` for cheap repeated draws.
/// Shot `k` of a fresh counter stream consumes counter `k`, so shards over
/// disjoint counter ranges merge deterministically.
#[derive(Debug, Clone)]
pub struct OutcomeSampler {
    weights: Vec<f64>,
    spectrum: Vec<f64>,
}

impl OutcomeSampler {
    pub fn new(psi: &PureState, f: &Observable) -> Result<Self> {
        let weights = f.frequencies(psi)?;
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > tol::FREQUENCY_DUST {
            return Err(Error::WeightsNotNormalized { sum });
        }
        Ok(Self {
            weights,
            spectrum: f.spectrum().to_vec(),
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn draw(&self, rng: &mut CounterRng) -> usize {
        sample_index(&self.weights, rng)
    }

    pub fn value(&self, index: usize) -> f64 {
        self.spectrum[index]
    }
}

/// Draws one outcome of `F` on `psi` with the Born weights `<psi|Pi_n|psi>`
/// by inverse CDF, recording the event counter of the draw.
pub fn sample_outcome(
    psi: &PureState,
    f: &Observable,
    mode: ReductionMode,
    rng: &mut CounterRng,
) -> Result<MeasurementRecord> {
    let sampler = OutcomeSampler::new(psi, f)?;
    let event_counter = rng.counter();
    let outcome_index = sampler.draw(rng);
    let post_state = match mode {
        ReductionMode::Repeatable => Some(collapse_repeatable(psi, f, outcome_index)?),
        ReductionMode::NonRepeatable => None,
    };
    Ok(MeasurementRecord {
        outcome_index,
        outcome_value: sampler.value(outcome_index),
        mode,
        post_state,
        event_counter,
    })
}

/// Projects onto the n-th outcome branch and renormalizes: `Pi_n psi /
/// ||Pi_n psi||`. For a degenerate branch this keeps all amplitudes within
/// the branch, i.e. the compatible variables are left undisturbed.
pub fn collapse_repeatable(psi: &PureState, f: &Observable, n: usize) -> Result<PureState> {
    let pi = f.projector(n)?;
    let projected = pi.apply(psi.amplitudes())?;
    let weight: f64 = projected.iter().map(|z| z.norm_sqr()).sum();
    if weight <= 1e-12 {
        return Err(Error::ImpossibleOutcome { index: n, weight });
    }
    PureState::normalized(projected)
}

/// Zeroes the coherences of `rho` in the pointer basis and returns the
/// result *expressed in that basis*: entry `(n, n)` is `<v_n|rho|v_n>`, all
/// off-diagonal entries are exactly zero. Feeding a diagonal matrix back in
/// with the standard basis returns it unchanged.
pub fn decohere(rho: &DensityMatrix, pointer: &EigenDecomposition) -> Result<DensityMatrix> {
    if pointer.dim() != rho.dim() {
        return Err(Error::ShapeMismatch {
            op: "decohere",
            left_rows: rho.dim(),
            left_cols: rho.dim(),
            right_rows: pointer.dim(),
            right_cols: pointer.dim(),
        });
    }
    let in_pointer = pointer.to_basis(rho.matrix())?;
    let n = rho.dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = Complex64::new(in_pointer[(i, i)].re, 0.0);
    }
    Ok(DensityMatrix::new_unchecked(out))
}

/// A shared eigenbasis of a family of pairwise-commuting observables,
/// produced by refining each observable's eigenspaces against the next.
/// Column `k` carries one reading per observable in `values[k]`.
#[derive(Debug, Clone)]
pub struct JointBasis {
    vectors: ComplexMatrix,
    values: Vec<Vec<f64>>,
}

impl JointBasis {
    pub fn new(observables: &[&Observable]) -> Result<Self> {
        let first = observables.first().ok_or(Error::InvalidArgument {
            reason: "need at least one observable".into(),
        })?;
        let dim = first.dim();
        for obs in observables {
            if obs.dim() != dim {
                return Err(Error::ShapeMismatch {
                    op: "joint basis",
                    left_rows: dim,
                    left_cols: dim,
                    right_rows: obs.dim(),
                    right_cols: obs.dim(),
                });
            }
        }
        for (i, a) in observables.iter().enumerate() {
            for b in &observables[i + 1..] {
                let norm = a.matrix().commutator(b.matrix())?.max_abs();
                if norm > tol::COMMUTING {
                    return Err(Error::Incompatible { commutator_norm: norm });
                }
            }
        }

        // Diagonalize the first observable, then refine each degenerate
        // block against the remaining observables in turn.
        let eig = first.matrix().hermitian_eig()?;
        let mut vectors = eig.eigenvectors;
        let mut values: Vec<Vec<f64>> = eig.eigenvalues.iter().map(|&l| vec![l]).collect();
        let mut blocks = split_blocks(&eig.eigenvalues, 0..dim);

        for obs in &observables[1..] {
            let mut next_blocks = Vec::new();
            for block in blocks {
                if block.len() == 1 {
                    let col = block[0];
                    let v = vectors.col_vec(col);
                    let gv = obs.matrix().apply(&v)?;
                    values[col].push(inner(&v, &gv).re);
                    next_blocks.push(block);
                    continue;
                }
                // restriction of the observable to the block's span
                let k = block.len();
                let cols: Vec<Vec<Complex64>> =
                    block.iter().map(|&c| vectors.col_vec(c)).collect();
                let mut restricted = ComplexMatrix::zeros(k, k);
                for (a, va) in cols.iter().enumerate() {
                    let gv = obs.matrix().apply(va)?;
                    for (b, vb) in cols.iter().enumerate() {
                        restricted[(b, a)] = inner(vb, &gv);
                    }
                }
                let sym = restricted
                    .add(&restricted.dagger())?
                    .scale(Complex64::new(0.5, 0.0));
                let sub = sym.hermitian_eig()?;
                // rotate the block columns into the refined basis
                let mut new_cols = vec![vec![Complex64::new(0.0, 0.0); dim]; k];
                for (a, col) in new_cols.iter_mut().enumerate() {
                    for (b, vb) in cols.iter().enumerate() {
                        let w = sub.eigenvectors[(b, a)];
                        for (slot, &amp) in col.iter_mut().zip(vb.iter()) {
                            *slot += amp * w;
                        }
                    }
                }
                for (a, &col_idx) in block.iter().enumerate() {
                    for i in 0..dim {
                        vectors[(i, col_idx)] = new_cols[a][i];
                    }
                    values[col_idx].push(sub.eigenvalues[a]);
                }
                for idx in split_blocks(&sub.eigenvalues, 0..k) {
                    next_blocks.push(idx.iter().map(|&a| block[a]).collect());
                }
            }
            blocks = next_blocks;
        }

        Ok(Self { vectors, values })
    }

    pub fn dim(&self) -> usize {
        self.vectors.rows()
    }

    /// Reading tuple of column `k`: one value per observable.
    pub fn values(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    /// Born weights `|<col_k|psi>|^2`.
    pub fn weights(&self, psi: &PureState) -> Result<Vec<f64>> {
        let coords = self.vectors.dagger().apply(psi.amplitudes())?;
        Ok(coords.iter().map(|z| z.norm_sqr()).collect())
    }
}

fn split_blocks(values: &[f64], range: std::ops::Range<usize>) -> Vec<Vec<usize>> {
    let scale = values.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let gap = tol::EIGENSPACE_MEMBER * scale.max(1.0) + 1e-12;
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in range {
        match blocks.last_mut() {
            Some(last) if (values[i] - values[*last.last().unwrap()]).abs() <= gap => {
                last.push(i)
            }
            _ => blocks.push(vec![i]),
        }
    }
    blocks
}

/// One simultaneous reading of several commuting observables: a single
/// spacetime event, all values referring to the same microsystem.
#[derive(Debug, Clone)]
pub struct JointRecord {
    /// One reading per observable, in the order they were supplied.
    pub values: Vec<f64>,
    pub event_counter: u64,
}

/// Reusable sampler for joint measurements of a fixed state and observable
/// family.
#[derive(Debug, Clone)]
pub struct JointSampler {
    weights: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl JointSampler {
    pub fn new(psi: &PureState, observables: &[&Observable]) -> Result<Self> {
        let basis = JointBasis::new(observables)?;
        Self::with_basis(psi, &basis)
    }

    /// Reuses an already-built joint basis (the basis depends only on the
    /// observables, not on the state).
    pub fn with_basis(psi: &PureState, basis: &JointBasis) -> Result<Self> {
        if psi.dim() != basis.dim() {
            return Err(Error::ShapeMismatch {
                op: "joint sampler",
                left_rows: basis.dim(),
                left_cols: basis.dim(),
                right_rows: psi.dim(),
                right_cols: 1,
            });
        }
        let weights = basis.weights(psi)?;
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > tol::FREQUENCY_DUST {
            return Err(Error::WeightsNotNormalized { sum });
        }
        Ok(Self {
            weights,
            values: basis.values.clone(),
        })
    }

    pub fn draw(&self, rng: &mut CounterRng) -> JointRecord {
        let event_counter = rng.counter();
        let k = sample_index(&self.weights, rng);
        JointRecord {
            values: self.values[k].clone(),
            event_counter,
        }
    }

    /// Probability-weighted value tuples, for callers that want the exact
    /// distribution rather than samples.
    pub fn distribution(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.values
            .iter()
            .map(|v| v.as_slice())
            .zip(self.weights.iter().copied())
    }
}

/// Simultaneous, double measurement of two commuting observables: one draw,
/// both readings. Non-commuting inputs are refused — they cannot share a
/// measurement event.
pub fn measure_joint(
    psi: &PureState,
    f: &Observable,
    g: &Observable,
    rng: &mut CounterRng,
) -> Result<JointRecord> {
    measure_joint_many(psi, &[f, g], rng)
}

/// The n-observable generalization of [`measure_joint`].
pub fn measure_joint_many(
    psi: &PureState,
    observables: &[&Observable],
    rng: &mut CounterRng,
) -> Result<JointRecord> {
    let sampler = JointSampler::new(psi, observables)?;
    Ok(sampler.draw(rng))
}

/// A metastable level: complex energy `E_R - i Gamma / 2`, mean lifetime
/// `1 / Gamma` in hbar = 1 units.
#[derive(Debug, Clone, Copy)]
pub struct MetastableSpec {
    gamma: f64,
    e_r: f64,
}

impl MetastableSpec {
    pub fn new(gamma: f64, e_r: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidArgument {
                reason: format!("decay rate must be positive, got {gamma}"),
            });
        }
        Ok(Self { gamma, e_r })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn e_r(&self) -> f64 {
        self.e_r
    }

    /// Mean lifetime `tau = 1 / Gamma`.
    pub fn lifetime(&self) -> f64 {
        1.0 / self.gamma
    }

    /// Survival probability `e^{-Gamma t}` from the decaying envelope
    /// `e^{-Gamma t / 2}` of the amplitude.
    pub fn survival(&self, t: f64) -> f64 {
        (-self.gamma * t).exp()
    }
}

/// Exponential decay-time draw by inverse CDF: `-ln(u) / Gamma`.
pub fn sample_decay_time(spec: &MetastableSpec, rng: &mut CounterRng) -> f64 {
    -rng.next_f64_open().ln() / spec.gamma()
}
