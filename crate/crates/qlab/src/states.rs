//! Pure states, density matrices, partial traces, and expectation values.
//!
//! A [`PureState`] is a normalized amplitude vector over an orthonormal
//! basis; a [`DensityMatrix`] is Hermitian, unit-trace, and positive
//! semidefinite. Normalization is validated at construction rather than
//! silently repaired — [`PureState::normalized`] exists for test setup.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{inner, norm_sq, ComplexMatrix};
use crate::tol;

/// Normalized amplitude vector `c_n` over an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument {
                reason: "state needs at least one amplitude".into(),
            });
        }
        for z in &amplitudes {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::InvalidArgument {
                    reason: "state amplitudes must be finite".into(),
                });
            }
        }
        let n2 = norm_sq(&amplitudes);
        if (n2 - 1.0).abs() > tol::ORTHO {
            return Err(Error::NotNormalized { norm_sq: n2 });
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes the given amplitudes first; rejects the zero vector.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n2 = norm_sq(&amplitudes);
        if n2 <= 0.0 || !n2.is_finite() {
            return Err(Error::NotNormalized { norm_sq: n2 });
        }
        let inv = 1.0 / n2.sqrt();
        Self::new(amplitudes.into_iter().map(|z| z * inv).collect())
    }

    /// Basis state `|k>` in a `dim`-dimensional space.
    pub fn basis_state(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::OutcomeIndex { index: k, len: dim });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[k] = Complex64::new(1.0, 0.0);
        Self::new(amplitudes)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, k: usize) -> Complex64 {
        self.amplitudes[k]
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &PureState) -> Complex64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// Tensor product, left factor slow (matches `ComplexMatrix::kron`).
    pub fn kron(&self, other: &PureState) -> PureState {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        PureState { amplitudes }
    }

    /// JSON serialization as an array of `[re, im]` pairs, the fixture
    /// format the CLI reads and writes.
    pub fn to_amplitude_json(&self) -> String {
        let pairs: Vec<[f64; 2]> = self.amplitudes.iter().map(|z| [z.re, z.im]).collect();
        serde_json::to_string(&pairs).expect("serializing f64 pairs cannot fail")
    }

    pub fn from_amplitude_json(text: &str) -> Result<Self> {
        let pairs: Vec<[f64; 2]> = serde_json::from_str(text)?;
        Self::new(
            pairs
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        )
    }
}

/// Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    rho: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::InvalidDensity {
                reason: format!("matrix is {}x{}, not square", rho.rows(), rho.cols()),
            });
        }
        let dev = rho.hermiticity_deviation();
        if dev > tol::ORTHO {
            return Err(Error::InvalidDensity {
                reason: format!("Hermiticity deviation {dev:.3e}"),
            });
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > tol::ORTHO || tr.im.abs() > tol::ORTHO {
            return Err(Error::InvalidDensity {
                reason: format!("trace is {tr} instead of 1"),
            });
        }
        // PSD via the spectrum of the Hermitian part; floating-point partial
        // traces produce eigenvalues a hair below zero, hence the tolerance.
        let eig = rho.hermitian_eig().map_err(|e| Error::InvalidDensity {
            reason: format!("eigenvalue check failed: {e}"),
        })?;
        if let Some(&min) = eig.eigenvalues.first() {
            if min < -tol::ORTHO {
                return Err(Error::InvalidDensity {
                    reason: format!("negative eigenvalue {min:.3e}"),
                });
            }
        }
        Ok(Self { rho })
    }

    /// For callers that have already established the invariants structurally
    /// (e.g. zeroing off-diagonals of a valid density matrix).
    pub(crate) fn new_unchecked(rho: ComplexMatrix) -> Self {
        Self { rho }
    }

    pub fn dim(&self) -> usize {
        self.rho.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.rho[(i, i)].re).collect()
    }

    /// `Tr rho^2`, 1 for pure states, 1/dim for the maximally mixed state.
    pub fn purity(&self) -> f64 {
        self.rho
            .mul(&self.rho)
            .expect("square by construction")
            .trace()
            .re
    }
}

/// Amplitudes `c_{n,alpha}` of a bipartite pure state, with the observed
/// subsystem's index on the rows.
#[derive(Debug, Clone)]
pub struct BipartiteState {
    amplitudes: ComplexMatrix,
}

impl BipartiteState {
    pub fn new(amplitudes: ComplexMatrix) -> Result<Self> {
        let total: f64 = norm_sq(amplitudes.entries());
        if (total - 1.0).abs() > tol::ORTHO {
            return Err(Error::NotNormalized { norm_sq: total });
        }
        Ok(Self { amplitudes })
    }

    /// Reshapes a joint-state vector (kron ordering, subsystem A slow) into
    /// amplitudes with A on the rows.
    pub fn from_joint(psi: &PureState, dim_a: usize) -> Result<Self> {
        if psi.dim() % dim_a != 0 {
            return Err(Error::InvalidArgument {
                reason: format!("dimension {} does not split off a factor {dim_a}", psi.dim()),
            });
        }
        let dim_b = psi.dim() / dim_a;
        let m = ComplexMatrix::from_fn(dim_a, dim_b, |n, alpha| psi.amplitude(n * dim_b + alpha));
        Self::new(m)
    }

    pub fn dim_a(&self) -> usize {
        self.amplitudes.rows()
    }

    pub fn dim_b(&self) -> usize {
        self.amplitudes.cols()
    }

    pub fn amplitudes(&self) -> &ComplexMatrix {
        &self.amplitudes
    }
}

/// `rho_{nm} = c_n conj(c_m)`; idempotent for any valid input.
pub fn to_density(psi: &PureState) -> DensityMatrix {
    let n = psi.dim();
    let rho = ComplexMatrix::from_fn(n, n, |i, j| psi.amplitude(i) * psi.amplitude(j).conj());
    DensityMatrix::new_unchecked(rho)
}

/// Reduced density matrix of subsystem A:
/// `rho_{nm} = sum_alpha c_{n,alpha} conj(c_{m,alpha})`.
pub fn partial_trace(psi: &BipartiteState) -> DensityMatrix {
    let a = psi.amplitudes();
    let rho = ComplexMatrix::from_fn(psi.dim_a(), psi.dim_a(), |n, m| {
        (0..psi.dim_b()).map(|al| a[(n, al)] * a[(m, al)].conj()).sum()
    });
    DensityMatrix::new_unchecked(rho)
}

/// `Tr(G rho)` for a Hermitian operator `G`; the imaginary residue of the
/// trace must vanish and is discarded.
pub fn expectation(rho: &DensityMatrix, g: &ComplexMatrix) -> Result<f64> {
    if g.rows() != rho.dim() || g.cols() != rho.dim() {
        return Err(Error::ShapeMismatch {
            op: "expectation",
            left_rows: rho.dim(),
            left_cols: rho.dim(),
            right_rows: g.rows(),
            right_cols: g.cols(),
        });
    }
    let dev = g.hermiticity_deviation();
    if dev > tol::ORTHO * g.max_abs().max(1.0) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let tr = g.mul(rho.matrix())?.trace();
    debug_assert!(tr.im.abs() < tol::ORTHO * g.max_abs().max(1.0));
    Ok(tr.re)
}

/// `<psi|G|psi>` without building the density matrix.
pub fn pure_expectation(psi: &PureState, g: &ComplexMatrix) -> Result<f64> {
    let gv = g.apply(psi.amplitudes())?;
    Ok(inner(psi.amplitudes(), &gv).re)
}
