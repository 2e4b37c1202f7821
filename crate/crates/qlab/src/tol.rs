//! The numerical tolerances used across the crate, in one place.
//!
//! Three tiers: input validation is strictest (the caller handed us the
//! matrix, any deviation is their bug), orthonormality/normalization checks
//! allow accumulated rounding from iterative work, and residual checks on
//! composed solves are loosest.

/// Input validation: Hermiticity of matrices handed to the eigensolver.
pub const VALIDATION: f64 = 1e-12;

/// Orthonormality of computed eigenvectors, state normalization, Hermiticity
/// and trace checks on density matrices.
pub const ORTHO: f64 = 1e-10;

/// Residuals of linear solves, eigendecomposition reconstruction, projector
/// completeness under composition.
pub const RESIDUAL: f64 = 1e-9;

/// Pivot magnitude below which LU elimination reports a singular matrix.
pub const SINGULAR_PIVOT: f64 = 1e-12;

/// Commutator max-norm below which two observables count as compatible.
pub const COMMUTING: f64 = 1e-10;

/// Eigenspace membership when refining a degenerate block against a second
/// observable.
pub const EIGENSPACE_MEMBER: f64 = 1e-8;

/// Negative frequencies above this magnitude coming out of a moment solve are
/// a conditioning problem, not rounding dust.
pub const FREQUENCY_DUST: f64 = 1e-9;

/// Condition estimate beyond which a moment system is rejected outright.
pub const CONDITION_LIMIT: f64 = 1e10;
