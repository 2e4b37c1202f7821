use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    ShapeMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("matrix is not Hermitian: max |A - A^dagger| = {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("matrix is singular or nearly so: pivot magnitude {pivot:.3e} at elimination step {step}")]
    Singular { pivot: f64, step: usize },

    #[error("moment system too ill-conditioned: condition estimate {estimate:.3e}")]
    IllConditioned { estimate: f64 },

    #[error("reconstructed frequency {value:.3e} at outcome {index} is more negative than rounding dust; the moment system cannot be trusted")]
    NegativeFrequency { index: usize, value: f64 },

    #[error("nodes {a} and {b} coincide (gap {gap:.3e}); degenerate spectra need a joint measurement, not a moment solve")]
    DegenerateNodes { a: usize, b: usize, gap: f64 },

    #[error("node {index} is zero; the power-1..D convention needs nonzero eigenvalues (use the classical 0..D-1 convention)")]
    ZeroNode { index: usize },

    #[error("state is not normalized: sum of |c_n|^2 = {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("invalid density matrix: {reason}")]
    InvalidDensity { reason: String },

    #[error("invalid spin quantum number {j}: 2j must be a nonnegative integer")]
    InvalidSpin { j: f64 },

    #[error("outcome index {index} out of range for {len} distinct eigenvalues")]
    OutcomeIndex { index: usize, len: usize },

    #[error("outcome {index} has weight {weight:.3e}; cannot collapse onto a zero-weight branch")]
    ImpossibleOutcome { index: usize, weight: f64 },

    #[error("outcome weights sum to {sum} instead of 1")]
    WeightsNotNormalized { sum: f64 },

    #[error("observables do not commute (commutator max-norm {commutator_norm:.3e}); they cannot share one measurement event")]
    Incompatible { commutator_norm: f64 },

    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: String },

    #[error("packet placement: {reason}")]
    PacketPlacement { reason: String },

    #[error("propagation unstable: norm drifted by {drift:.3e}")]
    NormDrift { drift: f64 },

    #[error("inconclusive scattering run: {interior_mass:.3e} of the norm still within 3 sigma of the barrier; enlarge the grid or the propagation time")]
    InconclusiveRun { interior_mass: f64 },

    #[error("invalid argument: {reason}")]
    InvalidArgument { reason: String },

    #[error("unknown experiment '{tag}'; run `list` for the catalog")]
    UnknownExperiment { tag: String },

    #[error("config error: {message}")]
    Config { message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI maps this error to: 2 usage, 3 config,
    /// 4 numerical/runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnknownExperiment { .. } => 2,
            Error::Config { .. } => 3,
            _ => 4,
        }
    }
}
