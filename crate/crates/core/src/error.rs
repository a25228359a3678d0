use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: row {row} has {len} entries, expected {dim}")]
    NotSquare { row: usize, len: usize, dim: usize },

    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("operator is not Hermitian (max |O - O^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("trace is {trace}, expected 1")]
    InvalidTrace { trace: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("state vector has norm {norm}, expected 1")]
    NotNormalized { norm: f64 },

    #[error("zero vector cannot be normalized")]
    ZeroVector,

    #[error("Tr(rho O) has imaginary part {imag:e}")]
    ComplexExpectation { imag: f64 },

    #[error("constraint set is empty")]
    EmptyConstraints,

    #[error("constraint {index}: lower bound {lower} exceeds upper bound {upper}")]
    InvertedInterval {
        index: usize,
        lower: f64,
        upper: f64,
    },

    #[error("constraint {index}: bounds must be finite")]
    NonFiniteBound { index: usize },

    #[error("constraint {index}: operator dimension {found} does not match problem dimension {expected}")]
    ConstraintDimension {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("multipliers have length ({mu}, {nu}), expected {expected}")]
    MultiplierLength {
        mu: usize,
        nu: usize,
        expected: usize,
    },

    #[error("multipliers must be finite and nonnegative")]
    NegativeMultiplier,

    #[error("measure `{measure}` is a convex roof and is only defined here on pure states")]
    MixedStateForConvexRoof { measure: String },

    #[error("sample mode {mode} is incompatible with measure `{measure}`")]
    IncompatibleSampleMode { mode: &'static str, measure: String },

    #[error("unknown measure `{0}` (expected one of: l1, geometric, relative_entropy)")]
    UnknownMeasure(String),

    #[error("sample count must be at least 1")]
    EmptySample,

    #[error("temperature must be positive and finite, got {0}")]
    InvalidTemperature(f64),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("brute-force oracle supports dimension at most 4, got {0}")]
    OracleDimension(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
