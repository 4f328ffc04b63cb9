use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("|alpha|^2 - |beta|^2 = {0} is not positive")]
    NonUnitDeterminant(f64),

    #[error("point {re}+{im}i is not inside the open unit disc")]
    OutsideDisc { re: f64, im: f64 },

    #[error("relator residual {residual:e} exceeds tolerance {tolerance:e}")]
    ConstructionFailure { residual: f64, tolerance: f64 },

    #[error("generator index {index} out of range for {count} generators")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("word {0} is not freely reduced")]
    NotReduced(String),

    #[error("iteration exceeded {0} steps")]
    NonTermination(usize),

    #[error("path crossed more than {0} sides")]
    PathTooLong(usize),

    #[error("word-ball radius {0} exceeds the limit of 12")]
    RadiusTooLarge(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular (|det| = {0:e})")]
    Singular(f64),

    #[error("eigenvalue solver did not converge")]
    EigenFailure,

    #[error("zero vector has no projective class")]
    ZeroVector,

    #[error("point violates the cone equation by {0:e}")]
    NotOnCone(f64),

    #[error("degenerate fiber: z1 = z2 = 0")]
    DegenerateFiber,

    #[error("finite-difference step {step:e} is out of range or too close to the boundary")]
    StepOutOfRange { step: f64 },

    #[error("function is not holomorphic at the sample point (dbar residual {0:e})")]
    NotHolomorphic(f64),

    #[error("metric factor {0} is not positive")]
    NonPositiveMetric(f64),

    #[error("Taylor tail {tail:e} exceeds tolerance {tolerance:e}")]
    TruncationError { tail: f64, tolerance: f64 },

    #[error("certified sup {sup} exceeds 1 + {tolerance:e}")]
    SupViolation { sup: f64, tolerance: f64 },

    #[error("equivariance residual {residual:e} at sample {sample} exceeds {tolerance:e}")]
    EquivarianceFailure {
        residual: f64,
        sample: usize,
        tolerance: f64,
    },

    #[error("fiber type does not match the action or function")]
    FiberMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("configuration error at {location}: {message}")]
    Config { location: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
