use thiserror::Error;

/// Errors raised by the simulators, transforms and diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the domain required by the model or primitive.
    #[error("parameter domain violated: {0}")]
    ParameterDomain(String),

    /// The requested reporting mechanism is not supported by this operation.
    #[error("unsupported reporting mechanism: {0}")]
    Unsupported(String),

    /// `beta = 0` with `gamma > 0`: the class has no INAR(1) representative.
    #[error("degenerate model class: {0}")]
    DegenerateClass(String),

    /// A target reporting probability outside the admissible interval.
    #[error("q = {value} outside admissible interval [{lower}, {upper}]")]
    OutOfRange { value: f64, lower: f64, upper: f64 },

    /// A lag expansion that would never terminate.
    #[error("non-terminating request: {0}")]
    NonTerminating(String),

    #[error("insufficient data: need more than {required} observations, got {got}")]
    InsufficientData { required: usize, got: usize },

    #[error("truncated probability mass {mass} below 1 - {tolerance}")]
    TruncationTooSmall { mass: f64, tolerance: f64 },

    /// A trace checked against parameters it was not generated with.
    #[error("provenance mismatch: {0}")]
    Provenance(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid model specification: {0}")]
    SpecFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::ParameterDomain(msg.into())
}
