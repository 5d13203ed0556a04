use thiserror::Error;

/// Errors raised by spectrum analysis, exact counting and prediction.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("eigenvalue sequence is not square-summable: {0}")]
    DivergentSpectrum(String),
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),
    #[error("tail remainder cannot be certified below tolerance {tol:e} (reached {reached:e})")]
    TailBoundMissing { tol: f64, reached: f64 },
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("epsilon {0} is outside (0, 1)")]
    EpsOutOfRange(f64),
    #[error("sigma must be positive")]
    DegenerateSigma,
    #[error("moment condition sum |log lambda|^3 lambda^2 < inf is violated")]
    MomentConditionViolated,
    #[error("enumeration frontier exceeded the budget of {0} entries")]
    LimitExceedsMemory(usize),
    #[error("computation budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("support of size {size} exceeds budget {budget} at dimension {d}")]
    UnsupportedDimension { d: usize, size: usize, budget: usize },
    #[error("unknown catalog entry '{0}'")]
    UnknownName(String),
    #[error("bad catalog parameters: {0}")]
    BadParams(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension must be at least 1")]
    ZeroDimension,
}

pub type Result<T> = std::result::Result<T, Error>;
