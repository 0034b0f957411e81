use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite input sample: {0}")]
    NonFiniteSample(f64),

    #[error("non-finite value produced while computing {0}")]
    NonFinite(&'static str),

    #[error("distributions have mismatched support")]
    MismatchedSupport,

    #[error("no analytic form for this pair of distributions")]
    NoAnalyticForm,

    #[error("degenerate drift: E[log fn/f] is zero under {0}")]
    DegenerateDrift(&'static str),

    #[error("growth-rate floor is not positive: I = {0}")]
    NonPositiveRate(f64),

    #[error("unknown exponential family: {0}")]
    UnknownFamily(String),

    #[error("theta has dimension {got}, family expects {want}")]
    ThetaDimension { got: usize, want: usize },

    #[error("window is too short: {got} samples, need at least {want}")]
    WindowTooShort { got: usize, want: usize },

    #[error("maximizer did not converge after {0} iterations")]
    NonConvergence(usize),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("segment role {0:?} assigned more than once")]
    DuplicateRole(String),

    #[error("segment role {0:?} is missing")]
    MissingRole(String),

    #[error("no trial produced a usable detection delay")]
    ZeroValidTrials,

    #[error("plans are not comparable: {0}")]
    PlanMismatch(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
