use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything the engine can reject or fail on.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside the open interval (0, 1)")]
    ParameterOutOfRange { name: &'static str, value: f64 },

    #[error("preferred opinion {0:?} is not an opinion of this game")]
    UnknownPreferenceTarget(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid payoff matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid simplex state: {0}")]
    InvalidState(String),

    #[error("replicator field produced a non-finite value at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("eigenvalue iteration did not converge")]
    ConvergenceFailure,

    #[error("state is not a fixed point (field max-norm {residual:e})")]
    NotAFixedPoint { residual: f64 },

    #[error("the game has no stable fixed point to attract trajectories")]
    NoAttractor,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code, the variant name.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ParameterOutOfRange { .. } => "ParameterOutOfRange",
            Error::UnknownPreferenceTarget(_) => "UnknownPreferenceTarget",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidMatrix(_) => "InvalidMatrix",
            Error::InvalidState(_) => "InvalidState",
            Error::NonFiniteState { .. } => "NonFiniteState",
            Error::ConvergenceFailure => "ConvergenceFailure",
            Error::NotAFixedPoint { .. } => "NotAFixedPoint",
            Error::NoAttractor => "NoAttractor",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteState { .. }
                | Error::ConvergenceFailure
                | Error::NotAFixedPoint { .. }
                | Error::NoAttractor
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
