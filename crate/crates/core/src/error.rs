use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A point or parameter fell outside the set an operation is defined on.
    #[error("{what} = {value} is outside [0, 1]")]
    Domain { what: &'static str, value: f64 },

    /// Two grids (or a grid and a partition) cannot be brought to a common
    /// uniform refinement.
    #[error("resolution mismatch: {0}")]
    Resolution(String),

    /// Operands use representations that cannot be combined.
    #[error("representation mismatch: {0}")]
    Representation(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// Exact cut norm requested for a partition too large for exhaustive search.
    #[error("exact cut norm needs at most {max} cells, got {n}; use the operator-norm interval instead")]
    Size { n: usize, max: usize },

    /// A construction invariant (symmetry, bounds, orthonormality, finiteness) failed.
    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("state blew up (sup norm {sup:e}) at t = {time}")]
    Numeric { time: f64, sup: f64 },

    #[error("system is not exactly controllable: {0}")]
    Controllability(String),

    #[error("controllability Gramian is singular on eigenspace {index} (coefficient {value:e})")]
    SingularGramian { index: usize, value: f64 },

    #[error("unsupported system structure: {0}")]
    UnsupportedStructure(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn resolution(msg: impl Into<String>) -> Self {
        Error::Resolution(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
