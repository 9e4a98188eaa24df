use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested quantity is undefined or infinite at these inputs.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} = {requested} exceeds the configured cap of {cap}")]
    Resource {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("{routine} did not converge after {iterations} iterations")]
    NonConvergence {
        routine: &'static str,
        iterations: usize,
    },

    /// A maximisation whose objective kept increasing as the search domain grew.
    #[error("objective diverges: {0}")]
    Divergence(String),

    /// Serialising a report failed.
    #[error("output error: {0}")]
    Output(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
