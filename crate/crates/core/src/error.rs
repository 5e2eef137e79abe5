use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A series or quadrature did not reach its tolerance.
    #[error("{function} did not converge after {terms} terms (partial value {partial})")]
    NonConvergence {
        function: &'static str,
        partial: f64,
        terms: usize,
    },

    /// An argument is outside the domain of the operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// A configuration value violates a named constraint.
    #[error("invalid configuration `{key}`: {constraint}")]
    Config { key: String, constraint: String },

    /// Root bracketing failed while solving for the throughput fixed point.
    #[error("could not bracket the throughput fixed point: {0}")]
    Bracket(String),

    /// A frame ran past its user cap without scheduling anyone.
    #[error("frame exceeded {cap} users without scheduling; the policy never stops")]
    FrameCap { cap: u64 },

    /// A sweep point failed; the sweep is aborted.
    #[error("sweep failed at {point}: {message}")]
    Sweep { point: String, message: String },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            constraint: constraint.into(),
        }
    }

    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }
}
