use thiserror::Error;

/// Errors raised by operator evaluation, quadrature and verification.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(
        "quadrature did not converge: error estimate {error:e} above target {target:e} at refinement depth {depth}"
    )]
    NonConvergence { depth: u32, error: f64, target: f64 },

    #[error("series truncation failed: {0}")]
    Truncation(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalog(String),

    #[error("missing metadata: {0}")]
    MissingMetadata(String),
}

impl Error {
    /// True for errors caused by invalid input rather than numerical failure.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Domain(_)
                | Error::Parse { .. }
                | Error::UnknownCatalog(_)
                | Error::MissingMetadata(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
