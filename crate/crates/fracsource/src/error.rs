use thiserror::Error;

/// Library-wide error type.
///
/// `Numerical` is reserved for genuine numerical failures (a quadrature that
/// cannot reach its tolerance, a kernel value collapsing to zero); everything
/// the caller could have prevented is `Domain`, `InvalidArgument` or `Config`.
#[derive(Debug, Error)]
pub enum Error {
    /// A mathematical parameter is outside the domain the method is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// An argument violates a structural precondition (sizes, ordering, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A configuration file is missing, malformed or inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// An iterative numerical method failed to converge to its tolerance.
    #[error("numerical failure: {what} (achieved {achieved:.3e})")]
    Numerical { what: String, achieved: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the CLI: config-class errors exit 2,
    /// numerical failures exit 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
