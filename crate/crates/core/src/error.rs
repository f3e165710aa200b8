use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A precondition on the relation between arguments (e.g. gcd(a, m) = 1) fails.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Generated data fails an invariant (non-positive modulus, non-monotone sequence).
    #[error("validation error: {0}")]
    Validation(String),
    /// Exact integer arithmetic would leave the supported width.
    #[error("range error: {0}")]
    Range(String),
    /// A work, memory or enumeration budget would be exceeded.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// A floor or phase could not be certified in extended precision.
    #[error("precision error: {0}")]
    Precision(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Precondition(_) | Error::Validation(_) | Error::Config(_) => 2,
            Error::Range(_) | Error::Capacity(_) => 3,
            Error::Precision(_) => 4,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
        }
    }
}

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(format!($($arg)*)))
    };
}
pub(crate) use bail;
