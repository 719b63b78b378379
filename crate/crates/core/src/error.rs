use thiserror::Error;

/// Errors raised by the library.
///
/// `Domain` and `Usage` errors signal bad input; the remaining variants mean
/// a numerical precondition (resolution, support, budget) does not hold.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    Usage(String),

    #[error("resolution too coarse: {0}")]
    Resolution(String),

    #[error("support violation: {0}")]
    Support(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("incompatible grids: {0}")]
    Grid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for violated numerical preconditions as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Resolution(_) | Error::Support(_) | Error::Budget(_) | Error::Grid(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($arg:tt)*) => {
        if !$cond {
            return Err($crate::error::Error::$variant(format!($($arg)*)));
        }
    };
}
pub(crate) use ensure;
