use alloc::string::String;
use core::fmt;

/// Errors raised by the computational core.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    Domain(String),
    /// `‖qβ‖` vanished at the working precision.
    Degenerate { q: u64 },
    /// A comparison could not be decided below the precision cap.
    PrecisionExhausted { what: String, bits: u32 },
    /// Input shape the operation deliberately does not handle.
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Degenerate { q } => {
                write!(f, "degenerate input: ||q*beta|| = 0 at q = {q}")
            }
            Error::PrecisionExhausted { what, bits } => {
                write!(f, "undecidable at {bits} bits: {what}")
            }
            Error::Unsupported(msg) => write!(f, "unsupported input: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
