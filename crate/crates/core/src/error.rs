use thiserror::Error;

/// Errors produced by the physics and sampling routines.
#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    /// A constructor or operation received a value outside its domain.
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The result is not representable as a finite double.
    #[error("numeric overflow in {0}")]
    Overflow(&'static str),

    /// The input is well formed but carries no information for the
    /// requested quantity (for example a zero squeeze inside a fine-tuning
    /// window, or a zero-error report contradicting both predictions).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}
