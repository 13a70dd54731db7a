use thiserror::Error;

/// Errors raised by the library's checks, searches and constructions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An operation was applied to an object of the wrong flavor or shape.
    #[error("misuse: {0}")]
    Misuse(String),
    #[error("enumeration cap exceeded: {what} needs more than {cap} steps")]
    CapExceeded { what: String, cap: u64 },
    #[error("palette overflow: {needed} classes but only {palette} colors")]
    PaletteOverflow { needed: usize, palette: usize },
    #[error("operands come from different algebras")]
    MixedAlgebras,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
