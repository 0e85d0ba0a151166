use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A construction parameter lies outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// A query point lies outside the domain a function is defined on.
    #[error("argument {value} outside domain: {reason}")]
    Domain { value: f64, reason: String },

    /// A lattice operation reached past the deepest generation.
    #[error("depth {requested} exceeds lattice depth {depth}")]
    Range { requested: usize, depth: usize },

    /// Input data violates a structural invariant.
    #[error("validation failed: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid(reason: impl Into<String>) -> Self {
        Error::Validation(reason.into())
    }
}
