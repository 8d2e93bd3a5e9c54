use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid {matrix} value {value} at row {row}, column {column}: {reason}")]
    InvalidEntry {
        matrix: &'static str,
        row: usize,
        column: usize,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid attribute schema: {0}")]
    Schema(String),

    #[error("unknown attribute `{name}`; valid names are: {}", .valid.join(", "))]
    UnknownAttribute { name: String, valid: Vec<String> },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("normal equations are singular (pivot {pivot} vanished); retry with a positive ridge_eps")]
    Singular { pivot: usize },

    #[error("training diverged at iteration {iteration}: total loss is not finite; use a smaller lr_max")]
    Diverged { iteration: usize },

    #[error("direction for attribute `{attribute}` has (near-)zero norm")]
    DegenerateColumn { attribute: String },
}

impl Error {
    /// Divergence, singular systems and degenerate directions, as opposed to
    /// malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. } | Error::Diverged { .. } | Error::DegenerateColumn { .. }
        )
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
