use thiserror::Error;

/// Errors raised by the spectral toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The conformal map has a pole at `z = 0`.
    #[error("pole: the spectral map is singular at z = 0")]
    Pole,

    /// The spectral parameter lies on (or numerically on) the cut `[-d, d]`.
    #[error("spectral parameter {re}{im:+}i lies on the cut [-{d}, {d}]")]
    BranchCut { re: f64, im: f64, d: usize },

    /// A lattice dimension does not satisfy a requirement of the operation.
    #[error("dimension {got} not supported here: {reason}")]
    Dimension { got: usize, reason: String },

    /// A box or grid is too small to make the result exact.
    #[error("truncation: {0}")]
    Truncation(String),

    /// A quadrature or iteration did not reach its tolerance.
    #[error("not converged: {0}")]
    NotConverged(String),

    /// Branch tracking of `log D` failed along a path.
    #[error("log branch lost at z = {re}{im:+}i: {reason}")]
    Branch { re: f64, im: f64, reason: String },

    /// A precondition of an operation is violated.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Malformed potential file or report input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
