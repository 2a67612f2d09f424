use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type.
///
/// `Divergence` is deliberately separate from `Solve`: a diverging Marchenko
/// fixed point is an expected runtime outcome for out-of-range reflection
/// data (the contraction hypothesis fails), while `Solve` marks a linear
/// system whose back-substitution residual exceeded its bound — that is a
/// bug or a catastrophically conditioned input, never business as usual.
#[derive(Debug, Error)]
pub enum Error {
    /// Scattering data or derived parameters violate a validity constraint.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A quantity left the domain of a closed-form map (e.g. |c| >= sqrt2).
    #[error("domain error: {0}")]
    Domain(String),

    /// Grid axes of two fields do not match where they must.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A dense linear solve failed or its residual exceeded the bound.
    #[error("linear solve failure: {0}")]
    Solve(String),

    /// The Marchenko fixed-point iteration is not contracting.
    #[error(
        "fixed-point divergence: contraction ratio {ratio:.3} >= 1 for {consecutive} \
         consecutive iterations (after {iterations} total)"
    )]
    Divergence {
        ratio: f64,
        consecutive: usize,
        iterations: usize,
    },

    /// Configuration file could not be parsed or failed validation.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
