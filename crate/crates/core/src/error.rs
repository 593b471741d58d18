use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dilation structure: {0}")]
    InvalidStructure(String),

    #[error("supercritical order: Q - a*p = {0} must be positive")]
    SupercriticalOrder(String),

    #[error("degenerate index pair: a1 = a2 = {0}")]
    DegeneratePair(String),

    #[error("degenerate interpolation: a/Q + 1/p - 1/r = 0")]
    DegenerateInterpolation,

    #[error("infeasible exponent: {0}")]
    InfeasibleExponent(String),

    #[error("inadmissible indices: {0}")]
    Inadmissible(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: expected {expected} values, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("non-finite sample values in grid function")]
    NonFinite,

    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("gradient unsupported for p = {0}: integrand not C^1 for p < 2")]
    UnsupportedExponent(f64),

    #[error("degenerate projection: input has zero norm")]
    DegenerateProjection,

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("solver diverged at iteration {iteration}")]
    Diverged {
        iteration: usize,
        /// Last iterate, for post-mortem dumps.
        iterate: Box<crate::grid::GridFunction>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
