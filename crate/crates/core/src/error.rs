use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by the zero series")]
    DivisionByZero,

    /// The result carries no significant terms and its truncation order is
    /// negative, so even its magnitude class is unknown.
    #[error("order exhausted: no significant terms up to truncation order {order}")]
    OrderExhausted { order: String },

    #[error("standard part is undefined for an infinite value (valuation {valuation})")]
    InfiniteStandardPart { valuation: String },

    #[error("zero polynomial")]
    ZeroPolynomial,

    #[error("leading coefficient is zero")]
    LeadingCoefficientZero,

    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("size mismatch: {left} roots vs {right} roots")]
    SizeMismatch { left: usize, right: usize },

    #[error("root iteration did not converge after {iterations} iterations")]
    NonConvergence {
        iterations: usize,
        best: Vec<Complex64>,
    },

    #[error("companion eigenvalue iteration failed")]
    EigenFailure,

    #[error("root {root} is not simple (|f'(r)| = {derivative:e}); use root trajectories instead")]
    NotSimpleRoot { root: Complex64, derivative: f64 },

    #[error("{root} is not a root of the base polynomial (|f(r)| = {residual:e})")]
    NotARoot { root: Complex64, residual: f64 },

    #[error("interpolation matrix is numerically singular (pivot {pivot:e})")]
    InterpolationSingular { pivot: f64 },

    #[error("series evaluation overflowed at t = {t:e}")]
    Overflow { t: f64 },

    #[error(
        "no bracket for delta in [{lo:e}, {hi:e}]: worst distance {lo_distance:e} at lower end, {hi_distance:e} at upper end"
    )]
    BracketNotEstablished {
        lo: f64,
        hi: f64,
        lo_distance: f64,
        hi_distance: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at {position}: {message}")]
    Parse { position: String, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
