use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("quadrature order {order} too small, need at least {required}")]
    QuadratureTooCoarse { order: usize, required: usize },

    #[error("eigensolver did not converge (state {index:?})")]
    NoConvergence { index: Option<usize> },

    #[error("eigenpair {index} has residual {residual:e} above tolerance")]
    ResidualTooLarge { index: usize, residual: f64 },

    #[error("no dominant Fourier peak (peak/median = {ratio:.3})")]
    NoDominantPeak { ratio: f64 },

    #[error("window too small: {usable} usable points, need {required}")]
    WindowTooSmall { usable: usize, required: usize },

    #[error("no edge state: best low-l weight {best_weight:.4} below threshold")]
    NoEdgeState { best_weight: f64 },

    #[error("cubic roots ill-conditioned, residual {residual:e}")]
    IllConditioned { residual: f64 },

    #[error("no localized solution: |z| = {modulus} is on the unit circle")]
    NoLocalizedSolution { modulus: f64 },

    #[error("dimension mismatch: state has {state}, operator has {operator}")]
    DimensionMismatch { state: usize, operator: usize },
}
