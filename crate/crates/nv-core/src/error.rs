//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("hyperfine tensor {name} is not symmetric (max |A - A^T| = {max_asym:.3e} MHz)")]
    NonSymmetricTensor { name: &'static str, max_asym: f64 },

    #[error("matrix is not Hermitian (‖H - H†‖_F = {residual:.3e} · ‖H‖_F)")]
    NonHermitian { residual: f64 },

    #[error("eigendecomposition did not converge")]
    EigenFailed,

    #[error(
        "level tracking failed at grid index {grid_index} for level {level} \
         (best overlap {best_overlap:.3}); refine the grid"
    )]
    TrackingFailure {
        grid_index: usize,
        level: usize,
        best_overlap: f64,
    },

    #[error("sweep grid must be strictly monotone with at least {min} points")]
    BadGrid { min: usize },

    #[error(
        "time propagation did not converge: halving the step changed the \
         final state by {delta:.3e} (> {tol:.1e})"
    )]
    StepNotConverged { delta: f64, tol: f64 },

    #[error("fit did not converge after {iterations} iterations (residual norm {residual:.3e})")]
    FitDidNotConverge { iterations: usize, residual: f64 },

    #[error("frequency band [{lo}, {hi}] MHz contains no spectral content")]
    EmptyBand { lo: f64, hi: f64 },

    #[error("spectral lines overlap; widths are unreliable: {0}")]
    UnresolvedLines(String),

    #[error("inconsistent magnetometry inputs: {0}")]
    InconsistentInputs(String),

    #[error("transverse drive undefined: all four line amplitudes are zero")]
    NoTransverseDrive,

    #[error("too many noise samples discarded: {discarded} of {total}")]
    TooManyDiscards { discarded: usize, total: usize },

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
