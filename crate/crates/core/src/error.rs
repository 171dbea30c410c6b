use thiserror::Error;

/// Errors raised by the library. Unsatisfied admissibility is reported as
/// data by [`crate::bounds::check_admissibility`]; the bound evaluators turn
/// it into [`Error::Inadmissible`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("matrix must have dimension at least 1")]
    Empty,

    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("rank {p} is invalid for dimension {n}")]
    InvalidRank { p: usize, n: usize },

    #[error("zero eigenvalue at index {index} inside the selected window")]
    Singular { index: usize },

    #[error("the {p} smallest-magnitude eigenvalues do not form a unique window around the sign boundary")]
    AmbiguousIndexing { p: usize },

    #[error("spectrum is not positive definite (smallest eigenvalue {min})")]
    NotPositiveDefinite { min: f64 },

    #[error("inadmissible noise: min(lambda_n, gap) / (4 ||E||) = {margin:.6e}")]
    Inadmissible { margin: f64 },

    #[error("degenerate eigengap {gap:.3e} at index {index}")]
    DegenerateGap { index: usize, gap: f64 },

    #[error("point {re} + {im}i lies on the spectrum")]
    OnSpectrum { re: f64, im: f64 },

    #[error("quadrature did not reach tolerance {tol:e}: best value {value:e}, change {change:e}")]
    QuadratureTolerance { tol: f64, value: f64, change: f64 },

    #[error("conjugate gradient breakdown at iteration {iteration}")]
    Breakdown { iteration: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerical preconditions (inadmissible noise,
    /// degenerate gaps, breakdowns) as opposed to malformed input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. }
                | Error::AmbiguousIndexing { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::Inadmissible { .. }
                | Error::DegenerateGap { .. }
                | Error::OnSpectrum { .. }
                | Error::QuadratureTolerance { .. }
                | Error::Breakdown { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
