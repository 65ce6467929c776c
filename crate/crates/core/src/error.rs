use thiserror::Error;

/// Errors produced by the state, measure and conversion routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("spectral mismatch: max eigenvalue difference {0:.3e}")]
    SpectralMismatch(f64),

    #[error("degenerate rank: expected {expected}, found {found}")]
    DegenerateRank { expected: usize, found: usize },

    #[error("rank mismatch: input rank {input}, candidate ranks {candidates:?}")]
    RankMismatch { input: usize, candidates: Vec<usize> },

    #[error("search exhausted after {attempts} attempts (best |dC| = {best_delta_c:.3e})")]
    SearchExhausted { best_delta_c: f64, attempts: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
