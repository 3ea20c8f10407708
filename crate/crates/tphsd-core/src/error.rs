//! Error taxonomy shared across the solver.

use thiserror::Error;

/// Classifies a [`SolverError`] by recoverability: `Config` and
/// `DimensionMismatch` are detectable before a run starts, the
/// others arise while iterating.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    RankDeficient,
    NumericalFailure,
    DimensionMismatch,
}

#[derive(Debug, Clone, Error)]
pub enum SolverError {
    #[error("config error: {message}")]
    Config { message: String },

    #[error("rank deficient Jacobian: {message}{}", fmt_iter(.iter))]
    RankDeficient {
        message: String,
        iter: Option<usize>,
    },

    #[error("numerical failure: {message}{}", fmt_iter(.iter))]
    NumericalFailure {
        message: String,
        iter: Option<usize>,
    },

    #[error("dimension mismatch: {message}")]
    DimensionMismatch { message: String },
}

fn fmt_iter(iter: &Option<usize>) -> String {
    match iter {
        Some(k) => format!(" (iteration {k})"),
        None => String::new(),
    }
}

impl SolverError {
    pub fn config(message: impl Into<String>) -> Self {
        SolverError::Config {
            message: message.into(),
        }
    }

    pub fn dimension(message: impl Into<String>) -> Self {
        SolverError::DimensionMismatch {
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>, iter: Option<usize>) -> Self {
        SolverError::NumericalFailure {
            message: message.into(),
            iter,
        }
    }

    pub fn rank_deficient(message: impl Into<String>, iter: Option<usize>) -> Self {
        SolverError::RankDeficient {
            message: message.into(),
            iter,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            SolverError::Config { .. } => ErrorKind::Config,
            SolverError::RankDeficient { .. } => ErrorKind::RankDeficient,
            SolverError::NumericalFailure { .. } => ErrorKind::NumericalFailure,
            SolverError::DimensionMismatch { .. } => ErrorKind::DimensionMismatch,
        }
    }

    /// True for errors that can only surface before the iteration loop runs.
    pub fn is_pre_run(&self) -> bool {
        matches!(
            self.kind(),
            ErrorKind::Config | ErrorKind::DimensionMismatch
        )
    }
}
