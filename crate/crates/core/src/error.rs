use thiserror::Error;

use crate::fitting::FitResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("numerical instability: {0}")]
    NumericalInstability(String),

    /// The runtime search reached its ceiling without meeting the threshold.
    #[error("no runtime up to {ceiling} reached success probability {threshold} (last probe T={last_time}, p={last_success})")]
    RuntimeCeiling {
        ceiling: f64,
        threshold: f64,
        last_time: f64,
        last_success: f64,
    },

    /// The fit did not converge; carries the best iterate found.
    #[error("fit did not converge after {iterations} iterations (best chi2 = {})", best.chi2)]
    FitNonConvergence { iterations: usize, best: Box<FitResult> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
