use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A single violated parameter constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub param: String,
    pub constraint: String,
}

impl Violation {
    pub(crate) fn new(param: &str, constraint: &str) -> Self {
        Self {
            param: param.to_string(),
            constraint: constraint.to_string(),
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} violates {}", self.param, self.constraint)
    }
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("domain error at t={index}: {message}")]
    DomainAt { index: usize, message: String },

    #[error("inadmissible parameters: {}", join(.0))]
    InvalidParams(Vec<Violation>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("simulated path left the stationary range at step {step} (|f| = {value:e})")]
    Nonstationary { step: usize, value: f64 },

    #[error("degenerate long-run variance {sigma2:e}: log Lambda_t is (numerically) constant, e.g. alpha = gamma = 0")]
    DegenerateVariance { sigma2: f64 },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
