use thiserror::Error;

use ppcs_core::SimError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid grid for {name}: {reason}")]
    InvalidGrid { name: String, reason: String },

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("store was written for a different plan: {0}")]
    PlanMismatch(String),

    #[error("incomplete scope: {} runs missing, first {}", missing.len(), missing.first().map(|m| m.to_string()).unwrap_or_default())]
    IncompleteScope { missing: Vec<RunCoord> },

    #[error("no data in {0}")]
    NoData(String),

    #[error(transparent)]
    Sim(#[from] SimError),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Parse(e.to_string())
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// `(iteration, replication)` of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RunCoord {
    pub iteration: u64,
    pub replication: u32,
}

impl std::fmt::Display for RunCoord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "iteration {} replication {}", self.iteration, self.replication)
    }
}
