use thiserror::Error;

use crate::model::SkuId;
use crate::time::SimTime;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("event scheduled at {event} but clock is already at {clock}")]
    PastEvent { event: SimTime, clock: SimTime },

    #[error("lognormal moments out of range: mean={mean}, cv={cv}")]
    BadMoment { mean: f64, cv: f64 },

    #[error("unknown sku {0}")]
    UnknownSku(SkuId),

    #[error("infeasible calibration: {0}")]
    Infeasible(String),

    #[error("planned shop load {load} must exceed setup share {setup_share} and stay below 1")]
    BadLoad { load: f64, setup_share: f64 },

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid planning parameters: {0}")]
    InvalidParams(String),

    #[error("run stopped at day {reached} before the horizon day {horizon}")]
    IncompleteRun { reached: f64, horizon: f64 },

    #[error("invariant violated at {at}: {what}")]
    Invariant { at: SimTime, what: String },

    #[error("i/o: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for SimError {
    fn from(e: std::io::Error) -> Self {
        SimError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for SimError {
    fn from(e: serde_json::Error) -> Self {
        SimError::Parse(e.to_string())
    }
}

impl From<csv::Error> for SimError {
    fn from(e: csv::Error) -> Self {
        SimError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
