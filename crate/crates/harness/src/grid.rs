//! Parameter grids given as min / max / step.

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterGrid {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl ParameterGrid {
    pub fn new(name: &str, min: f64, max: f64, step: f64) -> Self {
        Self {
            name: name.to_string(),
            min,
            max,
            step,
        }
    }

    /// A grid with a single level.
    pub fn fixed(name: &str, value: f64) -> Self {
        Self::new(name, value, value, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| {
            Err(HarnessError::InvalidGrid {
                name: self.name.clone(),
                reason: reason.to_string(),
            })
        };
        if ![self.min, self.max, self.step].iter().all(|x| x.is_finite()) {
            return bad("bounds and step must be finite");
        }
        if self.step <= 0.0 {
            return bad("step must be positive");
        }
        if self.max < self.min {
            return bad("max is below min");
        }
        Ok(())
    }

    /// floor((max - min) / step) + 1
    pub fn level_count(&self) -> usize {
        ((self.max - self.min) / self.step + EPS).floor() as usize + 1
    }

    pub fn levels(&self) -> Vec<f64> {
        (0..self.level_count())
            .map(|i| {
                let v = self.min + i as f64 * self.step;
                // snap to the step's decimal resolution so 0.1 + 0.2 prints as 0.3
                (v * 1e9).round() / 1e9
            })
            .collect()
    }
}
