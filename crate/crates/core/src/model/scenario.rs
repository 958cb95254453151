use serde::{Deserialize, Serialize};

use crate::costing::CostRates;
use crate::error::{Result, SimError};
use crate::model::structure::{build_structure, Structure, StructureKind};
use crate::time::DEFAULT_MINUTES_PER_DAY;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionCvs {
    pub processing: f64,
    pub setup: f64,
    pub demand_qty: f64,
    pub clt_variable: f64,
}

impl Default for DistributionCvs {
    fn default() -> Self {
        Self {
            processing: 0.2,
            setup: 0.2,
            demand_qty: 0.2,
            clt_variable: 0.5,
        }
    }
}

impl DistributionCvs {
    pub fn all(cv: f64) -> Self {
        Self {
            processing: cv,
            setup: cv,
            demand_qty: cv,
            clt_variable: cv,
        }
    }
}

/// A fully specified world: structure, load, distributions, costs and horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub structure: Structure,
    pub planned_shop_load: f64,
    pub minutes_per_day: f64,
    pub mean_total_item_demand_per_day: f64,
    pub setup_share: f64,
    pub cv: DistributionCvs,
    pub clt_fixed_days: f64,
    pub clt_variable_mean_days: f64,
    pub cost_rates: CostRates,
    pub horizon_days: u32,
    pub warmup_days: u32,
    pub seed: u64,
}

impl Scenario {
    /// The default environment for `kind` at the given planned shop load.
    pub fn new(kind: StructureKind, planned_shop_load: f64) -> Self {
        Self {
            structure: build_structure(kind),
            planned_shop_load,
            minutes_per_day: DEFAULT_MINUTES_PER_DAY,
            mean_total_item_demand_per_day: 500.0,
            setup_share: 0.10,
            cv: DistributionCvs::default(),
            clt_fixed_days: 10.0,
            clt_variable_mean_days: 5.0,
            cost_rates: CostRates::default(),
            horizon_days: 400,
            warmup_days: 150,
            seed: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SimError::InvalidScenario(m));
        self.structure.validate()?;
        if !(self.planned_shop_load > self.setup_share && self.planned_shop_load < 1.0) {
            return Err(SimError::BadLoad {
                load: self.planned_shop_load,
                setup_share: self.setup_share,
            });
        }
        if !(self.setup_share >= 0.0) {
            return bad(format!("setup share {} is negative", self.setup_share));
        }
        if !(self.minutes_per_day > 0.0) {
            return bad("minutes_per_day must be positive".into());
        }
        if !(self.mean_total_item_demand_per_day > 0.0) {
            return bad("mean total demand must be positive".into());
        }
        let cvs = [self.cv.processing, self.cv.setup, self.cv.demand_qty, self.cv.clt_variable];
        if cvs.iter().any(|c| !(*c >= 0.0)) {
            return bad("coefficients of variation must be non-negative".into());
        }
        if !(self.clt_fixed_days >= 0.0) || !(self.clt_variable_mean_days > 0.0) {
            return bad("customer lead time must have a non-negative fixed part and a positive variable mean".into());
        }
        if self.horizon_days <= self.warmup_days {
            return bad(format!(
                "horizon {} must exceed warm-up {}",
                self.horizon_days, self.warmup_days
            ));
        }
        self.cost_rates.validate()?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("scenario serializes");
        out.push('\n');
        out
    }

    pub fn measured_days(&self) -> u32 {
        self.horizon_days - self.warmup_days
    }
}
