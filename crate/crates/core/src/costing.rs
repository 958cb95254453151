//! Holding and tardiness cost accounting.
//!
//! Holding costs accrue continuously: the ledger keeps the current level of
//! every cost-bearing state and integrates it over time in unit-days.
//! Tardiness is integrated the same way over the number of units that are
//! past their due date and not yet delivered, so an order delivered late by
//! `t` days contributes `quantity * t` unit-days.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostRates {
    pub wip_component: f64,
    pub component_stock: f64,
    pub wip_item: f64,
    pub fgi: f64,
    pub tardiness: f64,
}

impl Default for CostRates {
    fn default() -> Self {
        Self {
            wip_component: 0.5,
            component_stock: 1.0,
            wip_item: 1.0,
            fgi: 2.0,
            tardiness: 38.0,
        }
    }
}

impl CostRates {
    pub fn validate(&self) -> Result<()> {
        if self.as_array().iter().all(|r| *r >= 0.0 && r.is_finite()) {
            Ok(())
        } else {
            Err(SimError::InvalidScenario("cost rates must be non-negative".into()))
        }
    }

    pub fn rate(&self, category: CostCategory) -> f64 {
        self.as_array()[category as usize]
    }

    fn as_array(&self) -> [f64; 5] {
        [
            self.wip_component,
            self.component_stock,
            self.wip_item,
            self.fgi,
            self.tardiness,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CostCategory {
    WipComponent = 0,
    ComponentStock = 1,
    WipItem = 2,
    Fgi = 3,
    Tardiness = 4,
}

impl CostCategory {
    pub const ALL: [CostCategory; 5] = [
        Self::WipComponent,
        Self::ComponentStock,
        Self::WipItem,
        Self::Fgi,
        Self::Tardiness,
    ];
}

/// Unit levels of each cost-bearing state.
pub type Levels = [f64; 5];

/// Holding cost of `levels` kept constant for `days`.
pub fn accrue_holding(levels: &Levels, rates: &CostRates, days: f64) -> f64 {
    [
        CostCategory::WipComponent,
        CostCategory::ComponentStock,
        CostCategory::WipItem,
        CostCategory::Fgi,
    ]
    .iter()
    .map(|c| levels[*c as usize] * rates.rate(*c) * days)
    .sum()
}

/// Tardiness cost of one delivery: rate per unit per day late.
pub fn accrue_tardiness(quantity: f64, tardy_days: f64, rates: &CostRates) -> f64 {
    rates.tardiness * quantity * tardy_days.max(0.0)
}

#[derive(Debug, Clone, Default)]
pub struct CostLedger {
    levels: Levels,
    integrals: Levels,
    last_day: f64,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn levels(&self) -> &Levels {
        &self.levels
    }

    pub fn level(&self, category: CostCategory) -> f64 {
        self.levels[category as usize]
    }

    pub fn integrals(&self) -> &Levels {
        &self.integrals
    }

    pub fn advance(&mut self, now_day: f64) {
        let dt = now_day - self.last_day;
        debug_assert!(dt >= -1e-9, "ledger moved backwards by {dt}");
        if dt > 0.0 {
            for (acc, level) in self.integrals.iter_mut().zip(&self.levels) {
                *acc += level * dt;
            }
            self.last_day = now_day;
        }
    }

    pub fn change(&mut self, now_day: f64, category: CostCategory, delta: f64) {
        self.advance(now_day);
        let level = &mut self.levels[category as usize];
        *level += delta;
        // absorb rounding residue when a state empties
        if level.abs() < 1e-7 {
            *level = 0.0;
        }
    }

    /// Discards everything integrated so far; used at the end of the warm-up.
    pub fn reset_integrals(&mut self, now_day: f64) {
        self.advance(now_day);
        self.integrals = [0.0; 5];
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub wip_component: f64,
    pub component_stock: f64,
    pub wip_item: f64,
    pub fgi: f64,
    pub tardiness: f64,
}

impl CostBreakdown {
    pub fn from_array(a: Levels) -> Self {
        Self {
            wip_component: a[0],
            component_stock: a[1],
            wip_item: a[2],
            fgi: a[3],
            tardiness: a[4],
        }
    }

    pub fn as_array(&self) -> Levels {
        [
            self.wip_component,
            self.component_stock,
            self.wip_item,
            self.fgi,
            self.tardiness,
        ]
    }

    pub fn sum(&self) -> f64 {
        self.as_array().iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_array(self.as_array().map(|x| x * factor))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Busy fraction (setup plus processing) per machine over the measured window.
    pub utilization: Vec<f64>,
    /// Fraction of customer orders due in the window that shipped on time.
    pub on_time_fraction: f64,
    /// Mean release-to-completion time of item production orders, in days.
    pub mean_production_lead_time: f64,
    pub mean_fgi_units: f64,
    pub customer_orders_due: u64,
    pub production_orders_released: u64,
    pub events: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub measured_days: f64,
    pub total: CostBreakdown,
    pub per_day: CostBreakdown,
    pub overall_per_day: f64,
    pub diagnostics: Diagnostics,
}

/// Turns integrated unit-days into cost totals and per-day figures.
pub fn finalize(
    integrals: &Levels,
    rates: &CostRates,
    measured_days: f64,
    reached_day: f64,
    horizon_day: f64,
    diagnostics: Diagnostics,
) -> Result<RunResult> {
    if reached_day + 1e-9 < horizon_day {
        return Err(SimError::IncompleteRun {
            reached: reached_day,
            horizon: horizon_day,
        });
    }
    let mut total = [0.0; 5];
    for c in CostCategory::ALL {
        total[c as usize] = integrals[c as usize] * rates.rate(c);
    }
    let total = CostBreakdown::from_array(total);
    let per_day = total.scaled(1.0 / measured_days);
    Ok(RunResult {
        measured_days,
        total,
        overall_per_day: per_day.sum(),
        per_day,
        diagnostics,
    })
}
