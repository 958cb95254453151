use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Result, SimError};
use crate::model::scenario::Scenario;
use crate::model::structure::{SkuId, SkuKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibratedStep {
    pub machine: usize,
    /// Mean processing minutes per unit.
    pub unit_minutes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkuInfo {
    pub id: SkuId,
    pub kind: SkuKind,
    pub bom_level: u32,
    /// Dense index of the child sku.
    pub child: Option<usize>,
    pub demand_share: f64,
    pub mean_daily_demand: f64,
    pub routing: Vec<CalibratedStep>,
}

impl SkuInfo {
    pub fn is_item(&self) -> bool {
        self.kind == SkuKind::Item
    }

    pub fn is_planned(&self) -> bool {
        self.kind != SkuKind::RawMaterial
    }
}

/// Scenario with demand means and processing/setup means resolved so that
/// every machine carries the planned shop load.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibratedScenario {
    pub scenario: Scenario,
    pub machines: Vec<String>,
    pub skus: Vec<SkuInfo>,
    /// Mean setup minutes per order start, per machine.
    pub setup_minutes: Vec<f64>,
    /// Skus with a routing step on each machine.
    pub skus_per_machine: Vec<usize>,
}

impl CalibratedScenario {
    pub fn calibrate(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let st = &scenario.structure;
        let mpd = scenario.minutes_per_day;
        let rho = scenario.planned_shop_load;
        let share = scenario.setup_share;

        let index: BTreeMap<SkuId, usize> =
            st.skus.iter().enumerate().map(|(i, s)| (s.id, i)).collect();
        let machine_index: BTreeMap<&str, usize> = st
            .machines
            .iter()
            .enumerate()
            .map(|(i, m)| (m.as_str(), i))
            .collect();

        let mut demand = Vec::with_capacity(st.skus.len());
        let mut shares = Vec::with_capacity(st.skus.len());
        for sku in &st.skus {
            let s = st.demand_share_of(sku.id)?;
            shares.push(s);
            demand.push(s * scenario.mean_total_item_demand_per_day);
        }

        // raw weighted load and distinct skus per machine
        let n_machines = st.machines.len();
        let mut raw_load = vec![0.0; n_machines];
        let mut skus_on = vec![std::collections::BTreeSet::new(); n_machines];
        for routing in &st.routings {
            let i = index[&routing.sku];
            for step in &routing.steps {
                let m = machine_index[step.machine.as_str()];
                raw_load[m] += demand[i] * step.weight;
                skus_on[m].insert(i);
            }
        }
        let target = (rho - share) * mpd;
        let mut scale = vec![0.0; n_machines];
        for m in 0..n_machines {
            if skus_on[m].is_empty() || raw_load[m] <= 0.0 {
                return Err(SimError::Infeasible(format!(
                    "machine {} has no routed sku",
                    st.machines[m]
                )));
            }
            scale[m] = target / raw_load[m];
        }
        let skus_per_machine: Vec<usize> = skus_on.iter().map(|s| s.len()).collect();
        let setup_minutes: Vec<f64> = skus_per_machine
            .iter()
            .map(|n| share * mpd / *n as f64)
            .collect();

        let skus = st
            .skus
            .iter()
            .enumerate()
            .map(|(i, sku)| {
                let routing = st
                    .routing(sku.id)
                    .map(|r| {
                        r.steps
                            .iter()
                            .map(|step| {
                                let m = machine_index[step.machine.as_str()];
                                CalibratedStep {
                                    machine: m,
                                    unit_minutes: step.weight * scale[m],
                                }
                            })
                            .collect()
                    })
                    .unwrap_or_default();
                SkuInfo {
                    id: sku.id,
                    kind: sku.kind,
                    bom_level: sku.bom_level,
                    child: sku.child.map(|c| index[&c]),
                    demand_share: shares[i],
                    mean_daily_demand: demand[i],
                    routing,
                }
            })
            .collect();

        let cal = Self {
            scenario: scenario.clone(),
            machines: st.machines.clone(),
            skus,
            setup_minutes,
            skus_per_machine,
        };
        for (m, load) in cal.planned_loads().iter().enumerate() {
            if (load - rho).abs() > 1e-9 {
                return Err(SimError::Infeasible(format!(
                    "machine {} calibrated to load {load}, expected {rho}",
                    cal.machines[m]
                )));
            }
        }
        Ok(cal)
    }

    /// Planned load per machine: expected processing plus one setup per routed
    /// sku per day, as a fraction of daily capacity.
    pub fn planned_loads(&self) -> Vec<f64> {
        let mut minutes = vec![0.0; self.machines.len()];
        for sku in &self.skus {
            for step in &sku.routing {
                minutes[step.machine] += sku.mean_daily_demand * step.unit_minutes;
            }
        }
        minutes
            .iter()
            .zip(&self.setup_minutes)
            .zip(&self.skus_per_machine)
            .map(|((p, s), n)| (p + s * *n as f64) / self.scenario.minutes_per_day)
            .collect()
    }

    pub fn sku_index(&self, id: SkuId) -> Result<usize> {
        self.skus
            .iter()
            .position(|s| s.id == id)
            .ok_or(SimError::UnknownSku(id))
    }

    pub fn items(&self) -> impl Iterator<Item = (usize, &SkuInfo)> {
        self.skus.iter().enumerate().filter(|(_, s)| s.is_item())
    }

    pub fn minutes_per_day(&self) -> f64 {
        self.scenario.minutes_per_day
    }

    /// Standard workload of an order: processing at mean times plus one mean
    /// setup per routing step.
    pub fn standard_workload(&self, sku: usize, quantity: f64) -> f64 {
        self.skus[sku]
            .routing
            .iter()
            .map(|st| quantity * st.unit_minutes + self.setup_minutes[st.machine])
            .sum()
    }
}
