//! ConWIP with a workload-based WIP-cap.
//!
//! A master production schedule batches open customer demand into item
//! orders (FOQ by default). With planned components there are two loops: the
//! item loop, whose orders are backward scheduled by the estimated item lead
//! time and may start a work-ahead-window buffer earlier, and the component
//! loop, scheduled further back by the estimated component lead time. With
//! a single loop the estimated item lead time is the work-ahead-window.
//!
//! Release is centralized: eligible orders go in earliest-due-date order
//! while the loop's released workload is below the cap. The workload is
//! returned when an order leaves the loop's last machine.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::netting::{foq_lots, fop_lots, net_requirements_phased};
use super::{
    consume_material, material_available, skus_by_level, ConwipParams, LoopId, LotPolicy,
    NewOrder, OrderFactory, OrderId, PlanningInput, ProductionOrder,
};
use crate::model::CalibratedScenario;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopState {
    pub wip: f64,
    pub cap: f64,
    /// Largest single workload ever admitted, for the overshoot bound.
    pub max_admitted: f64,
}

impl LoopState {
    pub fn new(cap: f64) -> Self {
        Self {
            wip: 0.0,
            cap,
            max_admitted: 0.0,
        }
    }

    /// Release test: strictly below the cap.
    pub fn admits(&self) -> bool {
        self.wip < self.cap
    }

    pub fn admit(&mut self, workload: f64) {
        self.wip += workload;
        self.max_admitted = self.max_admitted.max(workload);
    }

    pub fn complete(&mut self, workload: f64) {
        self.wip -= workload;
        if self.wip.abs() < 1e-6 {
            self.wip = 0.0;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopStates {
    pub item: LoopState,
    pub component: LoopState,
}

impl LoopStates {
    pub fn new(cap: f64) -> Self {
        Self {
            item: LoopState::new(cap),
            component: LoopState::new(cap),
        }
    }

    pub fn get(&self, id: LoopId) -> &LoopState {
        match id {
            LoopId::Item => &self.item,
            LoopId::Component => &self.component,
        }
    }

    pub fn get_mut(&mut self, id: LoopId) -> &mut LoopState {
        match id {
            LoopId::Item => &mut self.item,
            LoopId::Component => &mut self.component,
        }
    }
}

#[derive(Default, Clone)]
struct Requirements {
    qty: BTreeMap<i64, f64>,
    /// Earliest customer due date behind each bucket.
    priority: BTreeMap<i64, f64>,
}

impl Requirements {
    fn add(&mut self, bucket: i64, qty: f64, priority: f64) {
        *self.qty.entry(bucket).or_default() += qty;
        let p = self.priority.entry(bucket).or_insert(priority);
        *p = p.min(priority);
    }
}

fn lots(params: &ConwipParams, nets: &[(i64, f64)], mean_demand: f64) -> Vec<(i64, f64)> {
    match params.mps_lot_policy {
        LotPolicy::Foq => foq_lots(nets, params.mps_foq_lot_size * mean_demand),
        LotPolicy::Fop => fop_lots(nets, params.mps_foq_lot_size.round() as i64),
    }
}

pub fn conwip_plan(
    input: &PlanningInput<'_>,
    params: &ConwipParams,
    factory: &mut OrderFactory,
) -> Vec<ProductionOrder> {
    let cal = input.cal;
    let today = input.today as i64;
    let two_loops = cal.scenario.structure.has_planned_components();
    let item_lead = params.estimated_lead_time_items.round() as i64;
    let comp_lead = params
        .estimated_lead_time_components
        .unwrap_or(params.estimated_lead_time_items)
        .round() as i64;
    let buffer = if two_loops {
        params.work_ahead_window_buffer.unwrap_or(0.0).round() as i64
    } else {
        0
    };

    let mut req = vec![Requirements::default(); cal.skus.len()];
    for (sku, open) in input.demand.open.iter().enumerate() {
        for (due, qty) in open {
            req[sku].add((due.floor() as i64).max(today), *qty, *due);
        }
    }
    if two_loops {
        for p in input.pending {
            if let Some(c) = cal.skus[p.sku].child.filter(|c| cal.skus[*c].is_planned()) {
                req[c].add(p.planned_start_day.max(today), p.quantity, p.priority_due);
            }
        }
    }

    let mut out = Vec::new();
    for level in skus_by_level(cal) {
        for sku in level {
            let info = &cal.skus[sku];
            if !info.is_item() && !two_loops {
                continue;
            }
            let state = &input.stock[sku];
            // MPS orders stay firm until released, so receipts are time-phased
            let nets = net_requirements_phased(&req[sku].qty, &state.receipts_by_day(today), state.on_hand, today);
            for (due, qty) in lots(params, &nets, info.mean_daily_demand) {
                let priority = req[sku].priority.get(&due).copied().unwrap_or(due as f64);
                let (start, earliest, loop_id) = if info.is_item() {
                    let start = due - item_lead;
                    (start, start - buffer, LoopId::Item)
                } else {
                    let start = due - comp_lead;
                    (start, start, LoopId::Component)
                };
                if two_loops {
                    if let Some(c) = info.child.filter(|c| cal.skus[*c].is_planned()) {
                        req[c].add(start.max(today), qty, priority);
                    }
                }
                out.push(factory.make(
                    cal,
                    input.today,
                    NewOrder {
                        sku,
                        quantity: qty,
                        planned_start_day: start,
                        planned_end_day: due,
                        earliest_start_day: Some(earliest),
                        priority_due: priority,
                        loop_id: Some(loop_id),
                    },
                ));
            }
        }
    }
    out
}

/// Releases eligible orders in EDD order while their loop is below its cap.
///
/// An order is eligible once its earliest start day is reached and its child
/// component is in stock; ties on the due date go to the lower order id.
pub fn conwip_release(
    cal: &CalibratedScenario,
    pending: &[&ProductionOrder],
    stock: &mut [f64],
    loops: &mut LoopStates,
    today: u32,
) -> Vec<OrderId> {
    let mut candidates: Vec<&ProductionOrder> = pending
        .iter()
        .copied()
        .filter(|o| o.earliest_start_day.unwrap_or(o.planned_start_day) <= today as i64)
        .collect();
    candidates.sort_by(|a, b| {
        a.priority_due
            .total_cmp(&b.priority_due)
            .then(a.id.cmp(&b.id))
    });
    let mut out = Vec::new();
    for o in candidates {
        let state = loops.get_mut(o.loop_id.unwrap_or(LoopId::Item));
        if !state.admits() || !material_available(cal, o, stock) {
            continue;
        }
        consume_material(cal, o, stock);
        state.admit(o.workload_minutes);
        out.push(o.id);
    }
    out
}
