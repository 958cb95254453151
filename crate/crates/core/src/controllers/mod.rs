//! Planning and release logic of the three production planning and control
//! systems: MRP (push, demand driven), the reorder point system (pull,
//! authorizes production from inventory position) and ConWIP (pull, demand
//! driven, workload-capped loops).

mod conwip;
mod mrp;
pub mod netting;
mod params;
mod rps;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{CalibratedScenario, SkuId};
use crate::time::SimTime;

pub use conwip::{conwip_plan, conwip_release, LoopState, LoopStates};
pub use mrp::{mrp_plan, mrp_release};
pub use params::{ConwipParams, ControllerParams, LotPolicy, MrpParams, Ppcs, RpsParams};
pub use rps::rps_review;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrderId(pub u64);

impl fmt::Display for OrderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PO{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopId {
    Item,
    Component,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductionOrder {
    pub id: OrderId,
    /// Dense sku index into the calibrated scenario.
    pub sku: usize,
    pub sku_id: SkuId,
    pub quantity: f64,
    pub created_day: u32,
    pub planned_start_day: i64,
    pub planned_end_day: i64,
    /// ConWIP only: first day release is allowed.
    pub earliest_start_day: Option<i64>,
    /// Release priority date (earliest due date first).
    pub priority_due: f64,
    pub released_at: Option<SimTime>,
    pub completed_at: Option<SimTime>,
    pub route_position: usize,
    /// Standard processing plus setup minutes over the whole routing.
    pub workload_minutes: f64,
    pub loop_id: Option<LoopId>,
}

impl ProductionOrder {
    /// Release time, which is the system entry used by FISFO dispatching.
    pub fn system_entry(&self) -> Option<SimTime> {
        self.released_at
    }

    pub fn is_released(&self) -> bool {
        self.released_at.is_some()
    }
}

/// Hands out order ids and fills in the derived order fields.
#[derive(Debug, Clone, Default)]
pub struct OrderFactory {
    next_id: u64,
}

pub struct NewOrder {
    pub sku: usize,
    pub quantity: f64,
    pub planned_start_day: i64,
    pub planned_end_day: i64,
    pub earliest_start_day: Option<i64>,
    pub priority_due: f64,
    pub loop_id: Option<LoopId>,
}

impl OrderFactory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn issued(&self) -> u64 {
        self.next_id
    }

    pub fn make(&mut self, cal: &CalibratedScenario, today: u32, o: NewOrder) -> ProductionOrder {
        let id = OrderId(self.next_id);
        self.next_id += 1;
        ProductionOrder {
            id,
            sku: o.sku,
            sku_id: cal.skus[o.sku].id,
            quantity: o.quantity,
            created_day: today,
            planned_start_day: o.planned_start_day,
            planned_end_day: o.planned_end_day,
            earliest_start_day: o.earliest_start_day,
            priority_due: o.priority_due,
            released_at: None,
            completed_at: None,
            route_position: 0,
            workload_minutes: cal.standard_workload(o.sku, o.quantity),
            loop_id: o.loop_id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduledReceipt {
    pub order: OrderId,
    pub quantity: f64,
    pub due_day: i64,
}

/// Inventory view of one sku at a planning run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StockState {
    pub on_hand: f64,
    /// Open production orders of this sku (created, not completed).
    pub scheduled_receipts: Vec<ScheduledReceipt>,
    /// Items: customer quantity due and not delivered. Components: quantity
    /// committed to parent orders that have not yet withdrawn it.
    pub backorders: f64,
    pub safety_stock_abs: f64,
}

impl StockState {
    pub fn receipts_total(&self) -> f64 {
        self.scheduled_receipts.iter().map(|r| r.quantity).sum()
    }

    /// Receipts bucketed at their planned end day, overdue ones at `today`.
    pub fn receipts_by_day(&self, today: i64) -> BTreeMap<i64, f64> {
        let mut out = BTreeMap::new();
        for r in &self.scheduled_receipts {
            *out.entry(r.due_day.max(today)).or_default() += r.quantity;
        }
        out
    }

    pub fn inventory_position(&self) -> f64 {
        self.on_hand + self.receipts_total() - self.backorders
    }
}

/// Open customer demand per item: `(due day, quantity)` of every arrived,
/// undelivered customer order.
#[derive(Debug, Clone, Default)]
pub struct DemandBook {
    pub open: Vec<Vec<(f64, f64)>>,
}

impl DemandBook {
    pub fn new(n_skus: usize) -> Self {
        Self {
            open: vec![Vec::new(); n_skus],
        }
    }
}

/// Everything a planning run may look at.
pub struct PlanningInput<'a> {
    pub cal: &'a CalibratedScenario,
    pub stock: &'a [StockState],
    pub demand: &'a DemandBook,
    /// Created but unreleased production orders (they still need their child).
    pub pending: &'a [&'a ProductionOrder],
    pub today: u32,
}

/// Planned skus grouped by BoM level, lowest level first.
pub(crate) fn skus_by_level(cal: &CalibratedScenario) -> Vec<Vec<usize>> {
    let max = cal.skus.iter().map(|s| s.bom_level).max().unwrap_or(0) as usize;
    let mut levels = vec![Vec::new(); max + 1];
    for (i, s) in cal.skus.iter().enumerate() {
        if s.is_planned() {
            levels[s.bom_level as usize].push(i);
        }
    }
    levels.retain(|l| !l.is_empty());
    levels
}

/// True when `order` can take its child component from `stock` right now.
pub fn material_available(cal: &CalibratedScenario, order: &ProductionOrder, stock: &[f64]) -> bool {
    match cal.skus[order.sku].child {
        Some(c) if cal.skus[c].is_planned() => stock[c] + 1e-9 >= order.quantity,
        _ => true,
    }
}

/// Withdraws the child component of `order`; raw material is unlimited.
pub fn consume_material(cal: &CalibratedScenario, order: &ProductionOrder, stock: &mut [f64]) {
    if let Some(c) = cal.skus[order.sku].child {
        if cal.skus[c].is_planned() {
            stock[c] = (stock[c] - order.quantity).max(0.0);
        }
    }
}

/// Mutable controller state for one run.
#[derive(Debug, Clone)]
pub enum Controller {
    Mrp(MrpParams),
    Rps(RpsParams),
    Conwip(ConwipParams, LoopStates),
}

impl Controller {
    pub fn new(params: &ControllerParams) -> Self {
        match params {
            ControllerParams::Mrp(p) => Self::Mrp(p.clone()),
            ControllerParams::Rps(p) => Self::Rps(p.clone()),
            ControllerParams::Conwip(p) => Self::Conwip(p.clone(), LoopStates::new(p.wip_cap)),
        }
    }

    pub fn ppcs(&self) -> Ppcs {
        match self {
            Self::Mrp(_) => Ppcs::Mrp,
            Self::Rps(_) => Ppcs::Rps,
            Self::Conwip(..) => Ppcs::Conwip,
        }
    }

    pub fn safety_stock(&self, cal: &CalibratedScenario, sku: usize) -> f64 {
        match self {
            Self::Mrp(p) => p.safety_stock_abs(cal, sku),
            _ => 0.0,
        }
    }

    pub fn plan(&mut self, input: &PlanningInput<'_>, factory: &mut OrderFactory) -> Vec<ProductionOrder> {
        match self {
            Self::Mrp(p) => mrp_plan(input, p, factory),
            Self::Rps(p) => rps_review(input, p, factory),
            Self::Conwip(p, _) => conwip_plan(input, p, factory),
        }
    }

    /// Picks orders to release now among `pending`, withdrawing their material
    /// from `stock`.
    pub fn release(
        &mut self,
        cal: &CalibratedScenario,
        pending: &[&ProductionOrder],
        stock: &mut [f64],
        today: u32,
    ) -> Vec<OrderId> {
        match self {
            Self::Mrp(_) => mrp_release(cal, pending, stock, today),
            Self::Rps(_) => rps::rps_release(cal, pending, stock),
            Self::Conwip(_, loops) => conwip_release(cal, pending, stock, loops, today),
        }
    }

    /// Bookkeeping when an order finishes its last routing step.
    pub fn on_complete(&mut self, order: &ProductionOrder) {
        if let Self::Conwip(_, loops) = self {
            if let Some(l) = order.loop_id {
                loops.get_mut(l).complete(order.workload_minutes);
            }
        }
    }

    pub fn loops(&self) -> Option<&LoopStates> {
        match self {
            Self::Conwip(_, l) => Some(l),
            _ => None,
        }
    }
}
