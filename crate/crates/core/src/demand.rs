//! Customer orders: one stochastic order per item per day, and their delivery
//! from finished goods inventory once due.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{CalibratedScenario, SkuId};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomerOrder {
    pub id: u64,
    pub item: SkuId,
    pub arrival_day: u32,
    pub quantity: f64,
    pub due_day: f64,
    pub delivered_day: Option<f64>,
}

impl CustomerOrder {
    pub fn tardy_days(&self) -> Option<f64> {
        self.delivered_day.map(|d| (d - self.due_day).max(0.0))
    }

    /// Integer period in which the order is required.
    pub fn due_period(&self) -> i64 {
        self.due_day.floor() as i64
    }
}

/// Draws order quantities and customer required lead times per item.
#[derive(Debug, Clone)]
pub struct DemandGenerator {
    qty_streams: Vec<RngStream>,
    clt_streams: Vec<RngStream>,
    means: Vec<f64>,
    items: Vec<SkuId>,
    cv_qty: f64,
    cv_clt: f64,
    clt_fixed: f64,
    clt_mean: f64,
}

impl DemandGenerator {
    pub fn new(cal: &CalibratedScenario, seed: u64) -> Self {
        let s = &cal.scenario;
        let items: Vec<_> = cal.items().map(|(_, sku)| sku).collect();
        Self {
            qty_streams: items
                .iter()
                .map(|i| RngStream::new(seed, format!("demand-qty/{}", i.id)))
                .collect(),
            clt_streams: items
                .iter()
                .map(|i| RngStream::new(seed, format!("demand-clt/{}", i.id)))
                .collect(),
            means: items.iter().map(|i| i.mean_daily_demand).collect(),
            items: items.iter().map(|i| i.id).collect(),
            cv_qty: s.cv.demand_qty,
            cv_clt: s.cv.clt_variable,
            clt_fixed: s.clt_fixed_days,
            clt_mean: s.clt_variable_mean_days,
        }
    }

    pub fn items(&self) -> &[SkuId] {
        &self.items
    }

    /// Order of the `slot`-th item (in structure order) arriving on `day`.
    pub fn generate_order(&mut self, id: u64, slot: usize, day: u32) -> Result<CustomerOrder> {
        let quantity = self.qty_streams[slot].lognormal(self.means[slot], self.cv_qty)?;
        let variable = self.clt_streams[slot].lognormal(self.clt_mean, self.cv_clt)?;
        Ok(CustomerOrder {
            id,
            item: self.items[slot],
            arrival_day: day,
            quantity,
            due_day: day as f64 + self.clt_fixed + variable,
            delivered_day: None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeliveryRecord {
    pub order_id: u64,
    pub quantity: f64,
    pub due_day: f64,
    pub delivered_day: f64,
    pub tardy_days: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct DueKey {
    due_day: f64,
    id: u64,
    quantity: f64,
}

impl Eq for DueKey {}

impl PartialOrd for DueKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DueKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.due_day
            .total_cmp(&other.due_day)
            .then(self.id.cmp(&other.id))
    }
}

/// Orders that have reached their due date but not shipped, for one item.
///
/// Goods never leave before the due date. Once due, orders ship complete in
/// earliest-due-date order (ties by id) as soon as stock covers the head of
/// the queue; a short head blocks later orders.
#[derive(Debug, Clone, Default)]
pub struct DeliveryBook {
    due: BTreeSet<DueKey>,
    overdue_units: f64,
}

impl DeliveryBook {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.due.is_empty()
    }

    /// Units due and not delivered.
    pub fn backlog_units(&self) -> f64 {
        self.overdue_units
    }

    pub fn len(&self) -> usize {
        self.due.len()
    }

    pub fn order_due(&mut self, id: u64, quantity: f64, due_day: f64) {
        self.due.insert(DueKey {
            due_day,
            id,
            quantity,
        });
        self.overdue_units += quantity;
    }

    /// Ships every due order that stock allows, decrementing `on_hand`.
    pub fn deliver(&mut self, on_hand: &mut f64, now_day: f64) -> Vec<DeliveryRecord> {
        let mut out = Vec::new();
        while let Some(head) = self.due.first().copied() {
            // tolerance absorbs rounding in quantity sums
            if head.quantity > *on_hand + 1e-9 {
                break;
            }
            self.due.pop_first();
            *on_hand = (*on_hand - head.quantity).max(0.0);
            self.overdue_units -= head.quantity;
            if self.due.is_empty() || self.overdue_units.abs() < 1e-7 {
                self.overdue_units = self.overdue_units.max(0.0);
            }
            out.push(DeliveryRecord {
                order_id: head.id,
                quantity: head.quantity,
                due_day: head.due_day,
                delivered_day: now_day,
                tardy_days: (now_day - head.due_day).max(0.0),
            });
        }
        if self.due.is_empty() {
            self.overdue_units = 0.0;
        }
        out
    }
}
