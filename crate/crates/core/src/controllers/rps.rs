//! Reorder point system: each sku is reviewed on its own, without demand
//! information. Whenever the inventory position drops below the reorder point
//! an order of the smallest multiple of the lot size that lifts it back to
//! the reorder point is created for immediate release.

use super::{
    consume_material, material_available, skus_by_level, NewOrder, OrderFactory, OrderId,
    PlanningInput, ProductionOrder, RpsParams,
};
use crate::model::CalibratedScenario;

const EPS: f64 = 1e-9;

/// Order quantity for one sku, or `None` when the position is not below the
/// reorder point.
pub fn rps_order_quantity(inventory_position: f64, reorder_point: f64, lot: f64) -> Option<f64> {
    if inventory_position < reorder_point - EPS {
        let lots = ((reorder_point - inventory_position) / lot - EPS).ceil().max(1.0);
        Some(lots * lot)
    } else {
        None
    }
}

pub fn rps_review(
    input: &PlanningInput<'_>,
    params: &RpsParams,
    factory: &mut OrderFactory,
) -> Vec<ProductionOrder> {
    let cal = input.cal;
    let today = input.today as i64;
    // new parent orders commit their child immediately
    let mut extra_backorders = vec![0.0; cal.skus.len()];
    let mut out = Vec::new();
    for level in skus_by_level(cal) {
        for sku in level {
            let ip = input.stock[sku].inventory_position() - extra_backorders[sku];
            let rop = params.reorder_point_abs(cal, sku);
            let lot = params.lot_abs(cal, sku);
            let Some(qty) = rps_order_quantity(ip, rop, lot) else {
                continue;
            };
            if let Some(c) = cal.skus[sku].child {
                extra_backorders[c] += qty;
            }
            out.push(factory.make(
                cal,
                input.today,
                NewOrder {
                    sku,
                    quantity: qty,
                    planned_start_day: today,
                    planned_end_day: today,
                    earliest_start_day: None,
                    priority_due: today as f64,
                    loop_id: None,
                },
            ));
        }
    }
    out
}

/// Releases pending orders in creation order as soon as material allows.
pub(crate) fn rps_release(
    cal: &CalibratedScenario,
    pending: &[&ProductionOrder],
    stock: &mut [f64],
) -> Vec<OrderId> {
    let mut order: Vec<&ProductionOrder> = pending.to_vec();
    order.sort_by_key(|o| o.id);
    let mut out = Vec::new();
    for o in order {
        if material_available(cal, o, stock) {
            consume_material(cal, o, stock);
            out.push(o.id);
        }
    }
    out
}
