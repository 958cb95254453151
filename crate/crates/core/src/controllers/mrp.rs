//! Material requirements planning: netting, FOP lot-sizing, backward
//! scheduling and BoM explosion, level by level from the items downwards.
//! Planning is regenerative: every run rebuilds the plan from open demand,
//! stock and open orders; only orders whose planned start has been reached
//! are kept (firmed) by the caller.

use std::collections::BTreeMap;

use super::netting::{fop_lots, net_requirements};
use super::{
    consume_material, material_available, skus_by_level, MrpParams, NewOrder, OrderFactory,
    OrderId, PlanningInput, ProductionOrder,
};
use crate::model::CalibratedScenario;

pub fn mrp_plan(
    input: &PlanningInput<'_>,
    params: &MrpParams,
    factory: &mut OrderFactory,
) -> Vec<ProductionOrder> {
    let cal = input.cal;
    let today = input.today as i64;
    let mut gross: Vec<BTreeMap<i64, f64>> = vec![BTreeMap::new(); cal.skus.len()];

    for (sku, open) in input.demand.open.iter().enumerate() {
        for (due, qty) in open {
            *gross[sku].entry((due.floor() as i64).max(today)).or_default() += qty;
        }
    }
    for p in input.pending {
        if let Some(c) = cal.skus[p.sku].child.filter(|c| cal.skus[*c].is_planned()) {
            *gross[c].entry(p.planned_start_day.max(today)).or_default() += p.quantity;
        }
    }

    let mut planned = Vec::new();
    for level in skus_by_level(cal) {
        for sku in level {
            let info = &cal.skus[sku];
            let state = &input.stock[sku];
            let available = state.on_hand - state.safety_stock_abs + state.receipts_total();
            let nets = net_requirements(&gross[sku], available, today);
            let lead = params.lead_time(info.is_item());
            for (due, qty) in fop_lots(&nets, params.lot_periods(info.is_item())) {
                let start = due - lead;
                let order = factory.make(
                    cal,
                    input.today,
                    NewOrder {
                        sku,
                        quantity: qty,
                        planned_start_day: start,
                        planned_end_day: due,
                        earliest_start_day: None,
                        priority_due: due as f64,
                        loop_id: None,
                    },
                );
                if let Some(c) = info.child.filter(|c| cal.skus[*c].is_planned()) {
                    *gross[c].entry(start.max(today)).or_default() += qty;
                }
                planned.push(order);
            }
        }
    }
    planned
}

/// Releases pending orders whose planned start has come, oldest planned start
/// first, provided their child component is in stock. Held orders are simply
/// retried at the next release check.
pub fn mrp_release(
    cal: &CalibratedScenario,
    pending: &[&ProductionOrder],
    stock: &mut [f64],
    today: u32,
) -> Vec<OrderId> {
    let mut due: Vec<&ProductionOrder> = pending
        .iter()
        .copied()
        .filter(|o| o.planned_start_day <= today as i64)
        .collect();
    due.sort_by(|a, b| {
        a.planned_start_day
            .cmp(&b.planned_start_day)
            .then(a.id.cmp(&b.id))
    });
    let mut out = Vec::new();
    for o in due {
        if material_available(cal, o, stock) {
            consume_material(cal, o, stock);
            out.push(o.id);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllers::{DemandBook, ScheduledReceipt, StockState};
    use crate::fixtures::{single_machine_scenario, two_level_scenario};

    fn params(lt: f64, fop: f64, ss: f64) -> MrpParams {
        MrpParams {
            planned_lead_time_items: lt,
            fop_lot_size_items: fop,
            safety_stock_items: ss,
            planned_lead_time_components: Some(2.0),
            fop_lot_size_components: Some(1.0),
            safety_stock_components: Some(0.0),
        }
    }

    fn plan(
        cal: &CalibratedScenario,
        stock: &[StockState],
        demand: &DemandBook,
        pending: &[&ProductionOrder],
        p: &MrpParams,
        today: u32,
    ) -> Vec<ProductionOrder> {
        let input = PlanningInput {
            cal,
            stock,
            demand,
            pending,
            today,
        };
        mrp_plan(&input, p, &mut OrderFactory::new())
    }

    #[test]
    fn no_demand_no_orders() {
        let cal = CalibratedScenario::calibrate(&single_machine_scenario(0.9, 100.0)).unwrap();
        let stock = vec![StockState::default(); 2];
        let orders = plan(&cal, &stock, &DemandBook::new(2), &[], &params(1.0, 1.0, 0.0), 5);
        assert!(orders.is_empty());
    }

    #[test]
    fn netting_against_stock_and_receipts() {
        let cal = CalibratedScenario::calibrate(&single_machine_scenario(0.9, 50.0)).unwrap();
        let mut stock = vec![StockState::default(); 2];
        stock[0] = StockState {
            on_hand: 120.0,
            scheduled_receipts: vec![ScheduledReceipt { order: OrderId(99), quantity: 30.0, due_day: 12 }],
            backorders: 0.0,
            safety_stock_abs: 100.0,
        };
        let mut demand = DemandBook::new(2);
        demand.open[0].push((10.3, 80.0));
        let orders = plan(&cal, &stock, &demand, &[], &params(2.0, 1.0, 2.0), 3);
        assert_eq!(orders.len(), 1);
        assert_eq!(orders[0].quantity, 30.0);
        assert_eq!(orders[0].planned_end_day, 10);
        assert_eq!(orders[0].planned_start_day, 8);
    }

    #[test]
    fn fop_batches_and_backward_schedules() {
        let cal = CalibratedScenario::calibrate(&single_machine_scenario(0.9, 50.0)).unwrap();
        let stock = vec![StockState::default(); 2];
        let mut demand = DemandBook::new(2);
        demand.open[0].extend([(5.2, 10.0), (6.9, 20.0), (8.0, 15.0)]);
        let orders = plan(&cal, &stock, &demand, &[], &params(3.0, 2.0, 0.0), 0);
        let got: Vec<_> = orders
            .iter()
            .map(|o| (o.planned_start_day, o.planned_end_day, o.quantity))
            .collect();
        assert_eq!(got, vec![(2, 5, 30.0), (5, 8, 15.0)]);
    }

    #[test]
    fn explosion_feeds_component_at_parent_start() {
        let cal = CalibratedScenario::calibrate(&two_level_scenario(0.9, 100.0)).unwrap();
        let stock = vec![StockState::default(); 3];
        let mut demand = DemandBook::new(3);
        demand.open[0].push((20.5, 80.0));
        let orders = plan(&cal, &stock, &demand, &[], &params(3.0, 1.0, 0.0), 0);
        assert_eq!(orders.len(), 2);
        let item = &orders[0];
        let comp = &orders[1];
        assert_eq!((item.planned_start_day, item.planned_end_day), (17, 20));
        assert_eq!((comp.planned_start_day, comp.planned_end_day), (15, 17));
        assert_eq!(comp.quantity, 80.0);
        for o in &orders {
            let lead = o.planned_end_day - o.planned_start_day;
            assert_eq!(lead, if o.sku == 0 { 3 } else { 2 });
        }
    }

    #[test]
    fn pending_parent_needs_component() {
        let cal = CalibratedScenario::calibrate(&two_level_scenario(0.9, 100.0)).unwrap();
        let mut stock = vec![StockState::default(); 3];
        stock[1].on_hand = 30.0;
        let mut factory = OrderFactory::new();
        let parent = factory.make(
            &cal,
            0,
            NewOrder {
                sku: 0,
                quantity: 50.0,
                planned_start_day: 4,
                planned_end_day: 6,
                earliest_start_day: None,
                priority_due: 6.0,
                loop_id: None,
            },
        );
        stock[0].scheduled_receipts.push(ScheduledReceipt { order: parent.id, quantity: 50.0, due_day: parent.planned_end_day });
        let orders = plan(&cal, &stock, &DemandBook::new(3), &[&parent], &params(2.0, 1.0, 0.0), 5);
        assert_eq!(orders.len(), 1);
        assert_eq!(orders[0].sku, 1);
        assert_eq!(orders[0].quantity, 20.0);
        assert_eq!(orders[0].planned_end_day, 5);
    }

    fn order(cal: &CalibratedScenario, sku: usize, qty: f64, start: i64) -> ProductionOrder {
        OrderFactory::new().make(
            cal,
            0,
            NewOrder {
                sku,
                quantity: qty,
                planned_start_day: start,
                planned_end_day: start + 1,
                earliest_start_day: None,
                priority_due: (start + 1) as f64,
                loop_id: None,
            },
        )
    }

    #[test]
    fn release_needs_component_stock() {
        let cal = CalibratedScenario::calibrate(&two_level_scenario(0.9, 100.0)).unwrap();
        let o = order(&cal, 0, 80.0, 3);
        let mut stock = vec![0.0, 100.0, 0.0];
        assert_eq!(mrp_release(&cal, &[&o], &mut stock, 3), vec![o.id]);
        assert_eq!(stock[1], 20.0);

        let mut stock = vec![0.0, 50.0, 0.0];
        assert!(mrp_release(&cal, &[&o], &mut stock, 3).is_empty());
        assert_eq!(stock[1], 50.0);
    }

    #[test]
    fn raw_material_child_always_releases() {
        let cal = CalibratedScenario::calibrate(&two_level_scenario(0.9, 100.0)).unwrap();
        let o = order(&cal, 1, 1e6, 3);
        let mut stock = vec![0.0; 3];
        assert!(mrp_release(&cal, &[&o], &mut stock, 2).is_empty());
        assert_eq!(mrp_release(&cal, &[&o], &mut stock, 3), vec![o.id]);
    }
}
