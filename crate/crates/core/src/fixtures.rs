//! Small hand-checkable scenarios.

use crate::model::{
    Routing, RoutingStep, Scenario, Sku, SkuId, SkuKind, Structure, StructureKind,
    STRUCTURE_FORMAT_VERSION,
};

/// One item on one machine, made from raw material.
pub fn single_machine_scenario(load: f64, demand_per_day: f64) -> Scenario {
    let structure = Structure {
        version: STRUCTURE_FORMAT_VERSION,
        name: StructureKind::FlowShop,
        machines: vec!["M1".into()],
        skus: vec![
            Sku {
                id: SkuId(101),
                kind: SkuKind::Item,
                bom_level: 0,
                child: Some(SkuId(201)),
                demand_share: Some(1.0),
            },
            Sku {
                id: SkuId(201),
                kind: SkuKind::RawMaterial,
                bom_level: 1,
                child: None,
                demand_share: None,
            },
        ],
        routings: vec![Routing {
            sku: SkuId(101),
            steps: vec![RoutingStep {
                machine: "M1".into(),
                weight: 1.0,
            }],
        }],
        planned_bom_levels: 1,
    };
    let mut s = Scenario::new(StructureKind::FlowShop, load);
    s.structure = structure;
    s.mean_total_item_demand_per_day = demand_per_day;
    s
}

/// One item made from one planned component, each on its own machine.
pub fn two_level_scenario(load: f64, demand_per_day: f64) -> Scenario {
    let structure = Structure {
        version: STRUCTURE_FORMAT_VERSION,
        name: StructureKind::FlowShop,
        machines: vec!["M1".into(), "M2".into()],
        skus: vec![
            Sku {
                id: SkuId(101),
                kind: SkuKind::Item,
                bom_level: 0,
                child: Some(SkuId(201)),
                demand_share: Some(1.0),
            },
            Sku {
                id: SkuId(201),
                kind: SkuKind::Component,
                bom_level: 1,
                child: Some(SkuId(301)),
                demand_share: None,
            },
            Sku {
                id: SkuId(301),
                kind: SkuKind::RawMaterial,
                bom_level: 2,
                child: None,
                demand_share: None,
            },
        ],
        routings: vec![
            Routing {
                sku: SkuId(101),
                steps: vec![RoutingStep {
                    machine: "M2".into(),
                    weight: 1.0,
                }],
            },
            Routing {
                sku: SkuId(201),
                steps: vec![RoutingStep {
                    machine: "M1".into(),
                    weight: 1.0,
                }],
            },
        ],
        planned_bom_levels: 2,
    };
    let mut s = Scenario::new(StructureKind::FlowShop, load);
    s.structure = structure;
    s.mean_total_item_demand_per_day = demand_per_day;
    s
}
