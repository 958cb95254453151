//! Products, bills of materials, routings and the calibration that turns a
//! structure plus a planned shop load into concrete demand and processing
//! time means.

mod calibrate;
mod scenario;
mod structure;

pub use calibrate::{CalibratedScenario, CalibratedStep, SkuInfo};
pub use scenario::{DistributionCvs, Scenario};
pub use structure::{
    build_structure, component_demand_share, Routing, RoutingStep, Sku, SkuId, SkuKind, Structure,
    StructureKind, STRUCTURE_FORMAT_VERSION,
};
