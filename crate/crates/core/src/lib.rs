//! Discrete-event simulation of production planning and control systems
//! (MRP, reorder point, ConWIP) on multi-item, multi-stage shops.

pub mod controllers;
pub mod costing;
pub mod demand;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod model;
pub mod rng;
pub mod shop;
pub mod sim;
pub mod time;

pub use controllers::{ControllerParams, ConwipParams, LotPolicy, MrpParams, Ppcs, RpsParams};
pub use costing::{CostBreakdown, CostRates, Diagnostics, RunResult};
pub use error::{Result, SimError};
pub use model::{CalibratedScenario, DistributionCvs, Scenario, Structure, StructureKind};
pub use sim::{run_replication, SimOptions, SimOutput, Simulation, Trace};
