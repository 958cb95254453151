//! Full-factorial experiments over the PPCS simulator: plan enumeration,
//! parallel execution into a resumable file store, and summaries.

pub mod error;
pub mod execute;
pub mod grid;
pub mod plan;
pub mod stats;
pub mod store;
pub mod summary;

pub use error::{HarnessError, Result, RunCoord};
pub use execute::{execute, ExecOptions, ExecSummary, Progress};
pub use grid::ParameterGrid;
pub use plan::{ExperimentPlan, Iteration, PlanCounts, PpcsGrid, Preset};
pub use store::{canonical_lines, CostRecord, ResultRecord, ResultStore};
pub use summary::{summarize, Summary};
