//! Parallel execution of a plan into a result store.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use ppcs_core::{CalibratedScenario, SimOptions, Simulation, StructureKind};

use crate::error::{HarnessError, Result, RunCoord};
use crate::plan::{ExperimentPlan, Iteration};
use crate::store::{FailureRecord, ResultRecord, ResultStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Progress {
    pub done: usize,
    pub total: usize,
}

#[derive(Default)]
pub struct ExecOptions<'a> {
    /// Worker threads; 0 lets rayon decide.
    pub workers: usize,
    /// Stop after this many runs (in enumeration order), as if interrupted.
    pub max_runs: Option<usize>,
    pub progress: Option<&'a (dyn Fn(Progress) + Sync)>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExecSummary {
    pub planned_runs: u64,
    pub already_done: u64,
    pub executed: u64,
    pub failed: u64,
}

fn env_key(structure: StructureKind, load: f64) -> (StructureKind, u64) {
    (structure, load.to_bits())
}

/// Calibrated scenarios for every environment of the plan.
pub struct Environments(BTreeMap<(StructureKind, u64), CalibratedScenario>);

impl Environments {
    pub fn calibrate(plan: &ExperimentPlan) -> Result<Self> {
        let mut map = BTreeMap::new();
        for s in &plan.structures {
            for l in &plan.loads {
                map.insert(env_key(*s, *l), CalibratedScenario::calibrate(&plan.scenario(*s, *l))?);
            }
        }
        Ok(Self(map))
    }

    pub fn get(&self, structure: StructureKind, load: f64) -> &CalibratedScenario {
        &self.0[&env_key(structure, load)]
    }
}

/// Runs one replication of one iteration.
pub fn run_one(
    plan: &ExperimentPlan,
    envs: &Environments,
    it: &Iteration,
    replication: u32,
) -> std::result::Result<ResultRecord, ppcs_core::SimError> {
    let seed = plan.seed(it.index, replication);
    let started = Instant::now();
    let cal = envs.get(it.structure, it.load).clone();
    let out = Simulation::from_calibrated(cal, &it.params, seed, SimOptions::default())?.run()?;
    let ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(ResultRecord::new(it, replication, seed, &out.result, ms))
}

/// Executes every run of `plan` not yet in `store`. Failed runs are logged to
/// the failure file and retried by the next call.
pub fn execute(plan: &ExperimentPlan, store: &ResultStore, opts: &ExecOptions<'_>) -> Result<ExecSummary> {
    plan.validate()?;
    let envs = Environments::calibrate(plan)?;
    let done = store.completed()?;
    let iterations: Vec<Iteration> = plan.enumerate().collect();
    let mut pending: Vec<(&Iteration, u32)> = iterations
        .iter()
        .flat_map(|it| (0..plan.replications).map(move |r| (it, r)))
        .filter(|(it, r)| {
            !done.contains(&RunCoord {
                iteration: it.index,
                replication: *r,
            })
        })
        .collect();
    let planned_runs = iterations.len() as u64 * plan.replications as u64;
    let already_done = planned_runs - pending.len() as u64;
    if let Some(max) = opts.max_runs {
        pending.truncate(max);
    }
    let total = pending.len();
    let sink = store.sink()?;
    let counter = AtomicUsize::new(0);
    let failed = AtomicUsize::new(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| HarnessError::InvalidPlan(format!("cannot start worker pool: {e}")))?;
    let outcome: Result<()> = pool.install(|| {
        pending.par_iter().try_for_each(|(it, r)| -> Result<()> {
            match run_one(plan, &envs, it, *r) {
                Ok(rec) => sink.result(&rec)?,
                Err(e) => {
                    failed.fetch_add(1, Ordering::Relaxed);
                    sink.failure(&FailureRecord {
                        iteration: it.index,
                        replication: *r,
                        seed: plan.seed(it.index, *r),
                        error: e.to_string(),
                    })?
                }
            }
            let n = counter.fetch_add(1, Ordering::Relaxed) + 1;
            if let Some(cb) = opts.progress {
                cb(Progress { done: n, total });
            }
            Ok(())
        })
    });
    outcome?;
    let failed = failed.into_inner() as u64;
    Ok(ExecSummary {
        planned_runs,
        already_done,
        executed: total as u64 - failed,
        failed,
    })
}
