//! Experiment plans: environments times parameter grids times replications.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use ppcs_core::model::build_structure;
use ppcs_core::rng::derive_seed;
use ppcs_core::{ControllerParams, DistributionCvs, Ppcs, Scenario, StructureKind};

use crate::error::{HarnessError, Result};
use crate::grid::ParameterGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpcsGrid {
    pub ppcs: Ppcs,
    /// One grid per parameter, in the order of `Ppcs::parameter_names`.
    pub grids: Vec<ParameterGrid>,
}

impl PpcsGrid {
    fn new(ppcs: Ppcs, rows: &[(f64, f64, f64)]) -> Self {
        let names = ppcs.parameter_names(true);
        assert_eq!(names.len(), rows.len());
        Self {
            ppcs,
            grids: names
                .iter()
                .zip(rows)
                .map(|(n, (lo, hi, step))| ParameterGrid::new(n, *lo, *hi, *step))
                .collect(),
        }
    }

    /// Grids that apply to a structure; component grids are dropped when
    /// only items are planned.
    pub fn grids_for(&self, kind: StructureKind) -> Vec<&ParameterGrid> {
        let names = self.ppcs.parameter_names(build_structure(kind).has_planned_components());
        self.grids.iter().filter(|g| names.contains(&g.name.as_str())).collect()
    }

    pub fn iterations_for(&self, kind: StructureKind) -> u64 {
        self.grids_for(kind).iter().map(|g| g.level_count() as u64).product()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub name: String,
    pub structures: Vec<StructureKind>,
    pub loads: Vec<f64>,
    pub ppcs: Vec<PpcsGrid>,
    pub replications: u32,
    pub horizon_days: u32,
    pub warmup_days: u32,
    pub master_seed: u64,
    /// Overrides the default coefficients of variation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cv: Option<DistributionCvs>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Paper,
    Reduced,
    Smoke,
}

impl FromStr for Preset {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Self::Paper),
            "reduced" => Ok(Self::Reduced),
            "smoke" => Ok(Self::Smoke),
            other => Err(HarnessError::InvalidPlan(format!(
                "unknown preset `{other}` (expected paper, reduced or smoke)"
            ))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Paper => "paper",
            Self::Reduced => "reduced",
            Self::Smoke => "smoke",
        })
    }
}

/// One parameter combination in one environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iteration {
    pub index: u64,
    pub structure: StructureKind,
    pub load: f64,
    pub params: ControllerParams,
}

impl Iteration {
    pub fn ppcs(&self) -> Ppcs {
        self.params.ppcs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CountKey {
    pub ppcs: Ppcs,
    pub structure: StructureKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanCounts {
    /// Iterations summed over loads.
    pub by_ppcs_structure: BTreeMap<CountKey, u64>,
    pub iterations: u64,
    pub runs: u64,
}

impl ExperimentPlan {
    pub fn preset(preset: Preset) -> Self {
        match preset {
            Preset::Paper => Self::paper(),
            Preset::Reduced => Self::reduced(),
            Preset::Smoke => Self::smoke(),
        }
    }

    fn all_environments(name: &str, ppcs: Vec<PpcsGrid>, replications: u32, horizon: u32, warmup: u32) -> Self {
        Self {
            name: name.to_string(),
            structures: StructureKind::ALL.to_vec(),
            loads: vec![0.85, 0.90, 0.95],
            ppcs,
            replications,
            horizon_days: horizon,
            warmup_days: warmup,
            master_seed: 20_240_601,
            cv: None,
        }
    }

    /// The full factorial design of the study: 57,081 iterations.
    pub fn paper() -> Self {
        Self::all_environments(
            "paper",
            vec![
                PpcsGrid::new(
                    Ppcs::Mrp,
                    &[(1.0, 6.0, 1.0), (1.0, 4.0, 1.0), (0.0, 1.5, 0.5), (1.0, 3.0, 1.0), (1.0, 4.0, 1.0), (0.0, 1.5, 0.5)],
                ),
                PpcsGrid::new(Ppcs::Rps, &[(3.0, 7.0, 0.5), (0.5, 3.0, 0.5), (1.0, 4.0, 0.5), (0.5, 3.0, 0.5)]),
                PpcsGrid::new(
                    Ppcs::Conwip,
                    &[(1.0, 3.0, 0.5), (10_000.0, 50_000.0, 10_000.0), (1.0, 5.0, 1.0), (1.0, 5.0, 1.0), (0.0, 3.0, 1.0)],
                ),
            ],
            10,
            400,
            150,
        )
    }

    /// Coarsened grids, about an eighth of the paper design, 3 replications
    /// and a 250-day horizon with 75 days of warm-up.
    pub fn reduced() -> Self {
        Self::all_environments(
            "reduced",
            vec![
                PpcsGrid::new(
                    Ppcs::Mrp,
                    &[(1.0, 6.0, 1.0), (1.0, 2.0, 1.0), (0.0, 1.0, 0.5), (1.0, 3.0, 1.0), (1.0, 2.0, 1.0), (0.0, 1.0, 0.5)],
                ),
                PpcsGrid::new(Ppcs::Rps, &[(3.0, 7.0, 0.5), (0.5, 1.5, 0.5), (1.0, 4.0, 1.0), (0.5, 1.5, 0.5)]),
                PpcsGrid::new(
                    Ppcs::Conwip,
                    &[(1.0, 3.0, 1.0), (10_000.0, 50_000.0, 20_000.0), (1.0, 5.0, 1.0), (1.0, 5.0, 2.0), (0.0, 2.0, 1.0)],
                ),
            ],
            3,
            250,
            75,
        )
    }

    /// One MRP iteration with two replications.
    pub fn smoke() -> Self {
        let fixed = |ppcs: Ppcs, values: &[f64]| PpcsGrid {
            ppcs,
            grids: ppcs
                .parameter_names(true)
                .iter()
                .zip(values)
                .map(|(n, v)| ParameterGrid::fixed(n, *v))
                .collect(),
        };
        Self {
            name: "smoke".into(),
            structures: vec![StructureKind::FlowShop],
            loads: vec![0.90],
            ppcs: vec![fixed(Ppcs::Mrp, &[1.0, 1.0, 0.5, 2.0, 1.0, 0.5])],
            replications: 2,
            horizon_days: 400,
            warmup_days: 150,
            master_seed: 20_240_601,
            cv: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::InvalidPlan(m));
        if self.structures.is_empty() || self.loads.is_empty() || self.ppcs.is_empty() {
            return bad("a plan needs at least one structure, load and PPCS".into());
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.horizon_days <= self.warmup_days {
            return bad(format!("horizon {} must exceed warm-up {}", self.horizon_days, self.warmup_days));
        }
        for p in &self.ppcs {
            let names = p.ppcs.parameter_names(true);
            let got: Vec<&str> = p.grids.iter().map(|g| g.name.as_str()).collect();
            if got != names {
                return bad(format!("{} grids must be {:?}, got {:?}", p.ppcs, names, got));
            }
            for g in &p.grids {
                g.validate()?;
            }
        }
        if self.ppcs.iter().enumerate().any(|(i, p)| self.ppcs[..i].iter().any(|q| q.ppcs == p.ppcs)) {
            return bad("each PPCS may appear once".into());
        }
        for s in &self.structures {
            for l in &self.loads {
                self.scenario(*s, *l).validate()?;
            }
        }
        Ok(())
    }

    pub fn scenario(&self, structure: StructureKind, load: f64) -> Scenario {
        let mut s = Scenario::new(structure, load);
        s.horizon_days = self.horizon_days;
        s.warmup_days = self.warmup_days;
        if let Some(cv) = self.cv {
            s.cv = cv;
        }
        s.seed = self.master_seed;
        s
    }

    pub fn seed(&self, iteration: u64, replication: u32) -> u64 {
        derive_seed(self.master_seed, iteration, replication as u64)
    }

    /// Iteration counts from the grid sizes alone.
    pub fn counts(&self) -> PlanCounts {
        let mut by = BTreeMap::new();
        for s in &self.structures {
            for p in &self.ppcs {
                let n = p.iterations_for(*s) * self.loads.len() as u64;
                *by.entry(CountKey { ppcs: p.ppcs, structure: *s }).or_insert(0) += n;
            }
        }
        let iterations = by.values().sum();
        PlanCounts {
            by_ppcs_structure: by,
            iterations,
            runs: iterations * self.replications as u64,
        }
    }

    /// All iterations in a fixed lexicographic order: structure, load, PPCS,
    /// then the parameter levels with the first parameter outermost.
    pub fn enumerate(&self) -> impl Iterator<Item = Iteration> + '_ {
        let mut index = 0u64;
        self.structures.iter().flat_map(move |s| {
            self.loads.iter().flat_map(move |l| {
                self.ppcs.iter().flat_map(move |p| {
                    let grids = p.grids_for(*s);
                    let levels: Vec<(String, Vec<f64>)> =
                        grids.iter().map(|g| (g.name.clone(), g.levels())).collect();
                    CrossProduct::new(levels).map(move |named| (*s, *l, p.ppcs, named))
                })
            })
        })
        .map(move |(s, l, ppcs, named)| {
            let it = Iteration {
                index,
                structure: s,
                load: l,
                params: ControllerParams::from_named(ppcs, &named).expect("grid names are valid"),
            };
            index += 1;
            it
        })
    }
}

/// Odometer over level lists; the last list varies fastest.
struct CrossProduct {
    levels: Vec<(String, Vec<f64>)>,
    cursor: Vec<usize>,
    done: bool,
}

impl CrossProduct {
    fn new(levels: Vec<(String, Vec<f64>)>) -> Self {
        let done = levels.iter().any(|(_, v)| v.is_empty());
        Self {
            cursor: vec![0; levels.len()],
            levels,
            done,
        }
    }
}

impl Iterator for CrossProduct {
    type Item = BTreeMap<String, f64>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let out = self
            .levels
            .iter()
            .zip(&self.cursor)
            .map(|((n, v), i)| (n.clone(), v[*i]))
            .collect();
        let mut k = self.levels.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.cursor[k] += 1;
            if self.cursor[k] < self.levels[k].1.len() {
                break;
            }
            self.cursor[k] = 0;
        }
        Some(out)
    }
}
