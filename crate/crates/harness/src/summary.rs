//! Per-iteration means, best parameters per environment and PPCS, and the
//! cost table, with CSV writers and readers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use ppcs_core::{Ppcs, StructureKind};

use crate::error::{HarnessError, Result, RunCoord};
use crate::plan::ExperimentPlan;
use crate::stats::{mean, standard_error, welch_greater};
use crate::store::{CostRecord, ResultRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationSummary {
    pub iteration: u64,
    pub structure: StructureKind,
    pub load: f64,
    pub ppcs: Ppcs,
    pub params: BTreeMap<String, f64>,
    pub replications: usize,
    pub mean: CostRecord,
    pub standard_error: f64,
    /// Overall cost per day of each replication, by replication index.
    pub overall: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EnvKey {
    pub structure: StructureKind,
    /// Load in thousandths, so the key orders and compares exactly.
    pub load_milli: u32,
}

impl EnvKey {
    pub fn new(structure: StructureKind, load: f64) -> Self {
        Self {
            structure,
            load_milli: (load * 1000.0).round() as u32,
        }
    }

    pub fn load(&self) -> f64 {
        self.load_milli as f64 / 1000.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub iterations: Vec<IterationSummary>,
    /// Index into `iterations` of the best iteration per environment and PPCS.
    pub best: BTreeMap<(EnvKey, Ppcs), usize>,
}

impl Summary {
    pub fn best(&self, structure: StructureKind, load: f64, ppcs: Ppcs) -> Option<&IterationSummary> {
        self.best
            .get(&(EnvKey::new(structure, load), ppcs))
            .map(|i| &self.iterations[*i])
    }

    pub fn environments(&self) -> Vec<EnvKey> {
        let mut envs: Vec<EnvKey> = self.best.keys().map(|(e, _)| *e).collect();
        envs.dedup();
        envs
    }
}

/// Aggregates records per iteration. With a plan, every planned run must be
/// present; without one, iterations are taken as found.
pub fn summarize(plan: Option<&ExperimentPlan>, records: &[ResultRecord]) -> Result<Summary> {
    if records.is_empty() {
        return Err(HarnessError::NoData("result store".into()));
    }
    let mut by_iter: BTreeMap<u64, Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        by_iter.entry(r.iteration).or_default().push(r);
    }
    if let Some(plan) = plan {
        let mut missing = Vec::new();
        for it in plan.enumerate() {
            let have = by_iter.get(&it.index);
            for rep in 0..plan.replications {
                if !have.is_some_and(|v| v.iter().any(|r| r.replication == rep)) {
                    missing.push(RunCoord {
                        iteration: it.index,
                        replication: rep,
                    });
                }
            }
        }
        if !missing.is_empty() {
            return Err(HarnessError::IncompleteScope { missing });
        }
    }
    let mut iterations = Vec::with_capacity(by_iter.len());
    for (index, mut recs) in by_iter {
        recs.sort_by_key(|r| r.replication);
        recs.dedup_by_key(|r| r.replication);
        let first = recs[0];
        let mut sums = [0.0; 6];
        for r in &recs {
            for (s, v) in sums.iter_mut().zip(r.cost.as_array()) {
                *s += v;
            }
        }
        let n = recs.len() as f64;
        let overall: Vec<f64> = recs.iter().map(|r| r.cost.overall_per_day).collect();
        iterations.push(IterationSummary {
            iteration: index,
            structure: first.structure,
            load: first.load,
            ppcs: first.ppcs,
            params: first.params.clone(),
            replications: recs.len(),
            mean: CostRecord::from_array(sums.map(|s| s / n)),
            standard_error: standard_error(&overall),
            overall,
        });
    }
    let mut best: BTreeMap<(EnvKey, Ppcs), usize> = BTreeMap::new();
    for (i, it) in iterations.iter().enumerate() {
        let key = (EnvKey::new(it.structure, it.load), it.ppcs);
        match best.get(&key) {
            // strict improvement only, so the lower iteration index wins ties
            Some(&j) if iterations[j].mean.overall_per_day <= it.mean.overall_per_day => {}
            _ => {
                best.insert(key, i);
            }
        }
    }
    debug_assert!(iterations.iter().all(|it| (mean(&it.overall) - it.mean.overall_per_day).abs()
        <= 1e-9 * it.mean.overall_per_day.abs().max(1.0)));
    Ok(Summary { iterations, best })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub structure: StructureKind,
    pub load: f64,
    pub ppcs: Ppcs,
    pub iteration: u64,
    pub replications: usize,
    pub wip_component: f64,
    pub component_stock: f64,
    pub wip_item: f64,
    pub fgi: f64,
    pub tardiness: f64,
    pub overall_per_day: f64,
    pub standard_error: f64,
}

/// One-sided Welch test that the best `higher` PPCS costs more than the best
/// `lower` PPCS in one environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub structure: StructureKind,
    pub load: f64,
    pub higher: Ppcs,
    pub lower: Ppcs,
    pub mean_higher: f64,
    pub mean_lower: f64,
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
}

impl ComparisonRow {
    pub fn holds(&self) -> bool {
        self.mean_higher > self.mean_lower
    }

    pub fn significant(&self, alpha: f64) -> bool {
        self.holds() && self.p_value < alpha
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestParamRow {
    pub structure: StructureKind,
    pub load: f64,
    pub ppcs: Ppcs,
    pub iteration: u64,
    pub parameter: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRow {
    pub iteration: u64,
    pub structure: StructureKind,
    pub load: f64,
    pub ppcs: Ppcs,
    /// `name=value` pairs joined by `;`.
    pub params: String,
    pub replications: usize,
    pub wip_component: f64,
    pub component_stock: f64,
    pub wip_item: f64,
    pub fgi: f64,
    pub tardiness: f64,
    pub overall_per_day: f64,
    pub standard_error: f64,
}

pub fn format_params(params: &BTreeMap<String, f64>) -> String {
    params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

pub fn parse_params(text: &str) -> Result<BTreeMap<String, f64>> {
    text.split(';')
        .filter(|s| !s.is_empty())
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| HarnessError::Parse(format!("bad parameter pair `{kv}`")))?;
            let v = v
                .parse::<f64>()
                .map_err(|e| HarnessError::Parse(format!("bad value in `{kv}`: {e}")))?;
            Ok((k.to_string(), v))
        })
        .collect()
}

impl Summary {
    /// Best iteration per environment and PPCS, cost components per day.
    pub fn cost_rows(&self) -> Vec<CostRow> {
        self.best
            .values()
            .map(|i| {
                let it = &self.iterations[*i];
                CostRow {
                    structure: it.structure,
                    load: it.load,
                    ppcs: it.ppcs,
                    iteration: it.iteration,
                    replications: it.replications,
                    wip_component: it.mean.wip_component,
                    component_stock: it.mean.component_stock,
                    wip_item: it.mean.wip_item,
                    fgi: it.mean.fgi,
                    tardiness: it.mean.tardiness,
                    overall_per_day: it.mean.overall_per_day,
                    standard_error: it.standard_error,
                }
            })
            .collect()
    }

    /// Welch test for `higher` costing more than `lower` at their best
    /// iterations; `None` if either PPCS is missing.
    pub fn compare(&self, structure: StructureKind, load: f64, higher: Ppcs, lower: Ppcs) -> Option<ComparisonRow> {
        let a = self.best(structure, load, higher)?;
        let b = self.best(structure, load, lower)?;
        let w = welch_greater(&a.overall, &b.overall);
        Some(ComparisonRow {
            structure,
            load: a.load,
            higher,
            lower,
            mean_higher: a.mean.overall_per_day,
            mean_lower: b.mean.overall_per_day,
            t: w.t,
            df: w.df,
            p_value: w.p_value,
        })
    }

    /// Every ordered pair of PPCS in every environment.
    pub fn comparison_rows(&self) -> Vec<ComparisonRow> {
        let mut out = Vec::new();
        for e in self.environments() {
            for a in Ppcs::ALL {
                for b in Ppcs::ALL {
                    if a != b {
                        out.extend(self.compare(e.structure, e.load(), a, b));
                    }
                }
            }
        }
        out
    }

    pub fn best_param_rows(&self) -> Vec<BestParamRow> {
        self.best
            .values()
            .flat_map(|i| {
                let it = &self.iterations[*i];
                it.ppcs
                    .parameter_names(true)
                    .into_iter()
                    .filter_map(move |name| {
                        it.params.get(name).map(|v| BestParamRow {
                            structure: it.structure,
                            load: it.load,
                            ppcs: it.ppcs,
                            iteration: it.iteration,
                            parameter: name.to_string(),
                            value: *v,
                        })
                    })
            })
            .collect()
    }

    pub fn iteration_rows(&self) -> Vec<IterationRow> {
        self.iterations
            .iter()
            .map(|it| IterationRow {
                iteration: it.iteration,
                structure: it.structure,
                load: it.load,
                ppcs: it.ppcs,
                params: format_params(&it.params),
                replications: it.replications,
                wip_component: it.mean.wip_component,
                component_stock: it.mean.component_stock,
                wip_item: it.mean.wip_item,
                fgi: it.mean.fgi,
                tardiness: it.mean.tardiness,
                overall_per_day: it.mean.overall_per_day,
                standard_error: it.standard_error,
            })
            .collect()
    }

    /// Writes `iterations.csv`, `cost_table.csv`, `best_params.csv`,
    /// `comparisons.csv` and the wide `best_params_table.csv` (one column per environment).
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_rows(&dir.join("iterations.csv"), &self.iteration_rows())?;
        write_rows(&dir.join("cost_table.csv"), &self.cost_rows())?;
        write_rows(&dir.join("best_params.csv"), &self.best_param_rows())?;
        write_rows(&dir.join("comparisons.csv"), &self.comparison_rows())?;
        fs::write(dir.join("best_params_table.csv"), self.parameter_table_csv())?;
        Ok(())
    }

    fn parameter_table_csv(&self) -> String {
        let envs = self.environments();
        let mut out = String::from("ppcs,parameter");
        for e in &envs {
            let _ = write!(out, ",{}_{}", e.structure, e.load());
        }
        out.push('\n');
        for ppcs in Ppcs::ALL {
            for name in ppcs.parameter_names(true) {
                let cells: Vec<String> = envs
                    .iter()
                    .map(|e| {
                        self.best(e.structure, e.load(), ppcs)
                            .and_then(|it| it.params.get(name))
                            .map_or(String::new(), |v| v.to_string())
                    })
                    .collect();
                if cells.iter().all(|c| c.is_empty()) {
                    continue;
                }
                let _ = writeln!(out, "{ppcs},{name},{}", cells.join(","));
            }
        }
        out
    }

    /// Plain-text cost table and best-parameter listing.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<7} {:>5} {:<7} {:>10} {:>10} {:>10} {:>10} {:>10} {:>11} {:>8}",
            "shop", "load", "ppcs", "wip_comp", "comp_stock", "wip_item", "fgi", "tardiness", "overall/day", "se"
        );
        for r in self.cost_rows() {
            let _ = writeln!(
                out,
                "{:<7} {:>5.2} {:<7} {:>10.2} {:>10.2} {:>10.2} {:>10.2} {:>10.2} {:>11.2} {:>8.2}",
                r.structure.to_string(),
                r.load,
                r.ppcs.to_string(),
                r.wip_component,
                r.component_stock,
                r.wip_item,
                r.fgi,
                r.tardiness,
                r.overall_per_day,
                r.standard_error
            );
        }
        out.push('\n');
        for i in self.best.values() {
            let it = &self.iterations[*i];
            let _ = writeln!(
                out,
                "{:<7} {:>5.2} {:<7} #{:<6} {}",
                it.structure.to_string(),
                it.load,
                it.ppcs.to_string(),
                it.iteration,
                format_params(&it.params)
            );
        }
        out
    }
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?)
}
