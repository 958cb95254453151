//! File-based result store: `plan.json`, append-only `results.jsonl` and
//! `failures.jsonl`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use ppcs_core::{Diagnostics, Ppcs, RunResult, StructureKind};

use crate::error::{HarnessError, Result, RunCoord};
use crate::plan::{ExperimentPlan, Iteration};

/// Per-day cost components of one run (or a mean over runs).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostRecord {
    pub wip_component: f64,
    pub component_stock: f64,
    pub wip_item: f64,
    pub fgi: f64,
    pub tardiness: f64,
    pub overall_per_day: f64,
}

impl CostRecord {
    pub fn from_result(r: &RunResult) -> Self {
        Self {
            wip_component: r.per_day.wip_component,
            component_stock: r.per_day.component_stock,
            wip_item: r.per_day.wip_item,
            fgi: r.per_day.fgi,
            tardiness: r.per_day.tardiness,
            overall_per_day: r.overall_per_day,
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [
            self.wip_component,
            self.component_stock,
            self.wip_item,
            self.fgi,
            self.tardiness,
            self.overall_per_day,
        ]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            wip_component: a[0],
            component_stock: a[1],
            wip_item: a[2],
            fgi: a[3],
            tardiness: a[4],
            overall_per_day: a[5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub iteration: u64,
    pub structure: StructureKind,
    pub load: f64,
    pub ppcs: Ppcs,
    pub params: BTreeMap<String, f64>,
    pub replication: u32,
    pub seed: u64,
    pub cost: CostRecord,
    pub diagnostics: Diagnostics,
    pub runtime_ms: f64,
}

impl ResultRecord {
    pub fn new(it: &Iteration, replication: u32, seed: u64, result: &RunResult, runtime_ms: f64) -> Self {
        Self {
            iteration: it.index,
            structure: it.structure,
            load: it.load,
            ppcs: it.ppcs(),
            params: it.params.to_named(),
            replication,
            seed,
            cost: CostRecord::from_result(result),
            diagnostics: result.diagnostics.clone(),
            runtime_ms,
        }
    }

    pub fn coord(&self) -> RunCoord {
        RunCoord {
            iteration: self.iteration,
            replication: self.replication,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub iteration: u64,
    pub replication: u32,
    pub seed: u64,
    pub error: String,
}

/// One JSON line per record, sorted by coordinates and without wall-clock
/// time: the form in which stores are compared.
pub fn canonical_lines(records: &[ResultRecord]) -> Vec<String> {
    let mut sorted: Vec<ResultRecord> = records.to_vec();
    sorted.sort_by_key(|r| r.coord());
    sorted
        .into_iter()
        .map(|mut r| {
            r.runtime_ms = 0.0;
            serde_json::to_string(&r).expect("record serializes")
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ResultStore {
    dir: PathBuf,
}

impl ResultStore {
    /// Opens the store in `dir` for `plan`, creating it if needed. An existing
    /// store must have been written for the same plan.
    pub fn create_or_open(dir: &Path, plan: &ExperimentPlan) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let store = Self { dir: dir.to_path_buf() };
        let plan_path = store.plan_path();
        if plan_path.exists() {
            let existing: ExperimentPlan = serde_json::from_str(&fs::read_to_string(&plan_path)?)?;
            if &existing != plan {
                return Err(HarnessError::PlanMismatch(format!(
                    "{} holds plan `{}`",
                    dir.display(),
                    existing.name
                )));
            }
        } else {
            fs::write(&plan_path, serde_json::to_string_pretty(plan)? + "\n")?;
        }
        store.repair(&store.results_path())?;
        store.repair(&store.failures_path())?;
        Ok(store)
    }

    /// Opens an existing store and returns it with its plan.
    pub fn open(dir: &Path) -> Result<(Self, ExperimentPlan)> {
        let store = Self { dir: dir.to_path_buf() };
        let plan_path = store.plan_path();
        if !plan_path.exists() {
            return Err(HarnessError::NoData(dir.display().to_string()));
        }
        let plan = serde_json::from_str(&fs::read_to_string(plan_path)?)?;
        Ok((store, plan))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn plan_path(&self) -> PathBuf {
        self.dir.join("plan.json")
    }

    pub fn results_path(&self) -> PathBuf {
        self.dir.join("results.jsonl")
    }

    pub fn failures_path(&self) -> PathBuf {
        self.dir.join("failures.jsonl")
    }

    pub fn summary_dir(&self) -> PathBuf {
        self.dir.join("summary")
    }

    /// Drops a trailing partial line left by an interrupted append.
    fn repair(&self, path: &Path) -> Result<()> {
        if !path.exists() {
            return Ok(());
        }
        let bytes = fs::read(path)?;
        if bytes.is_empty() || bytes.ends_with(b"\n") {
            return Ok(());
        }
        let keep = bytes.iter().rposition(|b| *b == b'\n').map_or(0, |i| i + 1);
        let f = OpenOptions::new().write(true).open(path)?;
        f.set_len(keep as u64)?;
        Ok(())
    }

    /// Every complete record, first occurrence per coordinate.
    pub fn load_results(&self) -> Result<Vec<ResultRecord>> {
        let path = self.results_path();
        if !path.exists() {
            return Ok(Vec::new());
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (n, line) in BufReader::new(File::open(&path)?).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: ResultRecord = match serde_json::from_str(&line) {
                Ok(r) => r,
                // an unterminated last line is an interrupted write
                Err(e) if e.is_eof() => continue,
                Err(e) => {
                    return Err(HarnessError::Parse(format!("{}:{}: {e}", path.display(), n + 1)))
                }
            };
            if seen.insert(rec.coord()) {
                out.push(rec);
            }
        }
        Ok(out)
    }

    pub fn load_failures(&self) -> Result<Vec<FailureRecord>> {
        let path = self.failures_path();
        if !path.exists() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for line in BufReader::new(File::open(&path)?).lines() {
            let line = line?;
            if let Ok(r) = serde_json::from_str(&line) {
                out.push(r);
            }
        }
        Ok(out)
    }

    pub fn completed(&self) -> Result<BTreeSet<RunCoord>> {
        Ok(self.load_results()?.iter().map(|r| r.coord()).collect())
    }

    pub fn sink(&self) -> Result<StoreSink> {
        let open = |p: PathBuf| -> Result<Mutex<BufWriter<File>>> {
            Ok(Mutex::new(BufWriter::new(
                OpenOptions::new().create(true).append(true).open(p)?,
            )))
        };
        Ok(StoreSink {
            results: open(self.results_path())?,
            failures: open(self.failures_path())?,
        })
    }
}

/// Serialized appends from worker threads.
pub struct StoreSink {
    results: Mutex<BufWriter<File>>,
    failures: Mutex<BufWriter<File>>,
}

impl StoreSink {
    fn append<T: Serialize>(target: &Mutex<BufWriter<File>>, record: &T) -> Result<()> {
        let mut line = serde_json::to_string(record)?;
        line.push('\n');
        let mut w = target.lock().expect("store lock poisoned");
        w.write_all(line.as_bytes())?;
        w.flush()?;
        Ok(())
    }

    pub fn result(&self, r: &ResultRecord) -> Result<()> {
        Self::append(&self.results, r)
    }

    pub fn failure(&self, f: &FailureRecord) -> Result<()> {
        Self::append(&self.failures, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(iteration: u64, replication: u32) -> ResultRecord {
        ResultRecord {
            iteration,
            structure: StructureKind::FlowShop,
            load: 0.9,
            ppcs: Ppcs::Mrp,
            params: BTreeMap::from([("planned_lead_time_items".to_string(), 1.0)]),
            replication,
            seed: 7,
            cost: CostRecord {
                overall_per_day: 0.1 + 0.2,
                ..Default::default()
            },
            diagnostics: Diagnostics::default(),
            runtime_ms: 3.5,
        }
    }

    #[test]
    fn append_and_reload() {
        let dir = tempfile::tempdir().unwrap();
        let plan = ExperimentPlan::smoke();
        let store = ResultStore::create_or_open(dir.path(), &plan).unwrap();
        let sink = store.sink().unwrap();
        sink.result(&record(0, 1)).unwrap();
        sink.result(&record(0, 0)).unwrap();
        let got = store.load_results().unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0], record(0, 1));
        assert_eq!(got[0].cost.overall_per_day, 0.1 + 0.2);
    }

    #[test]
    fn partial_line_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let plan = ExperimentPlan::smoke();
        let store = ResultStore::create_or_open(dir.path(), &plan).unwrap();
        store.sink().unwrap().result(&record(0, 0)).unwrap();
        let mut f = OpenOptions::new().append(true).open(store.results_path()).unwrap();
        f.write_all(br#"{"iteration":0,"struct"#).unwrap();
        drop(f);
        assert_eq!(store.load_results().unwrap().len(), 1);
        let store = ResultStore::create_or_open(dir.path(), &plan).unwrap();
        let text = fs::read_to_string(store.results_path()).unwrap();
        assert!(text.ends_with('\n'));
        assert_eq!(text.lines().count(), 1);
    }

    #[test]
    fn other_plan_rejected() {
        let dir = tempfile::tempdir().unwrap();
        ResultStore::create_or_open(dir.path(), &ExperimentPlan::smoke()).unwrap();
        let err = ResultStore::create_or_open(dir.path(), &ExperimentPlan::reduced()).unwrap_err();
        assert!(matches!(err, HarnessError::PlanMismatch(_)));
    }

    #[test]
    fn canonical_ignores_runtime_and_order() {
        let mut a = record(1, 0);
        a.runtime_ms = 99.0;
        let b = record(0, 0);
        assert_eq!(canonical_lines(&[a, b.clone()]), canonical_lines(&[b, record(1, 0)]));
    }
}
