//! `ppcs`: single runs, sweeps and summaries of the PPCS simulator.
//!
//! Settings come from flags, then `PPCS_*` environment variables, then the
//! scenario or plan file, in that order of precedence.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use ppcs_core::{
    ControllerParams, DistributionCvs, Ppcs, Scenario, SimOptions, Simulation, StructureKind,
};
use ppcs_harness::plan::Preset;
use ppcs_harness::store::CostRecord;
use ppcs_harness::summary::read_rows;
use ppcs_harness::{
    execute, summarize, ExecOptions, ExperimentPlan, Iteration, Progress, ResultRecord, ResultStore,
};

#[derive(Parser, Debug)]
#[command(name = "ppcs", version, about = "Compare MRP, reorder point and ConWIP control by simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one replication and print its record.
    Run(RunArgs),
    /// Execute a full-factorial plan into a resumable result store.
    Sweep(SweepArgs),
    /// Aggregate a result store into cost and parameter tables.
    Summarize(SummarizeArgs),
    /// Check scenario, plan or parameter inputs without running anything.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

#[derive(Args, Debug, Default)]
struct EnvArgs {
    /// Scenario JSON file; flags and environment override its fields.
    #[arg(long, env = "PPCS_SCENARIO")]
    scenario: Option<PathBuf>,
    /// flow, hybrid or job.
    #[arg(long, env = "PPCS_STRUCTURE", value_parser = parse_structure)]
    structure: Option<StructureKind>,
    /// Planned shop load, e.g. 0.90.
    #[arg(long, env = "PPCS_LOAD")]
    load: Option<f64>,
    #[arg(long, env = "PPCS_HORIZON")]
    horizon: Option<u32>,
    #[arg(long, env = "PPCS_WARMUP")]
    warmup: Option<u32>,
    /// Coefficients of variation: `all=0` or `processing=0.2,setup=0.2,demand_qty=0.2,clt_variable=0.5`.
    #[arg(long, env = "PPCS_CV", value_parser = parse_cv)]
    cv: Option<CvOverride>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    env: EnvArgs,
    /// mrp, rps or conwip.
    #[arg(long, env = "PPCS_PPCS", value_parser = parse_ppcs)]
    ppcs: Ppcs,
    /// Parameters as `name=value` pairs separated by commas.
    #[arg(long, env = "PPCS_PARAMS", value_parser = parse_pairs)]
    params: Pairs,
    #[arg(long, env = "PPCS_SEED", default_value_t = 1)]
    seed: u64,
    /// Directory for `run.jsonl`/`run.csv` and, with `--trace`, the trace CSVs.
    #[arg(long, env = "PPCS_OUT")]
    out: Option<PathBuf>,
    #[arg(long, env = "PPCS_FORMAT", value_enum, default_value_t = Format::Jsonl)]
    format: Format,
    /// Write order, machine, planning and customer traces.
    #[arg(long)]
    trace: bool,
    /// Check state invariants after every event.
    #[arg(long)]
    audit: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// paper, reduced or smoke.
    #[arg(long, env = "PPCS_PRESET", conflicts_with = "plan", value_parser = parse_preset)]
    preset: Option<Preset>,
    /// Plan JSON file.
    #[arg(long, env = "PPCS_PLAN")]
    plan: Option<PathBuf>,
    /// Master seed.
    #[arg(long, env = "PPCS_SEED")]
    seed: Option<u64>,
    #[arg(long, env = "PPCS_REPLICATIONS")]
    replications: Option<u32>,
    #[arg(long, env = "PPCS_HORIZON")]
    horizon: Option<u32>,
    #[arg(long, env = "PPCS_WARMUP")]
    warmup: Option<u32>,
    #[arg(long, env = "PPCS_CV", value_parser = parse_cv)]
    cv: Option<CvOverride>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, env = "PPCS_WORKERS")]
    workers: Option<usize>,
    /// Result store directory; defaults to `results/<plan name>`.
    #[arg(long, env = "PPCS_OUT")]
    out: Option<PathBuf>,
    /// Print iteration and run counts only.
    #[arg(long)]
    dry_run: bool,
    /// Stop after this many runs; the next call resumes.
    #[arg(long)]
    max_runs: Option<usize>,
    /// Summarize into `<out>/summary` when the sweep completes.
    #[arg(long)]
    summarize: bool,
}

#[derive(Args, Debug)]
struct SummarizeArgs {
    /// Result store directory.
    #[arg(long, env = "PPCS_STORE")]
    store: PathBuf,
    /// Report directory; defaults to `<store>/summary`.
    #[arg(long, env = "PPCS_OUT")]
    out: Option<PathBuf>,
    /// Summarize whatever is present instead of requiring the full plan.
    #[arg(long)]
    partial: bool,
    /// Print cost rows as JSONL (or CSV) instead of the text table.
    #[arg(long, env = "PPCS_FORMAT", value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long, env = "PPCS_PLAN")]
    plan: Option<PathBuf>,
    #[arg(long, value_parser = parse_preset)]
    preset: Option<Preset>,
    #[arg(long, value_parser = parse_ppcs, requires = "params")]
    ppcs: Option<Ppcs>,
    #[arg(long, value_parser = parse_pairs, requires = "ppcs")]
    params: Option<Pairs>,
}

#[derive(Debug, Clone, Default)]
struct Pairs(BTreeMap<String, f64>);

#[derive(Debug, Clone)]
struct CvOverride(Vec<(String, f64)>);

impl CvOverride {
    fn apply(&self, base: DistributionCvs) -> DistributionCvs {
        let mut cv = base;
        for (k, v) in &self.0 {
            match k.as_str() {
                "all" => cv = DistributionCvs::all(*v),
                "processing" => cv.processing = *v,
                "setup" => cv.setup = *v,
                "demand_qty" => cv.demand_qty = *v,
                "clt_variable" => cv.clt_variable = *v,
                _ => unreachable!("checked by the parser"),
            }
        }
        cv
    }
}

fn parse_structure(s: &str) -> std::result::Result<StructureKind, String> {
    s.parse().map_err(|e: ppcs_core::SimError| e.to_string())
}

fn parse_ppcs(s: &str) -> std::result::Result<Ppcs, String> {
    s.parse().map_err(|e: ppcs_core::SimError| e.to_string())
}

fn parse_preset(s: &str) -> std::result::Result<Preset, String> {
    s.parse().map_err(|e: ppcs_harness::HarnessError| e.to_string())
}

fn parse_pairs(s: &str) -> std::result::Result<Pairs, String> {
    let mut out = BTreeMap::new();
    for kv in s.split([',', ';']).map(str::trim).filter(|x| !x.is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("expected name=value, got `{kv}`"))?;
        let v: f64 = v.trim().parse().map_err(|e| format!("bad value in `{kv}`: {e}"))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(Pairs(out))
}

fn parse_cv(s: &str) -> std::result::Result<CvOverride, String> {
    let pairs = parse_pairs(s)?;
    for (k, v) in &pairs.0 {
        if !["all", "processing", "setup", "demand_qty", "clt_variable"].contains(&k.as_str()) {
            return Err(format!("unknown distribution `{k}`"));
        }
        if *v < 0.0 {
            return Err(format!("cv for `{k}` must be non-negative"));
        }
    }
    Ok(CvOverride(pairs.0.into_iter().collect()))
}

fn usage_error(msg: impl std::fmt::Display) -> ! {
    Cli::command().error(ErrorKind::MissingRequiredArgument, msg).exit()
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn build_scenario(a: &EnvArgs) -> Result<Scenario> {
    let mut s = match &a.scenario {
        Some(path) => Scenario::from_json(&read_file(path)?)
            .with_context(|| format!("invalid scenario {}", path.display()))?,
        None => {
            let (Some(kind), Some(load)) = (a.structure, a.load) else {
                usage_error("--structure and --load are required without --scenario");
            };
            Scenario::new(kind, load)
        }
    };
    if let Some(kind) = a.structure {
        if kind != s.structure.name {
            s.structure = ppcs_core::model::build_structure(kind);
        }
    }
    if let Some(load) = a.load {
        s.planned_shop_load = load;
    }
    if let Some(h) = a.horizon {
        s.horizon_days = h;
    }
    if let Some(w) = a.warmup {
        s.warmup_days = w;
    }
    if let Some(cv) = &a.cv {
        s.cv = cv.apply(s.cv);
    }
    s.validate()?;
    Ok(s)
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let scenario = build_scenario(&a.env)?;
    let params = ControllerParams::from_named(a.ppcs, &a.params.0)?;
    let options = SimOptions {
        audit: a.audit,
        trace: a.trace,
        dispatch: None,
    };
    let started = Instant::now();
    let out = Simulation::new(&scenario, &params, a.seed, options)?.run()?;
    let it = Iteration {
        index: 0,
        structure: scenario.structure.name,
        load: scenario.planned_shop_load,
        params,
    };
    let rec = ResultRecord::new(&it, 0, a.seed, &out.result, started.elapsed().as_secs_f64() * 1e3);
    let text = match a.format {
        Format::Jsonl => format!("{}\n", serde_json::to_string(&rec)?),
        Format::Csv => run_csv(&rec)?,
    };
    print!("{text}");
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir)?;
        let name = if a.format == Format::Jsonl { "run.jsonl" } else { "run.csv" };
        fs::write(dir.join(name), &text)?;
        if let Some(trace) = &out.trace {
            trace.write_csv(&dir.join("trace"))?;
        }
    } else if a.trace {
        eprintln!("note: --trace without --out writes nothing");
    }
    Ok(())
}

fn run_csv(rec: &ResultRecord) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["structure", "load", "ppcs", "seed", "params"];
    header.extend(["wip_component", "component_stock", "wip_item", "fgi", "tardiness", "overall_per_day"]);
    header.extend(["on_time_fraction", "mean_production_lead_time", "utilization"]);
    w.write_record(&header)?;
    let d = &rec.diagnostics;
    let mut row = vec![
        rec.structure.to_string(),
        rec.load.to_string(),
        rec.ppcs.to_string(),
        rec.seed.to_string(),
        ppcs_harness::summary::format_params(&rec.params),
    ];
    row.extend(CostRecord::as_array(&rec.cost).iter().map(|v| v.to_string()));
    row.push(d.on_time_fraction.to_string());
    row.push(d.mean_production_lead_time.to_string());
    row.push(d.utilization.iter().map(|u| u.to_string()).collect::<Vec<_>>().join(";"));
    w.write_record(&row)?;
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn build_plan(preset: Option<Preset>, plan: &Option<PathBuf>) -> Result<ExperimentPlan> {
    Ok(match (preset, plan) {
        (_, Some(path)) => serde_json::from_str(&read_file(path)?)
            .with_context(|| format!("invalid plan {}", path.display()))?,
        (Some(p), None) => ExperimentPlan::preset(p),
        (None, None) => usage_error("one of --preset or --plan is required"),
    })
}

fn print_counts(plan: &ExperimentPlan) {
    let c = plan.counts();
    print!("{:<8}", "ppcs");
    for s in &plan.structures {
        print!("{:>10}", s.to_string());
    }
    println!();
    for p in &plan.ppcs {
        print!("{:<8}", p.ppcs.to_string());
        for s in &plan.structures {
            let key = ppcs_harness::plan::CountKey {
                ppcs: p.ppcs,
                structure: *s,
            };
            print!("{:>10}", c.by_ppcs_structure.get(&key).copied().unwrap_or(0));
        }
        println!();
    }
    println!("iterations {}", c.iterations);
    println!("replications {}", plan.replications);
    println!("runs {}", c.runs);
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let mut plan = build_plan(a.preset, &a.plan)?;
    if let Some(s) = a.seed {
        plan.master_seed = s;
    }
    if let Some(r) = a.replications {
        plan.replications = r;
    }
    if let Some(h) = a.horizon {
        plan.horizon_days = h;
    }
    if let Some(w) = a.warmup {
        plan.warmup_days = w;
    }
    if let Some(cv) = &a.cv {
        plan.cv = Some(cv.apply(plan.cv.unwrap_or_default()));
    }
    plan.validate()?;
    if a.dry_run {
        print_counts(&plan);
        return Ok(());
    }
    let out = a.out.unwrap_or_else(|| PathBuf::from("results").join(&plan.name));
    let store = ResultStore::create_or_open(&out, &plan)?;
    let workers = a.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let started = Instant::now();
    let last = AtomicUsize::new(0);
    let progress = |p: Progress| {
        let pct = p.done * 100 / p.total.max(1);
        if pct > last.load(Ordering::Relaxed) || p.done == p.total {
            last.store(pct, Ordering::Relaxed);
            eprint!("\r{}/{} runs ({pct}%) {:.0}s", p.done, p.total, started.elapsed().as_secs_f64());
            let _ = std::io::stderr().flush();
        }
    };
    let summary = execute(
        &plan,
        &store,
        &ExecOptions {
            workers,
            max_runs: a.max_runs,
            progress: Some(&progress),
        },
    )?;
    eprintln!();
    println!(
        "store {}: {} planned, {} already done, {} executed, {} failed in {:.1}s",
        out.display(),
        summary.planned_runs,
        summary.already_done,
        summary.executed,
        summary.failed,
        started.elapsed().as_secs_f64()
    );
    if summary.failed > 0 {
        bail!("{} runs failed; see {}", summary.failed, store.failures_path().display());
    }
    if a.summarize && summary.already_done + summary.executed == summary.planned_runs {
        write_summary(&store, &plan, &store.summary_dir(), false, None)?;
    }
    Ok(())
}

fn write_summary(
    store: &ResultStore,
    plan: &ExperimentPlan,
    out: &Path,
    partial: bool,
    format: Option<Format>,
) -> Result<()> {
    let records = store.load_results()?;
    let summary = summarize((!partial).then_some(plan), &records)?;
    summary.write_csv(out)?;
    match format {
        None => {
            print!("{}", summary.render_text());
            println!("\nreports written to {}", out.display());
        }
        Some(Format::Jsonl) => {
            for r in summary.cost_rows() {
                println!("{}", serde_json::to_string(&r)?);
            }
        }
        Some(Format::Csv) => print!("{}", read_file(&out.join("cost_table.csv"))?),
    }
    Ok(())
}

fn cmd_summarize(a: SummarizeArgs) -> Result<()> {
    let (store, plan) = ResultStore::open(&a.store)?;
    let out = a.out.unwrap_or_else(|| store.summary_dir());
    write_summary(&store, &plan, &out, a.partial, a.format)?;
    // the reports must read back as written
    let rows: Vec<ppcs_harness::summary::CostRow> = read_rows(&out.join("cost_table.csv"))?;
    debug_assert_eq!(rows.len(), summarize(None, &store.load_results()?)?.cost_rows().len());
    Ok(())
}

fn cmd_validate(a: ValidateArgs) -> Result<()> {
    let mut checked = 0;
    if a.env.scenario.is_some() || a.env.structure.is_some() {
        let s = build_scenario(&a.env)?;
        println!("scenario ok: {} at load {}", s.structure.name, s.planned_shop_load);
        if let (Some(ppcs), Some(p)) = (a.ppcs, &a.params) {
            ControllerParams::from_named(ppcs, &p.0)?.validate(&s.structure)?;
            println!("{ppcs} parameters ok");
        }
        checked += 1;
    }
    if a.plan.is_some() || a.preset.is_some() {
        let plan = build_plan(a.preset, &a.plan)?;
        plan.validate()?;
        println!("plan `{}` ok", plan.name);
        print_counts(&plan);
        checked += 1;
    }
    if checked == 0 {
        usage_error("nothing to validate: give --scenario, --structure/--load, --plan or --preset");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Summarize(a) => cmd_summarize(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
