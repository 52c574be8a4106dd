//! `mecsim`: scenario validation, single runs, sweeps, theorem checks and
//! snapshot dumps.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use mec_core::harness::{self, Method, ResultRow, RunOptions, SweepParam, SweepSpec};
use mec_core::info::InfoStream;
use mec_core::maied::ConfigSpace;
use mec_core::model::DeploymentDecision;
use mec_core::output::write_snapshots;
use mec_core::{Error, Scenario, ScenarioConfig};
use serde_json::json;

#[derive(Parser)]
#[command(name = "mecsim", version, about = "Edge server deployment and service placement simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file and print its key dimensions.
    Validate {
        scenario: PathBuf,
    },
    /// Run one or more methods on a scenario.
    Run {
        scenario: PathBuf,
        /// Method to run; repeat for several. Defaults to all four.
        #[arg(short, long = "method")]
        methods: Vec<Method>,
        /// Override a scenario parameter, e.g. `--set esCount=5`.
        #[arg(long = "set", value_name = "PARAM=VALUE")]
        overrides: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Vary one parameter over a grid and run every method at each point.
    Sweep {
        scenario: PathBuf,
        /// esCount, cpuMean, unitDeployCost, serviceCount, serviceSize,
        /// ueCount, interactionFrequency, dataVolume, V or mapBeta.
        #[arg(short, long)]
        param: SweepParam,
        /// Comma-separated grid; defaults to the parameter's built-in grid.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[arg(short, long = "method")]
        methods: Vec<Method>,
        #[command(flatten)]
        common: Common,
    },
    /// Check the queue and chain bounds numerically on random tiny instances.
    VerifyTheorems {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        instances: usize,
        /// Slots per instance (at most 6).
        #[arg(long, default_value_t = 3)]
        horizon: usize,
        /// Writes theorems.json here.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Write the generated per-slot network information as CSV.
    DumpSnapshots {
        scenario: PathBuf,
        #[arg(long, default_value_t = 10)]
        slots: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Base seed; repetition r uses seed + r.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long, default_value_t = 1)]
    reps: usize,
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(short, long, default_value_t = 0)]
    workers: usize,
    /// Write per-run tactical and chain traces under <out>/traces.
    #[arg(long)]
    trace: bool,
    /// Add a wall-clock runtime column (makes output non-reproducible).
    #[arg(long)]
    runtime: bool,
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            workers: self.workers,
            trace_dir: self.trace.then(|| self.out.join("traces")),
            runtime: self.runtime,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            eprintln!("{}", json!({ "error": "usage", "message": msg.trim() }));
            return ExitCode::from(2);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::FAILURE
        }
    }
}

fn error_json(e: &anyhow::Error) -> serde_json::Value {
    match e.downcast_ref::<Error>() {
        Some(Error::Invalid(report)) => json!({
            "error": "invalid_scenario",
            "message": e.to_string(),
            "path": report.path,
            "violations": report.violations,
        }),
        Some(err) => json!({ "error": err.kind(), "message": format!("{e:#}") }),
        None => json!({ "error": "io", "message": format!("{e:#}") }),
    }
}

fn dispatch(cmd: Command) -> anyhow::Result<ExitCode> {
    match cmd {
        Command::Validate { scenario } => validate(&scenario),
        Command::Run { scenario, methods, overrides, common } => run(&scenario, methods, &overrides, &common),
        Command::Sweep { scenario, param, values, methods, common } => sweep(&scenario, param, values, methods, &common),
        Command::VerifyTheorems { seed, instances, horizon, out } => verify(seed, instances, horizon, out.as_deref()),
        Command::DumpSnapshots { scenario, slots, seed, out } => dump(&scenario, slots, seed, out.as_deref()),
    }
}

fn load(path: &Path, seed: Option<u64>) -> anyhow::Result<(ScenarioConfig, Scenario)> {
    // Validate first so violations point at lines of the file as written.
    ScenarioConfig::load_scenario(path)?;
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let scenario = cfg.validate().map_err(Error::from)?;
    Ok((cfg, scenario))
}

fn validate(path: &Path) -> anyhow::Result<ExitCode> {
    let (_, s) = load(path, None)?;
    let space = ConfigSpace::new(&s).map(|c| c.len());
    let summary = json!({
        "scenario": path.display().to_string(),
        "seed": s.seed(),
        "servers": s.server_count(),
        "services": s.service_count(),
        "pairs": s.pair_count(),
        "slots_per_period": s.time().slots_per_period,
        "periods": s.time().periods,
        "energy_budget_all_deployed": s.budget().energy_budget_for(&DeploymentDecision::all(s.server_count())),
        "deploy_budget": s.budget().deploy_budget,
        "cloud_delay": s.weights().cloud_delay,
        "feasible_deployments": space.ok(),
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(ExitCode::SUCCESS)
}

fn methods_or_all(methods: Vec<Method>) -> Vec<Method> {
    if methods.is_empty() {
        Method::ALL.to_vec()
    } else {
        methods
    }
}

fn parse_override(s: &str) -> anyhow::Result<(SweepParam, f64)> {
    let (k, v) = s.split_once('=').ok_or_else(|| Error::Input(format!("override {s:?} is not PARAM=VALUE")))?;
    let param: SweepParam = k.trim().parse()?;
    let value: f64 = v.trim().parse().map_err(|_| Error::Input(format!("override {s:?} has a non-numeric value")))?;
    Ok((param, value))
}

fn write_results(out: &Path, stem: &str, rows: &[ResultRow]) -> anyhow::Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let csv = out.join(format!("{stem}.csv"));
    harness::write_csv_file(&csv, rows)?;
    let summary = harness::summarize(rows);
    let json_path = out.join(format!("{stem}_summary.json"));
    fs::write(&json_path, serde_json::to_string_pretty(&summary)? + "\n")?;
    for (name, m) in &summary.methods {
        println!("{name:>7}  mean total {}", mec_core::output::fmt_g(m.mean_total));
    }
    for (name, imp) in &summary.improvement {
        println!(
            "spjeso vs {name}: up to {:.2}% lower (at {} = {})",
            imp.max_percent,
            summary.param,
            mec_core::output::fmt_g(imp.at_value)
        );
    }
    if summary.failed_rows > 0 {
        println!("{} row(s) failed; see the status column", summary.failed_rows);
    }
    println!("wrote {} and {}", csv.display(), json_path.display());
    Ok(())
}

fn run(path: &Path, methods: Vec<Method>, overrides: &[String], common: &Common) -> anyhow::Result<ExitCode> {
    let (mut cfg, _) = load(path, common.seed)?;
    for o in overrides {
        let (param, value) = parse_override(o)?;
        param.apply(&mut cfg, value)?;
    }
    cfg.validate().map_err(Error::from)?;
    let rows = harness::run_methods(&cfg, &methods_or_all(methods), common.reps, &common.options())?;
    write_results(&common.out, "results", &rows)?;
    Ok(ExitCode::SUCCESS)
}

fn sweep(path: &Path, param: SweepParam, values: Vec<f64>, methods: Vec<Method>, common: &Common) -> anyhow::Result<ExitCode> {
    let (cfg, _) = load(path, common.seed)?;
    let spec = SweepSpec {
        param,
        values: if values.is_empty() { param.default_values() } else { values },
        repetitions: common.reps,
        methods: methods_or_all(methods),
    };
    let rows = harness::run_sweep(&cfg, &spec, &common.options())?;
    write_results(&common.out, &format!("sweep_{param}"), &rows)?;
    Ok(ExitCode::SUCCESS)
}

fn verify(seed: u64, instances: usize, horizon: usize, out: Option<&Path>) -> anyhow::Result<ExitCode> {
    let reports = harness::theorem_suite(seed, instances, horizon)?;
    let mut hard_failures = 0;
    for t in 1..=3u8 {
        let of: Vec<_> = reports.iter().filter(|r| r.theorem == t).collect();
        let failed = of.iter().filter(|r| !r.pass).count();
        let worst = of.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
        let label = if t == 2 { " (estimated constants, advisory)" } else { "" };
        println!("theorem {t}: {}/{} within bound, min slack {worst:.6}{label}", of.len() - failed, of.len());
        if t != 2 {
            hard_failures += failed;
        }
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let path = dir.join("theorems.json");
        fs::write(&path, serde_json::to_string_pretty(&reports)? + "\n")?;
        println!("wrote {}", path.display());
    }
    Ok(if hard_failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn dump(path: &Path, slots: usize, seed: Option<u64>, out: Option<&Path>) -> anyhow::Result<ExitCode> {
    let (_, s) = load(path, seed)?;
    let snaps: Vec<_> = InfoStream::new(&s, s.seed()).with_horizon(slots).collect();
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            let mut w = BufWriter::new(File::create(p)?);
            write_snapshots(&mut w, &snaps)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            write_snapshots(stdout.lock(), &snaps)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
