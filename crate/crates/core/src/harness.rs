//! Experiments: pick a deployment with one of four methods, evaluate it on
//! a common information stream, and collect the results as CSV rows.
//!
//! Every method is scored the same way: one tactical run of `T` slots on an
//! evaluation stream derived from the scenario seed, so methods differ only
//! in the deployment they choose.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Scenario, ScenarioConfig};
use crate::cost;
use crate::error::{Error, Result};
use crate::info::{derive_seed, InfoStream};
use crate::maied::{self, MaiedParams, MaiedRun, Objective};
use crate::model::*;
use crate::oracle::{self, HorizonInstance, TheoremReport};
use crate::output::fmt_g;
use crate::spco::{self, SpcoParams};

const EVAL_TAG: u64 = 0x6576_616c;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Spjeso,
    Dae,
    Soed,
    Uoed,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Spjeso, Method::Dae, Method::Soed, Method::Uoed];

    pub fn name(self) -> &'static str {
        match self {
            Method::Spjeso => "spjeso",
            Method::Dae => "dae",
            Method::Soed => "soed",
            Method::Uoed => "uoed",
        }
    }

    fn objective(self) -> Option<Objective> {
        match self {
            Method::Spjeso => Some(Objective::Full),
            Method::Dae => None,
            Method::Soed => Some(Objective::OperationOnly),
            Method::Uoed => Some(Objective::DelayOnly),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown method {s:?}; expected one of spjeso, dae, soed, uoed")))
    }
}

/// Scenario parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    /// Number of servers, laid out on a grid.
    EsCount,
    /// Mean compute capacity.
    CpuMean,
    /// Deployment cost of every server.
    UnitDeployCost,
    /// Catalog size; extra services repeat the existing profiles.
    ServiceCount,
    /// Storage size of every service.
    ServiceSize,
    /// Number of pairs, regenerated at random positions.
    UeCount,
    InteractionFrequency,
    /// Local and remote data volume of every service.
    DataVolume,
    V,
    MapBeta,
}

impl SweepParam {
    pub const ALL: [SweepParam; 10] = [
        SweepParam::EsCount,
        SweepParam::CpuMean,
        SweepParam::UnitDeployCost,
        SweepParam::ServiceCount,
        SweepParam::ServiceSize,
        SweepParam::UeCount,
        SweepParam::InteractionFrequency,
        SweepParam::DataVolume,
        SweepParam::V,
        SweepParam::MapBeta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::EsCount => "esCount",
            SweepParam::CpuMean => "cpuMean",
            SweepParam::UnitDeployCost => "unitDeployCost",
            SweepParam::ServiceCount => "serviceCount",
            SweepParam::ServiceSize => "serviceSize",
            SweepParam::UeCount => "ueCount",
            SweepParam::InteractionFrequency => "interactionFrequency",
            SweepParam::DataVolume => "dataVolume",
            SweepParam::V => "V",
            SweepParam::MapBeta => "mapBeta",
        }
    }

    /// Default grid for each parameter.
    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepParam::EsCount => vec![1.0, 3.0, 5.0, 7.0, 9.0],
            SweepParam::CpuMean => vec![50.0, 100.0, 200.0, 300.0, 400.0],
            SweepParam::UnitDeployCost => vec![50.0, 100.0, 150.0, 200.0, 250.0],
            SweepParam::ServiceCount => vec![2.0, 4.0, 6.0, 8.0],
            SweepParam::ServiceSize => vec![20.0, 40.0, 60.0, 80.0, 100.0],
            SweepParam::UeCount => vec![5.0, 10.0, 15.0, 20.0],
            SweepParam::InteractionFrequency => vec![0.1, 0.3, 0.5, 0.7, 0.9],
            SweepParam::DataVolume => vec![0.5, 1.0, 2.0, 3.0, 4.0],
            SweepParam::V => vec![1.0, 10.0, 100.0],
            SweepParam::MapBeta => vec![0.5, 5.0, 50.0],
        }
    }

    pub fn apply(self, cfg: &mut ScenarioConfig, value: f64) -> Result<()> {
        let count = || -> Result<usize> {
            if value >= 1.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(Error::Input(format!("{} must be a positive integer, got {value}", self.name())))
            }
        };
        match self {
            SweepParam::EsCount => cfg.set_server_count(count()?),
            SweepParam::CpuMean => cfg.distributions.compute_mean = value,
            SweepParam::UnitDeployCost => cfg.map_servers(|s| s.deploy_cost = value),
            SweepParam::ServiceCount => cfg.set_service_count(count()?),
            SweepParam::ServiceSize => cfg.services.iter_mut().for_each(|s| s.storage_size = value),
            SweepParam::UeCount => cfg.set_pair_count(count()?),
            SweepParam::InteractionFrequency => cfg.set_interaction_frequency(value),
            SweepParam::DataVolume => cfg.services.iter_mut().for_each(|s| {
                s.local_data_mb = value;
                s.remote_data_mb = value;
            }),
            SweepParam::V => cfg.control.v = value,
            SweepParam::MapBeta => cfg.control.map_beta = value,
        }
        Ok(())
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SweepParam::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = SweepParam::ALL.iter().map(|p| p.name()).collect();
            Error::Input(format!("unknown sweep parameter {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub repetitions: usize,
    pub methods: Vec<Method>,
}

impl SweepSpec {
    pub fn check(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Input("sweep needs at least one value".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Input("sweep needs at least one repetition".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Input("sweep needs at least one method".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    /// Directory for per-run trace files.
    pub trace_dir: Option<PathBuf>,
    /// Adds the non-deterministic `runtime_s` column.
    pub runtime: bool,
}

/// One (method, swept value, repetition) result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: Method,
    pub param: String,
    pub value: f64,
    pub rep: usize,
    pub seed: u64,
    pub z: String,
    pub deployed: usize,
    pub budget_ok: bool,
    pub total: f64,
    pub deploy: f64,
    pub maintain: f64,
    pub place: f64,
    pub operation: f64,
    pub ue_delay: f64,
    pub energy: f64,
    pub tactical: f64,
    pub mean_backlog: f64,
    pub maied_average: Option<f64>,
    pub status: String,
    #[serde(default)]
    pub runtime_s: Option<f64>,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn failed(method: Method, param: &str, value: f64, rep: usize, seed: u64, err: &Error) -> Self {
        Self {
            method,
            param: param.into(),
            value,
            rep,
            seed,
            z: String::new(),
            deployed: 0,
            budget_ok: false,
            total: f64::NAN,
            deploy: f64::NAN,
            maintain: f64::NAN,
            place: f64::NAN,
            operation: f64::NAN,
            ue_delay: f64::NAN,
            energy: f64::NAN,
            tactical: f64::NAN,
            mean_backlog: f64::NAN,
            maied_average: None,
            status: format!("error: {}", err.to_string().replace(['\n', ','], " ")),
            runtime_s: None,
        }
    }
}

/// Header of the results CSV.
pub const CSV_HEADER: [&str; 19] = [
    "method",
    "param",
    "value",
    "rep",
    "seed",
    "z",
    "deployed",
    "budget_ok",
    "total",
    "deploy",
    "maintain",
    "place",
    "operation",
    "ue_delay",
    "energy",
    "tactical",
    "mean_backlog",
    "maied_average",
    "status",
];

/// Deployment chosen by `method`, plus the chain run when there is one.
pub fn select_deployment(method: Method, scenario: &Scenario) -> Result<(DeploymentDecision, Option<MaiedRun>)> {
    match method.objective() {
        None => Ok((maied::baseline_dae(scenario), None)),
        Some(objective) => {
            let params = MaiedParams { objective, ..MaiedParams::from_scenario(scenario) };
            let run = maied::run_maied(scenario, &params, &SpcoParams::from_control(scenario.control()))?;
            Ok((run.best.clone(), Some(run)))
        }
    }
}

/// The stream every method is scored on.
pub fn evaluation_stream(scenario: &Scenario) -> InfoStream {
    InfoStream::new(scenario, derive_seed(scenario.seed(), EVAL_TAG, 0)).with_horizon(scenario.time().slots_per_period)
}

/// Tactical run of `z` on the evaluation stream.
pub fn evaluate(z: &DeploymentDecision, scenario: &Scenario) -> Result<spco::SpcoRun> {
    let params = SpcoParams::from_control(scenario.control());
    spco::run_spco(z, evaluation_stream(scenario), scenario.time().slots_per_period, &params, scenario)
}

fn trace_stem(method: Method, param: &str, value: f64, rep: usize) -> String {
    format!("{method}_{param}_{}_rep{rep}", fmt_g(value))
}

/// Runs one method on one configuration. The repetition shifts the seed.
pub fn run_experiment(
    base: &ScenarioConfig,
    method: Method,
    param: &str,
    value: f64,
    rep: usize,
    opts: &RunOptions,
) -> Result<ResultRow> {
    let start = Instant::now();
    let mut cfg = base.clone();
    cfg.seed = base.seed.wrapping_add(rep as u64);
    let scenario = cfg.validate()?;
    let (z, chain) = select_deployment(method, &scenario)?;
    let run = evaluate(&z, &scenario)?;
    let b = run.breakdown(&z, &scenario);

    if let Some(dir) = &opts.trace_dir {
        std::fs::create_dir_all(dir)?;
        let stem = trace_stem(method, param, value, rep);
        spco::write_trace(BufWriter::new(File::create(dir.join(format!("{stem}_spco.csv")))?), &run)?;
        if let Some(chain) = &chain {
            maied::write_trace(BufWriter::new(File::create(dir.join(format!("{stem}_maied.csv")))?), chain)?;
        }
    }

    Ok(ResultRow {
        method,
        param: param.into(),
        value,
        rep,
        seed: cfg.seed,
        z: z.bitstring(),
        deployed: z.count(),
        budget_ok: cost::deployment_cost(&z, &scenario) <= scenario.budget().deploy_budget + cost::FEASIBILITY_TOLERANCE,
        total: b.total,
        deploy: b.deploy,
        maintain: b.maintain,
        place: b.place,
        operation: b.operation,
        ue_delay: b.ue_delay,
        energy: b.energy,
        tactical: b.tactical,
        mean_backlog: run.mean_backlog(),
        maied_average: chain.map(|c| c.average),
        status: "ok".into(),
        runtime_s: opts.runtime.then(|| start.elapsed().as_secs_f64()),
    })
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Input(format!("cannot start worker pool: {e}")))
}

/// Sorts rows by (value, method, repetition).
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        a.value.total_cmp(&b.value).then(a.method.cmp(&b.method)).then(a.rep.cmp(&b.rep)).then(a.param.cmp(&b.param))
    });
}

/// Runs `methods × repetitions` on the unmodified base scenario.
pub fn run_methods(base: &ScenarioConfig, methods: &[Method], repetitions: usize, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    let tasks: Vec<(Method, usize)> =
        methods.iter().flat_map(|&m| (0..repetitions).map(move |r| (m, r))).collect();
    let mut rows = pool(opts.workers)?.install(|| {
        tasks
            .par_iter()
            .map(|&(m, r)| {
                run_experiment(base, m, "base", 0.0, r, opts).unwrap_or_else(|e| {
                    ResultRow::failed(m, "base", 0.0, r, base.seed.wrapping_add(r as u64), &e)
                })
            })
            .collect::<Vec<_>>()
    });
    sort_rows(&mut rows);
    Ok(rows)
}

/// Every (value, method, repetition) of a sweep; failing points become
/// error rows and the sweep carries on.
pub fn run_sweep(base: &ScenarioConfig, spec: &SweepSpec, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    spec.check()?;
    let name = spec.param.name();
    let mut tasks = Vec::new();
    for &value in &spec.values {
        for &method in &spec.methods {
            for rep in 0..spec.repetitions {
                tasks.push((value, method, rep));
            }
        }
    }
    let mut rows = pool(opts.workers)?.install(|| {
        tasks
            .par_iter()
            .map(|&(value, method, rep)| {
                let seed = base.seed.wrapping_add(rep as u64);
                let mut cfg = base.clone();
                spec.param
                    .apply(&mut cfg, value)
                    .and_then(|_| run_experiment(&cfg, method, name, value, rep, opts))
                    .unwrap_or_else(|e| ResultRow::failed(method, name, value, rep, seed, &e))
            })
            .collect::<Vec<_>>()
    });
    sort_rows(&mut rows);
    Ok(rows)
}

fn opt_g(v: Option<f64>) -> String {
    v.map(fmt_g).unwrap_or_default()
}

/// Writes rows as CSV with 9 significant digits per float.
pub fn write_csv(out: impl Write, rows: &[ResultRow]) -> Result<()> {
    let runtime = rows.iter().any(|r| r.runtime_s.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    if runtime {
        header.push("runtime_s");
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.method.to_string(),
            r.param.clone(),
            fmt_g(r.value),
            r.rep.to_string(),
            r.seed.to_string(),
            r.z.clone(),
            r.deployed.to_string(),
            r.budget_ok.to_string(),
            fmt_g(r.total),
            fmt_g(r.deploy),
            fmt_g(r.maintain),
            fmt_g(r.place),
            fmt_g(r.operation),
            fmt_g(r.ue_delay),
            fmt_g(r.energy),
            fmt_g(r.tactical),
            fmt_g(r.mean_backlog),
            opt_g(r.maied_average),
            r.status.clone(),
        ];
        if runtime {
            rec.push(opt_g(r.runtime_s));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(input: impl Read) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let expected: Vec<&str> = header.iter().take(CSV_HEADER.len()).collect();
    if expected != CSV_HEADER {
        return Err(Error::Input(format!("unexpected results header: {}", header.iter().collect::<Vec<_>>().join(","))));
    }
    Ok(r.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?)
}

pub fn write_csv_file(path: &Path, rows: &[ResultRow]) -> Result<()> {
    write_csv(BufWriter::new(File::create(path)?), rows)
}

pub fn read_csv_file(path: &Path) -> Result<Vec<ResultRow>> {
    read_csv(File::open(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointMean {
    pub value: f64,
    pub mean_total: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub mean_total: f64,
    pub points: Vec<PointMean>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    /// max over points of (baseline − spjeso)/baseline, in percent.
    pub max_percent: f64,
    pub at_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub param: String,
    pub failed_rows: usize,
    pub methods: BTreeMap<String, MethodSummary>,
    /// Reduction achieved by spjeso relative to each baseline.
    pub improvement: BTreeMap<String, Improvement>,
}

pub fn summarize(rows: &[ResultRow]) -> Summary {
    let param = rows.first().map(|r| r.param.clone()).unwrap_or_default();
    let ok: Vec<&ResultRow> = rows.iter().filter(|r| r.is_ok()).collect();
    let mut methods = BTreeMap::new();
    for m in Method::ALL {
        let mine: Vec<&&ResultRow> = ok.iter().filter(|r| r.method == m).collect();
        if mine.is_empty() {
            continue;
        }
        let mut values: Vec<f64> = mine.iter().map(|r| r.value).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let points = values
            .iter()
            .map(|&v| {
                let at: Vec<f64> = mine.iter().filter(|r| r.value == v).map(|r| r.total).collect();
                PointMean { value: v, mean_total: at.iter().sum::<f64>() / at.len() as f64, runs: at.len() }
            })
            .collect();
        let mean_total = mine.iter().map(|r| r.total).sum::<f64>() / mine.len() as f64;
        methods.insert(m.name().to_string(), MethodSummary { mean_total, points });
    }
    let mut improvement = BTreeMap::new();
    if let Some(ours) = methods.get("spjeso") {
        for (name, base) in methods.iter().filter(|(k, _)| k.as_str() != "spjeso") {
            let mut best: Option<Improvement> = None;
            for p in &base.points {
                let Some(o) = ours.points.iter().find(|o| o.value == p.value) else { continue };
                let pct = 100.0 * (p.mean_total - o.mean_total) / p.mean_total;
                if best.as_ref().is_none_or(|b| pct > b.max_percent) {
                    best = Some(Improvement { max_percent: pct, at_value: p.value });
                }
            }
            if let Some(b) = best {
                improvement.insert(name.clone(), b);
            }
        }
    }
    Summary { param, failed_rows: rows.len() - ok.len(), methods, improvement }
}

/// Theorem checks on random tiny instances: Theorem 1 for V ∈ {10, 100},
/// Theorem 2 for V ∈ {1, 10, 100}, Theorem 3 on random cost vectors.
pub fn theorem_suite(seed: u64, instances: usize, horizon: usize) -> Result<Vec<TheoremReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reports = Vec::new();
    for i in 0..instances {
        let inst = HorizonInstance::random(&mut rng, i, horizon);
        for v in [10.0, 100.0] {
            reports.push(oracle::check_theorem1(&inst, v)?);
        }
        for v in [1.0, 10.0, 100.0] {
            reports.push(oracle::check_theorem2(&inst, v)?);
        }
    }
    for size in [2usize, 8, 32] {
        for beta in [0.5, 5.0, 50.0] {
            let costs: Vec<f64> = (0..size).map(|_| rng.random_range(0.0..10.0)).collect();
            reports.push(oracle::check_theorem3(&costs, beta));
        }
    }
    Ok(reports)
}
