//! Scenario files and validation.
//!
//! A scenario file is TOML. Servers and pairs may be listed explicitly
//! (`[[servers]]`, `[[pairs]]`) or generated from a template (`[servers]`
//! with a `count`, laid out on an even grid; `[pairs]` with a `count`,
//! placed uniformly at random from the scenario seed). Services are always
//! listed. See `docs/scenario.md` for every key.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cost;
use crate::error::{Error, Result};
use crate::info::derive_seed;
use crate::model::*;

const PAIR_POSITION_TAG: u64 = 0x7061_6972;

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub slots_per_period: usize,
    pub periods: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self { slots_per_period: 200, periods: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    pub bandwidth_hz: f64,
    pub noise_dbm_per_hz: f64,
    /// Overrides `noise_dbm_per_hz` when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_power_w: Option<f64>,
    pub path_loss_exponent: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self { bandwidth_hz: 2e6, noise_dbm_per_hz: -174.0, noise_power_w: None, path_loss_exponent: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightsConfig {
    pub alpha: f64,
    pub beta_tx: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    /// Derived from the scenario geometry when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cloud_delay: Option<f64>,
}

impl Default for WeightsConfig {
    fn default() -> Self {
        Self { alpha: 1.0, beta_tx: 1.0, eta1: 1.0, eta2: 1.0, eta3: 1.0, cloud_delay: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub deploy_budget: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_budget_per_server: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_budget_total: Option<f64>,
}

impl Default for BudgetSection {
    fn default() -> Self {
        Self { deploy_budget: 500.0, energy_budget_per_server: None, energy_budget_total: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DistributionsConfig {
    pub storage_mean: f64,
    pub storage_std: f64,
    pub compute_mean: f64,
    pub compute_std: f64,
    pub arena_side: f64,
    pub mobility_step_std: f64,
}

impl Default for DistributionsConfig {
    fn default() -> Self {
        Self {
            storage_mean: 200.0,
            storage_std: 5.0,
            compute_mean: 200.0,
            compute_std: 5.0,
            arena_side: 1000.0,
            mobility_step_std: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub wired_capacity_mbps: f64,
    /// Full symmetric matrix in Mbit/s; overrides the uniform value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wired_matrix_mbps: Option<Vec<Vec<f64>>>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self { wired_capacity_mbps: 100.0, wired_matrix_mbps: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlConfig {
    pub v: f64,
    pub map_beta: f64,
    pub map_alpha: f64,
    pub freeze_info: bool,
    pub solver: SolverBackend,
    pub exhaustive_ceiling: u64,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            v: 100.0,
            map_beta: 50.0,
            map_alpha: 1.0,
            freeze_info: false,
            solver: SolverBackend::Greedy,
            exhaustive_ceiling: 10_000_000,
        }
    }
}

/// Homogeneous servers on an even grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetTemplate {
    pub count: usize,
    #[serde(default = "FleetTemplate::default_deploy_cost")]
    pub deploy_cost: f64,
    #[serde(default = "FleetTemplate::default_maintain")]
    pub maintain_unit_cost: f64,
    #[serde(default = "FleetTemplate::default_place")]
    pub place_unit_cost: f64,
    #[serde(default = "FleetTemplate::default_idle")]
    pub idle_power: f64,
    #[serde(default = "FleetTemplate::default_max")]
    pub max_power: f64,
}

impl FleetTemplate {
    fn default_deploy_cost() -> f64 {
        100.0
    }
    fn default_maintain() -> f64 {
        0.1
    }
    fn default_place() -> f64 {
        0.5
    }
    fn default_idle() -> f64 {
        100.0
    }
    fn default_max() -> f64 {
        200.0
    }

    pub fn with_count(count: usize) -> Self {
        Self {
            count,
            deploy_cost: Self::default_deploy_cost(),
            maintain_unit_cost: Self::default_maintain(),
            place_unit_cost: Self::default_place(),
            idle_power: Self::default_idle(),
            max_power: Self::default_max(),
        }
    }

    fn from_profile(p: &EsProfile, count: usize) -> Self {
        Self {
            count,
            deploy_cost: p.deploy_cost,
            maintain_unit_cost: p.maintain_unit_cost,
            place_unit_cost: p.place_unit_cost,
            idle_power: p.idle_power,
            max_power: p.max_power,
        }
    }

    fn expand(&self, arena_side: f64) -> Vec<EsProfile> {
        grid_positions(self.count, arena_side)
            .into_iter()
            .enumerate()
            .map(|(id, position)| EsProfile {
                id,
                position,
                deploy_cost: self.deploy_cost,
                maintain_unit_cost: self.maintain_unit_cost,
                place_unit_cost: self.place_unit_cost,
                idle_power: self.idle_power,
                max_power: self.max_power,
            })
            .collect()
    }
}

/// Pairs with uniformly random initial positions; services assigned round-robin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairTemplate {
    pub count: usize,
    #[serde(default = "PairTemplate::default_frequency")]
    pub interaction_frequency: f64,
    #[serde(default = "PairTemplate::default_tx_power")]
    pub tx_power: f64,
}

impl PairTemplate {
    fn default_frequency() -> f64 {
        0.5
    }
    fn default_tx_power() -> f64 {
        0.1
    }

    pub fn with_count(count: usize) -> Self {
        Self { count, interaction_frequency: Self::default_frequency(), tx_power: Self::default_tx_power() }
    }

    fn expand(&self, services: usize, arena_side: f64, seed: u64) -> Vec<UePair> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, PAIR_POSITION_TAG, 0));
        let mut pick = || Point::new(rng.random::<f64>() * arena_side, rng.random::<f64>() * arena_side);
        (0..self.count)
            .map(|id| UePair {
                id,
                service: if services == 0 { 0 } else { id % services },
                interaction_frequency: self.interaction_frequency,
                src_position: pick(),
                dst_position: pick(),
                tx_power: self.tx_power,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ServersSection {
    Grid(FleetTemplate),
    List(Vec<EsProfile>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PairsSection {
    Random(PairTemplate),
    List(Vec<UePair>),
}

/// Raw, unvalidated scenario file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub weights: WeightsConfig,
    #[serde(default)]
    pub budget: BudgetSection,
    #[serde(default)]
    pub distributions: DistributionsConfig,
    #[serde(default)]
    pub network: NetworkConfig,
    #[serde(default)]
    pub control: ControlConfig,
    pub servers: ServersSection,
    pub services: Vec<ServiceSpec>,
    pub pairs: PairsSection,
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
    /// 1-based line of the offending key in the scenario file, when known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
}

/// Every invariant a scenario violates, not just the first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "scenario has {} violation(s)", self.violations.len())?;
        for v in &self.violations {
            match (&self.path, v.line) {
                (Some(p), Some(l)) => write!(f, "\n  {p}:{l}: {}: {}", v.field, v.message)?,
                (Some(p), None) => write!(f, "\n  {p}: {}: {}", v.field, v.message)?,
                _ => write!(f, "\n  {}: {}", v.field, v.message)?,
            }
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

impl ValidationReport {
    pub fn mentions(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.message.contains(needle) || v.field.contains(needle))
    }

    /// Attaches the file name and, where the key can be found, its line.
    pub fn with_source(mut self, path: &str, text: &str) -> Self {
        self.path = Some(path.to_string());
        for v in &mut self.violations {
            v.line = locate_field(text, &v.field);
        }
        self
    }
}

fn key_of(line: &str) -> Option<&str> {
    let (k, _) = line.split_once('=')?;
    Some(k.trim())
}

/// Best-effort 1-based line of a dotted field such as `time.periods` or
/// `services[3].core_load` (the bracket holds the entry's id).
pub fn locate_field(text: &str, field: &str) -> Option<usize> {
    let lines: Vec<&str> = text.lines().collect();
    let (head, key) = field.split_once('.').unwrap_or((field, ""));
    let (section, id) = match head.split_once('[') {
        Some((name, rest)) => (name, rest.trim_end_matches(']').parse::<u64>().ok()),
        None => (head, None),
    };
    let table = format!("[{section}]");
    let array = format!("[[{section}]]");
    let mut blocks = Vec::new();
    let mut start = None;
    for (i, l) in lines.iter().enumerate() {
        let t = l.trim();
        if t.starts_with('[') {
            if let Some(s) = start.take() {
                blocks.push((s, i));
            }
            if t == table || t == array {
                start = Some(i);
            }
        }
    }
    if let Some(s) = start {
        blocks.push((s, lines.len()));
    }
    let block = match id {
        Some(id) => blocks
            .iter()
            .find(|(s, e)| {
                lines[s + 1..*e].iter().any(|l| {
                    key_of(l) == Some("id") && l.split_once('=').and_then(|(_, v)| v.trim().parse::<u64>().ok()) == Some(id)
                })
            })
            .or(blocks.get(id as usize)),
        None => blocks.first(),
    };
    let Some(&(s, e)) = block else {
        // Top-level key, or a section given inline.
        return lines.iter().position(|l| key_of(l) == Some(head)).map(|i| i + 1);
    };
    let hit = lines[s + 1..e].iter().position(|l| key_of(l) == Some(key)).map(|i| s + 2 + i);
    Some(hit.unwrap_or(s + 1))
}

#[derive(Default)]
struct Checker {
    violations: Vec<Violation>,
}

impl Checker {
    fn check(&mut self, ok: bool, field: impl Into<String>, message: impl Into<String>) {
        if !ok {
            self.violations.push(Violation { field: field.into(), message: message.into(), line: None });
        }
    }

    fn positive(&mut self, v: f64, field: impl Into<String>) {
        self.check(v.is_finite() && v > 0.0, field, format!("must be > 0, got {v}"));
    }

    fn non_negative(&mut self, v: f64, field: impl Into<String>) {
        self.check(v.is_finite() && v >= 0.0, field, format!("must be >= 0, got {v}"));
    }

    fn inside(&mut self, p: Point, side: f64, field: impl Into<String>) {
        let ok = (0.0..=side).contains(&p.x) && (0.0..=side).contains(&p.y);
        self.check(ok, field, format!("position ({}, {}) lies outside the {side} m arena", p.x, p.y));
    }
}

/// Cell centers of the smallest near-square grid holding `count` points.
pub fn grid_positions(count: usize, side: f64) -> Vec<Point> {
    if count == 0 {
        return Vec::new();
    }
    let cols = (count as f64).sqrt().ceil() as usize;
    let rows = count.div_ceil(cols);
    (0..count)
        .map(|i| {
            let (r, c) = (i / cols, i % cols);
            Point::new((c as f64 + 0.5) * side / cols as f64, (r as f64 + 0.5) * side / rows as f64)
        })
        .collect()
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse { path: "<string>".into(), message: e.to_string() })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Parse { path: path.display().to_string(), message: e.to_string() })
    }

    /// Loads and validates a scenario file; violations carry file and line.
    pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let cfg: ScenarioConfig =
            toml::from_str(&text).map_err(|e| Error::Parse { path: path.display().to_string(), message: e.to_string() })?;
        cfg.validate().map_err(|r| Error::Invalid(r.with_source(&path.display().to_string(), &text)))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Input(format!("cannot serialize scenario: {e}")))
    }

    pub fn server_count(&self) -> usize {
        match &self.servers {
            ServersSection::Grid(t) => t.count,
            ServersSection::List(l) => l.len(),
        }
    }

    /// Replaces the fleet with `count` grid-placed servers sharing the first server's profile.
    pub fn set_server_count(&mut self, count: usize) {
        let template = match &self.servers {
            ServersSection::Grid(t) => FleetTemplate { count, ..t.clone() },
            ServersSection::List(l) => match l.first() {
                Some(p) => FleetTemplate::from_profile(p, count),
                None => FleetTemplate::with_count(count),
            },
        };
        self.servers = ServersSection::Grid(template);
    }

    /// Applies `f` to every server profile, expanding a grid template if needed.
    pub fn map_servers(&mut self, f: impl Fn(&mut EsProfile)) {
        let mut list = match &self.servers {
            ServersSection::Grid(t) => t.expand(self.distributions.arena_side),
            ServersSection::List(l) => l.clone(),
        };
        list.iter_mut().for_each(f);
        self.servers = ServersSection::List(list);
    }

    /// Regenerates `count` random pairs, keeping the first pair's frequency and power.
    pub fn set_pair_count(&mut self, count: usize) {
        let template = match &self.pairs {
            PairsSection::Random(t) => PairTemplate { count, ..t.clone() },
            PairsSection::List(l) => match l.first() {
                Some(p) => PairTemplate { count, interaction_frequency: p.interaction_frequency, tx_power: p.tx_power },
                None => PairTemplate::with_count(count),
            },
        };
        self.pairs = PairsSection::Random(template);
    }

    pub fn set_interaction_frequency(&mut self, f: f64) {
        match &mut self.pairs {
            PairsSection::Random(t) => t.interaction_frequency = f,
            PairsSection::List(l) => l.iter_mut().for_each(|p| p.interaction_frequency = f),
        }
    }

    /// Resizes the catalog by cycling through the existing services.
    pub fn set_service_count(&mut self, count: usize) {
        let base = self.services.clone();
        if base.is_empty() {
            return;
        }
        self.services = (0..count).map(|id| ServiceSpec { id, ..base[id % base.len()].clone() }).collect();
        if let PairsSection::List(l) = &mut self.pairs {
            for p in l.iter_mut() {
                p.service %= count.max(1);
            }
        }
    }

    /// Validates every invariant and expands templates into a [`Scenario`].
    pub fn validate(&self) -> Result<Scenario, ValidationReport> {
        let mut ck = Checker::default();
        let arena = self.distributions.arena_side;

        ck.check(self.time.slots_per_period >= 1, "time.slots_per_period", "must be >= 1");
        ck.check(self.time.periods >= 1, "time.periods", "must be >= 1");

        let noise = self
            .channel
            .noise_power_w
            .unwrap_or_else(|| noise_power_watts(self.channel.noise_dbm_per_hz, self.channel.bandwidth_hz));
        let channel = ChannelParams {
            bandwidth_hz: self.channel.bandwidth_hz,
            noise_power_w: noise,
            path_loss_exponent: self.channel.path_loss_exponent,
        };
        ck.positive(channel.bandwidth_hz, "channel.bandwidth_hz");
        ck.positive(channel.noise_power_w, "channel.noise_power_w");
        ck.check(
            (2.0..=4.0).contains(&channel.path_loss_exponent),
            "channel.path_loss_exponent",
            format!("must lie in [2, 4], got {}", channel.path_loss_exponent),
        );

        let w = &self.weights;
        for (v, name) in [(w.alpha, "alpha"), (w.beta_tx, "beta_tx"), (w.eta1, "eta1"), (w.eta2, "eta2"), (w.eta3, "eta3")] {
            ck.non_negative(v, format!("weights.{name}"));
        }
        if let Some(t) = w.cloud_delay {
            ck.non_negative(t, "weights.cloud_delay");
        }

        ck.positive(self.budget.deploy_budget, "budget.deploy_budget");
        let energy_budget = match (self.budget.energy_budget_per_server, self.budget.energy_budget_total) {
            (Some(_), Some(_)) => {
                ck.check(false, "budget", "set only one of energy_budget_per_server and energy_budget_total");
                EnergyBudget::PerDeployedServer(150.0)
            }
            (None, Some(t)) => {
                ck.positive(t, "budget.energy_budget_total");
                EnergyBudget::Total(t)
            }
            (per, None) => {
                let per = per.unwrap_or(150.0);
                ck.positive(per, "budget.energy_budget_per_server");
                EnergyBudget::PerDeployedServer(per)
            }
        };

        let d = &self.distributions;
        ck.positive(d.storage_mean, "distributions.storage_mean");
        ck.positive(d.compute_mean, "distributions.compute_mean");
        ck.non_negative(d.storage_std, "distributions.storage_std");
        ck.non_negative(d.compute_std, "distributions.compute_std");
        ck.positive(d.arena_side, "distributions.arena_side");
        ck.non_negative(d.mobility_step_std, "distributions.mobility_step_std");

        let c = &self.control;
        ck.non_negative(c.v, "control.v");
        ck.positive(c.map_beta, "control.map_beta");
        ck.positive(c.map_alpha, "control.map_alpha");
        ck.check(c.exhaustive_ceiling >= 1, "control.exhaustive_ceiling", "must be >= 1");

        let mut services = self.services.clone();
        services.sort_by_key(|s| s.id);
        ck.check(!services.is_empty(), "services", "at least one service is required");
        for (i, s) in services.iter().enumerate() {
            let f = |k: &str| format!("services[{}].{k}", s.id);
            ck.check(s.id == i, f("id"), format!("service ids must be 0..{} without gaps", services.len()));
            ck.positive(s.storage_size, f("storage_size"));
            ck.positive(s.core_load, f("core_load"));
            ck.non_negative(s.local_data_mb, f("local_data_mb"));
            ck.non_negative(s.remote_data_mb, f("remote_data_mb"));
            ck.check(s.local_load == 0.0, f("local_load"), "local load is normalized to 0");
        }

        let servers = match &self.servers {
            ServersSection::Grid(t) => t.expand(arena),
            ServersSection::List(l) => {
                let mut l = l.clone();
                l.sort_by_key(|s| s.id);
                l
            }
        };
        ck.check(!servers.is_empty(), "servers", "at least one server is required");
        for (i, s) in servers.iter().enumerate() {
            let f = |k: &str| format!("servers[{}].{k}", s.id);
            ck.check(s.id == i, f("id"), format!("server ids must be 0..{} without gaps", servers.len()));
            ck.positive(s.deploy_cost, f("deploy_cost"));
            ck.non_negative(s.maintain_unit_cost, f("maintain_unit_cost"));
            ck.non_negative(s.place_unit_cost, f("place_unit_cost"));
            ck.non_negative(s.idle_power, f("idle_power"));
            ck.check(
                s.max_power >= s.idle_power,
                f("max_power"),
                format!("power ordering violated: max_power {} < idle_power {}", s.max_power, s.idle_power),
            );
            ck.inside(s.position, arena, f("position"));
        }

        let pairs = match &self.pairs {
            PairsSection::Random(t) => t.expand(services.len(), arena, self.seed),
            PairsSection::List(l) => {
                let mut l = l.clone();
                l.sort_by_key(|p| p.id);
                l
            }
        };
        ck.check(!pairs.is_empty(), "pairs", "at least one UE pair is required");
        for (i, p) in pairs.iter().enumerate() {
            let f = |k: &str| format!("pairs[{}].{k}", p.id);
            ck.check(p.id == i, f("id"), format!("pair ids must be 0..{} without gaps", pairs.len()));
            ck.check(
                (0.0..=1.0).contains(&p.interaction_frequency),
                f("interaction_frequency"),
                format!("must lie in [0, 1], got {}", p.interaction_frequency),
            );
            ck.check(
                p.service < services.len(),
                f("service"),
                format!("refers to unknown service {}", p.service),
            );
            ck.non_negative(p.tx_power, f("tx_power"));
            ck.inside(p.src_position, arena, f("src_position"));
            ck.inside(p.dst_position, arena, f("dst_position"));
        }

        let m = servers.len();
        let wired = match &self.network.wired_matrix_mbps {
            Some(rows) => {
                let flat: Vec<f64> = rows.iter().flatten().map(|v| v * 1e6).collect();
                let ok_shape = rows.len() == m && rows.iter().all(|r| r.len() == m);
                match WiredCapacity::from_matrix(m, flat).filter(|_| ok_shape) {
                    Some(w) => w,
                    None => {
                        ck.check(
                            false,
                            "network.wired_matrix_mbps",
                            format!("must be a symmetric {m}x{m} matrix with positive off-diagonal entries"),
                        );
                        WiredCapacity::uniform(m, 1.0)
                    }
                }
            }
            None => {
                ck.positive(self.network.wired_capacity_mbps, "network.wired_capacity_mbps");
                WiredCapacity::uniform(m, self.network.wired_capacity_mbps * 1e6)
            }
        };

        if !ck.violations.is_empty() {
            return Err(ValidationReport { path: None, violations: ck.violations });
        }

        let mut scenario = Scenario {
            seed: self.seed,
            services,
            pairs,
            servers,
            channel,
            weights: CostWeights {
                alpha: w.alpha,
                beta_tx: w.beta_tx,
                eta1: w.eta1,
                eta2: w.eta2,
                eta3: w.eta3,
                cloud_delay: w.cloud_delay.unwrap_or(0.0),
            },
            budget: BudgetConfig { deploy_budget: self.budget.deploy_budget, energy_budget },
            time: TimeStructure { slots_per_period: self.time.slots_per_period, periods: self.time.periods },
            distributions: ScenarioDistributions {
                storage_mean: d.storage_mean,
                storage_std: d.storage_std,
                compute_mean: d.compute_mean,
                compute_std: d.compute_std,
                arena_side: d.arena_side,
                mobility_step_std: d.mobility_step_std,
                seed: self.seed,
            },
            wired,
            control: ControlParams {
                v: c.v,
                map_beta: c.map_beta,
                map_alpha: c.map_alpha,
                freeze_info: c.freeze_info,
                solver: c.solver,
                exhaustive_ceiling: c.exhaustive_ceiling,
            },
        };
        if w.cloud_delay.is_none() {
            match scenario.median_edge_delay() {
                Some(median) => scenario.weights.cloud_delay = 10.0 * median,
                None => {
                    return Err(ValidationReport {
                        path: None,
                        violations: vec![Violation {
                            field: "weights.cloud_delay".into(),
                            message: "no endpoint can reach any server; set cloud_delay explicitly".into(),
                            line: None,
                        }],
                    })
                }
            }
        }
        Ok(scenario)
    }
}

/// Validated, immutable scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    seed: u64,
    services: Vec<ServiceSpec>,
    pairs: Vec<UePair>,
    servers: Vec<EsProfile>,
    channel: ChannelParams,
    weights: CostWeights,
    budget: BudgetConfig,
    time: TimeStructure,
    distributions: ScenarioDistributions,
    wired: WiredCapacity,
    control: ControlParams,
}

impl Scenario {
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn services(&self) -> &[ServiceSpec] {
        &self.services
    }
    pub fn pairs(&self) -> &[UePair] {
        &self.pairs
    }
    pub fn servers(&self) -> &[EsProfile] {
        &self.servers
    }
    pub fn channel(&self) -> &ChannelParams {
        &self.channel
    }
    pub fn weights(&self) -> &CostWeights {
        &self.weights
    }
    pub fn budget(&self) -> &BudgetConfig {
        &self.budget
    }
    pub fn time(&self) -> TimeStructure {
        self.time
    }
    pub fn distributions(&self) -> &ScenarioDistributions {
        &self.distributions
    }
    pub fn wired(&self) -> &WiredCapacity {
        &self.wired
    }
    pub fn control(&self) -> &ControlParams {
        &self.control
    }

    pub fn server_count(&self) -> usize {
        self.servers.len()
    }
    pub fn service_count(&self) -> usize {
        self.services.len()
    }
    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// Service run by pair `n`.
    pub fn pair_service(&self, n: usize) -> &ServiceSpec {
        &self.services[self.pairs[n].service]
    }

    /// Initial `[src, dst]` positions of every pair.
    pub fn initial_positions(&self) -> Vec<[Point; 2]> {
        self.pairs.iter().map(|p| [p.src_position, p.dst_position]).collect()
    }

    /// Median over (endpoint, server) of access plus compute delay cost at the
    /// initial positions and mean compute capacity; unreachable links skipped.
    pub fn median_edge_delay(&self) -> Option<f64> {
        let mut delays = Vec::new();
        for (n, pair) in self.pairs.iter().enumerate() {
            let svc = self.pair_service(n);
            for side in Side::BOTH {
                for es in &self.servers {
                    let dist = pair.position(side).distance(&es.position);
                    let Ok(rate) = cost::shannon_rate(dist, pair.tx_power, &self.channel) else { continue };
                    let Ok(access) = cost::access_delay_cost(svc.local_data_mb, rate, &self.weights) else { continue };
                    let compute = cost::compute_delay_cost(svc.core_load, self.distributions.compute_mean, &self.weights);
                    delays.push(access + compute);
                }
            }
        }
        if delays.is_empty() {
            return None;
        }
        delays.sort_by(f64::total_cmp);
        let k = delays.len();
        Some(if k % 2 == 1 { delays[k / 2] } else { 0.5 * (delays[k / 2 - 1] + delays[k / 2]) })
    }

    /// Explicit-form configuration that validates back to this scenario.
    pub fn to_config(&self) -> ScenarioConfig {
        let m = self.servers.len();
        let wired_matrix_mbps = (m > 1).then(|| {
            (0..m)
                .map(|a| {
                    (0..m)
                        .map(|b| match self.wired.link(a, b) {
                            WiredLink::SameNode => 0.0,
                            WiredLink::Capacity(c) => c / 1e6,
                        })
                        .collect()
                })
                .collect()
        });
        let (energy_budget_per_server, energy_budget_total) = match self.budget.energy_budget {
            EnergyBudget::PerDeployedServer(w) => (Some(w), None),
            EnergyBudget::Total(w) => (None, Some(w)),
        };
        ScenarioConfig {
            seed: self.seed,
            time: TimeConfig { slots_per_period: self.time.slots_per_period, periods: self.time.periods },
            channel: ChannelConfig {
                bandwidth_hz: self.channel.bandwidth_hz,
                noise_dbm_per_hz: -174.0,
                noise_power_w: Some(self.channel.noise_power_w),
                path_loss_exponent: self.channel.path_loss_exponent,
            },
            weights: WeightsConfig {
                alpha: self.weights.alpha,
                beta_tx: self.weights.beta_tx,
                eta1: self.weights.eta1,
                eta2: self.weights.eta2,
                eta3: self.weights.eta3,
                cloud_delay: Some(self.weights.cloud_delay),
            },
            budget: BudgetSection { deploy_budget: self.budget.deploy_budget, energy_budget_per_server, energy_budget_total },
            distributions: DistributionsConfig {
                storage_mean: self.distributions.storage_mean,
                storage_std: self.distributions.storage_std,
                compute_mean: self.distributions.compute_mean,
                compute_std: self.distributions.compute_std,
                arena_side: self.distributions.arena_side,
                mobility_step_std: self.distributions.mobility_step_std,
            },
            network: NetworkConfig {
                wired_capacity_mbps: match m {
                    0 | 1 => 100.0,
                    _ => match self.wired.link(0, 1) {
                        WiredLink::Capacity(c) => c / 1e6,
                        WiredLink::SameNode => 100.0,
                    },
                },
                wired_matrix_mbps,
            },
            control: ControlConfig {
                v: self.control.v,
                map_beta: self.control.map_beta,
                map_alpha: self.control.map_alpha,
                freeze_info: self.control.freeze_info,
                solver: self.control.solver,
                exhaustive_ceiling: self.control.exhaustive_ceiling,
            },
            servers: ServersSection::List(self.servers.clone()),
            services: self.services.clone(),
            pairs: PairsSection::List(self.pairs.clone()),
        }
    }
}
