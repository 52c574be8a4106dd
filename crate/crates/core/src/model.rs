//! Domain types shared by every other module.
//!
//! A [`Scenario`] is the validated, immutable static configuration of one
//! network. It is produced by [`crate::config::ScenarioConfig::validate`] and
//! never mutated afterwards, so it can be shared freely across parallel runs.
//!
//! Symbol map (each model symbol lives on exactly one type):
//!
//! | symbol | meaning | home |
//! |---|---|---|
//! | u_s, b_s, c_s, d_s, e_s | service profile | [`ServiceSpec`] |
//! | s_n, f_n, p | pair service, interaction frequency, tx power | [`UePair`] |
//! | q_m, ρ_m, θ_m (placement), P_idle, P_max | per-server costs and power | [`EsProfile`] |
//! | W, N0, θ (path loss) | radio channel | [`ChannelParams`] |
//! | α, β (transmission), η1, η2, η3, T_cld | cost coefficients | [`CostWeights`] |
//! | C_tot, P_avg | budgets | [`BudgetConfig`] |
//! | Φ_m(t), C_m(t), R_{m1,m2}(t) | realized slot information | [`NetworkSnapshot`] |
//! | z_m | deployment | [`DeploymentDecision`] |
//! | x_{m,s}(t), y_{m,n}(t) | placement and offloading | [`TacticalDecision`] |
//! | Γ^D, Γ^sm, Γ^sp, Γ^sop, Γ^ue, ζ, Γ^Q, Γ^ToT | costs | [`CostBreakdown`] |
//! | T, L | slots per period, periods | [`TimeStructure`] |
//!
//! ```
//! use mec_core::model::*;
//! fn touch(
//!     s: &ServiceSpec, p: &UePair, e: &EsProfile, ch: &ChannelParams, w: &CostWeights,
//!     b: &BudgetConfig, snap: &NetworkSnapshot, z: &DeploymentDecision,
//!     d: &TacticalDecision, c: &CostBreakdown, ts: &TimeStructure,
//! ) -> f64 {
//!     let _ = (s.storage_size, s.local_load, s.core_load, s.local_data_mb, s.remote_data_mb);
//!     let _ = (p.service, p.interaction_frequency, p.tx_power);
//!     let _ = (e.deploy_cost, e.maintain_unit_cost, e.place_unit_cost, e.idle_power, e.max_power);
//!     let _ = (ch.bandwidth_hz, ch.noise_power_w, ch.path_loss_exponent);
//!     let _ = (w.alpha, w.beta_tx, w.eta1, w.eta2, w.eta3, w.cloud_delay);
//!     let _ = (b.deploy_budget, b.energy_budget);
//!     let _ = (&snap.storage_cap, &snap.compute_cap, snap.wired.link(0, 0));
//!     let _ = (z.is_deployed(0), d.placement.get(0, 0), d.src_offload.get(0, 0), d.dst_offload.get(0, 0));
//!     let _ = (c.deploy, c.maintain, c.place, c.operation, c.ue_delay, c.energy, c.tactical, c.total);
//!     (ts.slots_per_period + ts.periods) as f64
//! }
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

/// Position in the plane, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Storage, compute and data-volume profile of one service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceSpec {
    pub id: usize,
    /// u_s, gigabytes.
    pub storage_size: f64,
    /// b_s, normalized to zero: the client module never leaves the device.
    #[serde(default)]
    pub local_load: f64,
    /// c_s, giga-cycles of core computation.
    pub core_load: f64,
    /// d_s, megabytes sent between client and service module.
    pub local_data_mb: f64,
    /// e_s, megabytes exchanged between the two service modules.
    pub remote_data_mb: f64,
}

/// Which end of a UE pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Src,
    Dst,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Src, Side::Dst];

    pub fn index(self) -> usize {
        match self {
            Side::Src => 0,
            Side::Dst => 1,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Src => "src",
            Side::Dst => "dst",
        })
    }
}

/// A source/destination pair of interacting users running one service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UePair {
    pub id: usize,
    pub service: usize,
    pub interaction_frequency: f64,
    pub src_position: Point,
    pub dst_position: Point,
    /// Transmit power of each endpoint, watts.
    pub tx_power: f64,
}

impl UePair {
    pub fn position(&self, side: Side) -> Point {
        match side {
            Side::Src => self.src_position,
            Side::Dst => self.dst_position,
        }
    }
}

/// A base station that may host an edge server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsProfile {
    pub id: usize,
    pub position: Point,
    /// q_m
    pub deploy_cost: f64,
    /// ρ_m, per gigabyte per slot.
    pub maintain_unit_cost: f64,
    /// Per gigabyte, paid once when a service appears on the server.
    pub place_unit_cost: f64,
    pub idle_power: f64,
    pub max_power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub bandwidth_hz: f64,
    /// Noise power over the whole band, watts.
    pub noise_power_w: f64,
    pub path_loss_exponent: f64,
}

impl ChannelParams {
    /// Builds channel parameters from a noise spectral density in dBm/Hz.
    pub fn from_noise_density(bandwidth_hz: f64, noise_dbm_per_hz: f64, path_loss_exponent: f64) -> Self {
        Self {
            bandwidth_hz,
            noise_power_w: noise_power_watts(noise_dbm_per_hz, bandwidth_hz),
            path_loss_exponent,
        }
    }
}

/// Converts a noise density in dBm/Hz into total noise power in watts over `bandwidth_hz`.
pub fn noise_power_watts(noise_dbm_per_hz: f64, bandwidth_hz: f64) -> f64 {
    10f64.powf((noise_dbm_per_hz - 30.0) / 10.0) * bandwidth_hz
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    /// Cost of one second of computation time.
    pub alpha: f64,
    /// Cost of one second of transmission time.
    pub beta_tx: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    /// T_cld: delay cost of one endpoint served from the remote cloud.
    pub cloud_delay: f64,
}

/// Long-term energy budget P_avg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyBudget {
    /// Watts per deployed server; P_avg scales with the deployment.
    PerDeployedServer(f64),
    /// Watts for the whole network regardless of deployment.
    Total(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetConfig {
    /// C_tot
    pub deploy_budget: f64,
    pub energy_budget: EnergyBudget,
}

impl BudgetConfig {
    /// P_avg for the given deployment.
    pub fn energy_budget_for(&self, z: &DeploymentDecision) -> f64 {
        match self.energy_budget {
            EnergyBudget::PerDeployedServer(w) => w * z.count() as f64,
            EnergyBudget::Total(w) => w,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeStructure {
    pub slots_per_period: usize,
    pub periods: usize,
}

/// Parameters of the stochastic information process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDistributions {
    pub storage_mean: f64,
    pub storage_std: f64,
    pub compute_mean: f64,
    pub compute_std: f64,
    pub arena_side: f64,
    /// Std of the per-slot Gaussian step of each coordinate, meters.
    pub mobility_step_std: f64,
    pub seed: u64,
}

/// Solver backend for the single-slot problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SolverBackend {
    Exhaustive,
    #[default]
    Greedy,
}

/// Algorithm knobs carried by a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlParams {
    /// Drift-plus-penalty weight V.
    pub v: f64,
    /// Inverse temperature of the deployment chain.
    pub map_beta: f64,
    /// Transition-rate constant of the deployment chain.
    pub map_alpha: f64,
    pub freeze_info: bool,
    pub solver: SolverBackend,
    pub exhaustive_ceiling: u64,
}

/// Wired link between two base stations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WiredLink {
    /// Both service modules on one server; the exchange is free.
    SameNode,
    /// Capacity in bits per second.
    Capacity(f64),
}

/// Symmetric matrix of wired capacities (bits/s) with a same-node diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WiredCapacity {
    size: usize,
    bps: Vec<f64>,
}

impl WiredCapacity {
    pub fn uniform(size: usize, bps: f64) -> Self {
        let mut bps = vec![bps; size * size];
        for m in 0..size {
            bps[m * size + m] = 0.0;
        }
        Self { size, bps }
    }

    /// Builds from a full row-major matrix; the diagonal is ignored.
    pub fn from_matrix(size: usize, mut bps: Vec<f64>) -> Option<Self> {
        if bps.len() != size * size {
            return None;
        }
        for m in 0..size {
            bps[m * size + m] = 0.0;
        }
        for a in 0..size {
            for b in (a + 1)..size {
                let (ab, ba) = (bps[a * size + b], bps[b * size + a]);
                if ab != ba || !(ab > 0.0) {
                    return None;
                }
            }
        }
        Some(Self { size, bps })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn link(&self, a: usize, b: usize) -> WiredLink {
        if a == b {
            WiredLink::SameNode
        } else {
            WiredLink::Capacity(self.bps[a * self.size + b])
        }
    }
}

/// ω(t) plus the slot's user positions.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSnapshot {
    pub slot: usize,
    /// Φ_m(t), gigabytes.
    pub storage_cap: Vec<f64>,
    /// C_m(t), gigahertz.
    pub compute_cap: Vec<f64>,
    pub wired: WiredCapacity,
    /// `[src, dst]` position of every pair.
    pub ue_positions: Vec<[Point; 2]>,
}

impl NetworkSnapshot {
    pub fn position(&self, pair: usize, side: Side) -> Point {
        self.ue_positions[pair][side.index()]
    }
}

/// Binary deployment vector z.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeploymentDecision(Vec<bool>);

impl DeploymentDecision {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn none(m: usize) -> Self {
        Self(vec![false; m])
    }

    pub fn all(m: usize) -> Self {
        Self(vec![true; m])
    }

    /// Bit `i` of `mask` deploys server `i`.
    pub fn from_mask(mask: u64, m: usize) -> Self {
        Self((0..m).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_deployed(&self, m: usize) -> bool {
        self.0[m]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn deployed(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    /// `"101"` style rendering, server 0 first.
    pub fn bitstring(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn parse_bitstring(s: &str) -> Option<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Self)
    }
}

impl fmt::Display for DeploymentDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.bitstring())
    }
}

/// Dense row-major 0/1 matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    data: Vec<bool>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![false; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.data[r * self.cols + c] = v;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    pub fn column_sum(&self, c: usize) -> usize {
        (0..self.rows).filter(|&r| self.get(r, c)).count()
    }

    pub fn ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i / self.cols, i % self.cols))
    }
}

/// One slot's placement x(t) (servers × services) and offloading
/// y^(s)(t), y^(d)(t) (servers × pairs).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TacticalDecision {
    pub placement: BinaryMatrix,
    pub src_offload: BinaryMatrix,
    pub dst_offload: BinaryMatrix,
}

impl TacticalDecision {
    /// Nothing placed, everyone served by the cloud.
    pub fn all_cloud(servers: usize, services: usize, pairs: usize) -> Self {
        Self {
            placement: BinaryMatrix::zeros(servers, services),
            src_offload: BinaryMatrix::zeros(servers, pairs),
            dst_offload: BinaryMatrix::zeros(servers, pairs),
        }
    }

    /// Builds matrices from a placement and per-endpoint server choices
    /// (`None` = cloud).
    pub fn from_assignment(
        placement: BinaryMatrix,
        src: &[Option<usize>],
        dst: &[Option<usize>],
    ) -> Self {
        let servers = placement.rows();
        let mut src_offload = BinaryMatrix::zeros(servers, src.len());
        let mut dst_offload = BinaryMatrix::zeros(servers, dst.len());
        for (n, m) in src.iter().enumerate() {
            if let Some(m) = *m {
                src_offload.set(m, n, true);
            }
        }
        for (n, m) in dst.iter().enumerate() {
            if let Some(m) = *m {
                dst_offload.set(m, n, true);
            }
        }
        Self { placement, src_offload, dst_offload }
    }

    pub fn offload(&self, side: Side) -> &BinaryMatrix {
        match side {
            Side::Src => &self.src_offload,
            Side::Dst => &self.dst_offload,
        }
    }

    /// Server serving each endpoint of `side`, if exactly one or none is set.
    /// Returns `None` overall when some endpoint is attached to several servers.
    pub fn assignment(&self, side: Side) -> Option<Vec<Option<usize>>> {
        let y = self.offload(side);
        (0..y.cols())
            .map(|n| {
                let mut hit = None;
                for m in 0..y.rows() {
                    if y.get(m, n) {
                        if hit.is_some() {
                            return None;
                        }
                        hit = Some(m);
                    }
                }
                Some(hit)
            })
            .collect()
    }
}

/// Per-component costs of one period, averaged over slots where applicable.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    /// Γ^D
    pub deploy: f64,
    /// Γ^sm
    pub maintain: f64,
    /// Γ^sp
    pub place: f64,
    /// Γ^sop = Γ^sm + Γ^sp
    pub operation: f64,
    /// Γ^ue
    pub ue_delay: f64,
    /// ζ, watts
    pub energy: f64,
    /// Γ^Q = η2·Γ^sop + η3·Γ^ue
    pub tactical: f64,
    /// Γ^ToT = η1·Γ^D + mean Γ^Q
    pub total: f64,
}
