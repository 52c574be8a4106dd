//! Delay, cost, energy and constraint formulas.
//!
//! Everything here is a pure function of its arguments. Solvers, oracles and
//! the experiment harness all evaluate costs through this module.
//!
//! Units: data volumes are configured in megabytes and converted to bits
//! (×8·10⁶) before being divided by bit rates; delays are seconds scaled by
//! `alpha` (computation) or `beta_tx` (transmission).

use serde::Serialize;
use thiserror::Error;

use crate::config::Scenario;
use crate::model::*;

/// Slack below which a resource constraint still counts as satisfied.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

const BITS_PER_MEGABYTE: f64 = 8e6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("co-located UE/BS: zero distance between endpoint and base station")]
    CoLocated,
    #[error("unreachable BS: access rate is zero")]
    Unreachable,
    #[error("compute overload on server {server}: utilization {ratio:.4} > 1")]
    ComputeOverload { server: usize, ratio: f64 },
    #[error("infeasible offloading: {0}")]
    InfeasibleOffloading(String),
    #[error("cannot average tactical cost over an empty slot list")]
    EmptyHorizon,
}

pub fn megabytes_to_bits(mb: f64) -> f64 {
    mb * BITS_PER_MEGABYTE
}

/// Shannon capacity in bits/s of a link of length `distance_m` with gain
/// `distance^-θ`.
pub fn shannon_rate(distance_m: f64, tx_power_w: f64, ch: &ChannelParams) -> Result<f64, CostError> {
    if !(distance_m > 0.0) {
        return Err(CostError::CoLocated);
    }
    let gain = distance_m.powf(-ch.path_loss_exponent);
    Ok(ch.bandwidth_hz * (1.0 + tx_power_w * gain / ch.noise_power_w).log2())
}

/// Rate between one endpoint of `pair` and base station `server` at the
/// snapshot's positions.
pub fn access_rate(
    scenario: &Scenario,
    snapshot: &NetworkSnapshot,
    pair: usize,
    side: Side,
    server: usize,
) -> Result<f64, CostError> {
    let d = snapshot.position(pair, side).distance(&scenario.servers()[server].position);
    shannon_rate(d, scenario.pairs()[pair].tx_power, scenario.channel())
}

/// `c·α / C`.
pub fn compute_delay_cost(core_load: f64, compute_cap: f64, weights: &CostWeights) -> f64 {
    debug_assert!(compute_cap > 0.0);
    core_load * weights.alpha / compute_cap
}

/// `β·d / R` with `d` in megabytes and `R` in bits/s.
pub fn access_delay_cost(data_mb: f64, rate_bps: f64, weights: &CostWeights) -> Result<f64, CostError> {
    if !(rate_bps > 0.0) {
        return Err(CostError::Unreachable);
    }
    Ok(weights.beta_tx * megabytes_to_bits(data_mb) / rate_bps)
}

/// `β·e / R_{m1,m2}`; zero on the same node.
pub fn exchange_delay_cost(remote_mb: f64, link: WiredLink, weights: &CostWeights) -> f64 {
    match link {
        WiredLink::SameNode => 0.0,
        WiredLink::Capacity(bps) => weights.beta_tx * megabytes_to_bits(remote_mb) / bps,
    }
}

/// Computation delay cost of one endpoint of `pair` on `server`.
pub fn pair_compute_delay(scenario: &Scenario, snapshot: &NetworkSnapshot, pair: usize, server: usize) -> f64 {
    compute_delay_cost(scenario.pair_service(pair).core_load, snapshot.compute_cap[server], scenario.weights())
}

/// Transmission delay cost of one endpoint of `pair` to `server`.
pub fn pair_access_delay(
    scenario: &Scenario,
    snapshot: &NetworkSnapshot,
    pair: usize,
    side: Side,
    server: usize,
) -> Result<f64, CostError> {
    let rate = access_rate(scenario, snapshot, pair, side, server)?;
    access_delay_cost(scenario.pair_service(pair).local_data_mb, rate, scenario.weights())
}

/// Remote-data exchange cost of `pair` between two servers.
pub fn pair_exchange_delay(scenario: &Scenario, snapshot: &NetworkSnapshot, pair: usize, a: usize, b: usize) -> f64 {
    exchange_delay_cost(scenario.pair_service(pair).remote_data_mb, snapshot.wired.link(a, b), scenario.weights())
}

/// Checks that every endpoint is attached to at most one server.
pub fn check_connection(decision: &TacticalDecision) -> Vec<(usize, Side)> {
    let mut bad = Vec::new();
    for side in Side::BOTH {
        let y = decision.offload(side);
        for n in 0..y.cols() {
            if y.column_sum(n) > 1 {
                bad.push((n, side));
            }
        }
    }
    bad
}

/// Total UE delay cost: access and compute terms of both endpoints, the
/// exchange term between their servers and the cloud term for every endpoint
/// not served at the edge, each weighted by the pair's interaction frequency.
pub fn ue_delay_cost(
    decision: &TacticalDecision,
    snapshot: &NetworkSnapshot,
    scenario: &Scenario,
) -> Result<f64, CostError> {
    let bad = check_connection(decision);
    if !bad.is_empty() {
        let list: Vec<String> = bad.iter().map(|(n, s)| format!("pair {n} {s} attached to several servers")).collect();
        return Err(CostError::InfeasibleOffloading(list.join("; ")));
    }
    let (ys, yd) = (&decision.src_offload, &decision.dst_offload);
    let m_count = ys.rows();
    let t_cld = scenario.weights().cloud_delay;
    let mut total = 0.0;
    for (n, pair) in scenario.pairs().iter().enumerate() {
        let f = pair.interaction_frequency;
        let mut src_edge = 0.0;
        let mut dst_edge = 0.0;
        let mut exchange = 0.0;
        for m1 in 0..m_count {
            if ys.get(m1, n) {
                let t = pair_access_delay(scenario, snapshot, n, Side::Src, m1)?;
                src_edge += t + pair_compute_delay(scenario, snapshot, n, m1);
            }
            if yd.get(m1, n) {
                let t = pair_access_delay(scenario, snapshot, n, Side::Dst, m1)?;
                dst_edge += t + pair_compute_delay(scenario, snapshot, n, m1);
            }
        }
        for m1 in 0..m_count {
            for m2 in 0..m_count {
                if ys.get(m1, n) && yd.get(m2, n) {
                    exchange += pair_exchange_delay(scenario, snapshot, n, m1, m2);
                }
            }
        }
        let unserved = (1 - ys.column_sum(n) as i64 + 1 - yd.column_sum(n) as i64) as f64;
        total += (src_edge + dst_edge + exchange) * f + unserved * t_cld * f;
    }
    Ok(total)
}

/// Γ^sm: per-slot upkeep of every placed service.
pub fn maintenance_cost(placement: &BinaryMatrix, scenario: &Scenario) -> f64 {
    placement
        .ones()
        .map(|(m, s)| scenario.servers()[m].maintain_unit_cost * scenario.services()[s].storage_size)
        .sum()
}

/// Γ^sp: one-off cost of services that appear since the previous slot.
pub fn placement_cost(placement: &BinaryMatrix, previous: &BinaryMatrix, scenario: &Scenario) -> f64 {
    let mut total = 0.0;
    for (m, server) in scenario.servers().iter().enumerate() {
        for (s, svc) in scenario.services().iter().enumerate() {
            let added = (placement.get(m, s) as i32 - previous.get(m, s) as i32).max(0) as f64;
            total += server.place_unit_cost * added * svc.storage_size;
        }
    }
    total
}

/// Γ^sop = Γ^sm + Γ^sp.
pub fn operation_cost(placement: &BinaryMatrix, previous: &BinaryMatrix, scenario: &Scenario) -> f64 {
    maintenance_cost(placement, scenario) + placement_cost(placement, previous, scenario)
}

/// Γ^D
pub fn deployment_cost(z: &DeploymentDecision, scenario: &Scenario) -> f64 {
    z.deployed().map(|m| scenario.servers()[m].deploy_cost).sum()
}

/// Utilization `Σ_s x_{m,s} c_s / C_m(t)` of server `m`.
pub fn utilization(placement: &BinaryMatrix, snapshot: &NetworkSnapshot, scenario: &Scenario, m: usize) -> f64 {
    let load: f64 = (0..placement.cols())
        .filter(|&s| placement.get(m, s))
        .map(|s| scenario.services()[s].core_load)
        .sum();
    load / snapshot.compute_cap[m]
}

/// ζ(t): idle plus utilization-proportional power of every deployed server.
pub fn energy(
    placement: &BinaryMatrix,
    z: &DeploymentDecision,
    snapshot: &NetworkSnapshot,
    scenario: &Scenario,
) -> Result<f64, CostError> {
    let mut total = 0.0;
    for m in z.deployed() {
        let es = &scenario.servers()[m];
        let ratio = utilization(placement, snapshot, scenario, m);
        if ratio > 1.0 + FEASIBILITY_TOLERANCE {
            return Err(CostError::ComputeOverload { server: m, ratio });
        }
        total += es.idle_power + (es.max_power - es.idle_power) * ratio;
    }
    Ok(total)
}

/// Cost components of a single slot.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SlotCost {
    pub maintain: f64,
    pub place: f64,
    pub operation: f64,
    pub ue_delay: f64,
    /// Γ^Q(t)
    pub tactical: f64,
    /// ζ(t)
    pub energy: f64,
}

/// Γ^Q = η2·Γ^sop + η3·Γ^ue.
pub fn tactical_cost(
    decision: &TacticalDecision,
    previous: &BinaryMatrix,
    snapshot: &NetworkSnapshot,
    scenario: &Scenario,
) -> Result<f64, CostError> {
    let w = scenario.weights();
    let sop = operation_cost(&decision.placement, previous, scenario);
    let ue = ue_delay_cost(decision, snapshot, scenario)?;
    Ok(w.eta2 * sop + w.eta3 * ue)
}

/// All components of one slot, including energy.
pub fn slot_cost(
    z: &DeploymentDecision,
    decision: &TacticalDecision,
    previous: &BinaryMatrix,
    snapshot: &NetworkSnapshot,
    scenario: &Scenario,
) -> Result<SlotCost, CostError> {
    let w = scenario.weights();
    let maintain = maintenance_cost(&decision.placement, scenario);
    let place = placement_cost(&decision.placement, previous, scenario);
    let ue_delay = ue_delay_cost(decision, snapshot, scenario)?;
    let energy = energy(&decision.placement, z, snapshot, scenario)?;
    let operation = maintain + place;
    Ok(SlotCost { maintain, place, operation, ue_delay, tactical: w.eta2 * operation + w.eta3 * ue_delay, energy })
}

/// Γ^ToT = η1·Γ^D + (1/T)·Σ_t Γ^Q(t).
pub fn total_cost(z: &DeploymentDecision, per_slot_tactical: &[f64], scenario: &Scenario) -> Result<f64, CostError> {
    if per_slot_tactical.is_empty() {
        return Err(CostError::EmptyHorizon);
    }
    let mean = per_slot_tactical.iter().sum::<f64>() / per_slot_tactical.len() as f64;
    Ok(scenario.weights().eta1 * deployment_cost(z, scenario) + mean)
}

/// Period breakdown from per-slot costs.
pub fn breakdown(z: &DeploymentDecision, slots: &[SlotCost], scenario: &Scenario) -> Result<CostBreakdown, CostError> {
    if slots.is_empty() {
        return Err(CostError::EmptyHorizon);
    }
    let k = slots.len() as f64;
    let mean = |f: fn(&SlotCost) -> f64| slots.iter().map(f).sum::<f64>() / k;
    let deploy = deployment_cost(z, scenario);
    let tactical = mean(|s| s.tactical);
    Ok(CostBreakdown {
        deploy,
        maintain: mean(|s| s.maintain),
        place: mean(|s| s.place),
        operation: mean(|s| s.operation),
        ue_delay: mean(|s| s.ue_delay),
        energy: mean(|s| s.energy),
        tactical,
        total: scenario.weights().eta1 * deploy + tactical,
    })
}

/// Per-constraint outcome of a joint decision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport {
    /// Endpoints attached to more than one server.
    pub connection_violations: Vec<(usize, Side)>,
    /// Φ_m(t) − Σ_s x u_s per server.
    pub storage_slack: Vec<f64>,
    /// C_m(t) − Σ_n f_n (y^s + y^d) c_n per server.
    pub compute_slack: Vec<f64>,
    /// (server, pair, side) offloaded without the pair's service placed.
    pub service_violations: Vec<(usize, usize, Side)>,
    /// (server, service) placed on an undeployed server.
    pub server_violations: Vec<(usize, usize)>,
    /// C_tot − Σ q_m z_m
    pub budget_slack: f64,
}

impl ConstraintReport {
    pub fn connection_ok(&self) -> bool {
        self.connection_violations.is_empty()
    }
    pub fn storage_ok(&self) -> bool {
        self.storage_slack.iter().all(|&s| s >= -FEASIBILITY_TOLERANCE)
    }
    pub fn compute_ok(&self) -> bool {
        self.compute_slack.iter().all(|&s| s >= -FEASIBILITY_TOLERANCE)
    }
    pub fn service_ok(&self) -> bool {
        self.service_violations.is_empty()
    }
    pub fn server_ok(&self) -> bool {
        self.server_violations.is_empty()
    }
    pub fn budget_ok(&self) -> bool {
        self.budget_slack >= -FEASIBILITY_TOLERANCE
    }

    /// Connection, storage, compute, service and server constraints.
    pub fn tactical_feasible(&self) -> bool {
        self.connection_ok() && self.storage_ok() && self.compute_ok() && self.service_ok() && self.server_ok()
    }

    pub fn feasible(&self) -> bool {
        self.tactical_feasible() && self.budget_ok()
    }
}

pub fn check_constraints(
    z: &DeploymentDecision,
    decision: &TacticalDecision,
    snapshot: &NetworkSnapshot,
    scenario: &Scenario,
) -> ConstraintReport {
    let x = &decision.placement;
    let m_count = scenario.server_count();
    let mut storage_slack = Vec::with_capacity(m_count);
    let mut compute_slack = Vec::with_capacity(m_count);
    let mut service_violations = Vec::new();
    let mut server_violations = Vec::new();

    for m in 0..m_count {
        let used: f64 = scenario
            .services()
            .iter()
            .enumerate()
            .filter(|(s, _)| x.get(m, *s))
            .map(|(_, svc)| svc.storage_size)
            .sum();
        storage_slack.push(snapshot.storage_cap[m] - used);

        let mut load = 0.0;
        for (n, pair) in scenario.pairs().iter().enumerate() {
            let both = decision.src_offload.get(m, n) as u8 + decision.dst_offload.get(m, n) as u8;
            load += pair.interaction_frequency * both as f64 * scenario.pair_service(n).core_load;
            for side in Side::BOTH {
                if decision.offload(side).get(m, n) && !x.get(m, pair.service) {
                    service_violations.push((m, n, side));
                }
            }
        }
        compute_slack.push(snapshot.compute_cap[m] - load);

        if !z.is_deployed(m) {
            for s in 0..scenario.service_count() {
                if x.get(m, s) {
                    server_violations.push((m, s));
                }
            }
        }
    }

    ConstraintReport {
        connection_violations: check_connection(decision),
        storage_slack,
        compute_slack,
        service_violations,
        server_violations,
        budget_slack: scenario.budget().deploy_budget - deployment_cost(z, scenario),
    }
}
