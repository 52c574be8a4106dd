//! Tactical layer: the energy virtual queue and the per-slot
//! drift-plus-penalty problem.
//!
//! Every slot the controller observes the snapshot, picks the placement and
//! offloading minimizing `Θ·(ζ − P_avg) + V·Γ^Q`, and then updates the queue
//! `Θ ← max(Θ + ζ − P_avg, 0)`. Large `V` favors low tactical cost; the queue
//! pushes the long-run average energy towards `P_avg`.
//!
//! Two backends solve the single-slot problem:
//!
//! * [`solve_exhaustive`] enumerates every placement on deployed servers and
//!   every endpoint assignment. Exact, exponential; bounded by a ceiling.
//! * [`solve_greedy`] places services by marginal objective reduction per
//!   gigabyte, assigns pairs in descending `f·c` order, runs one reassignment
//!   sweep, drops unused placements and finally keeps the better of that and
//!   all-cloud.
//!
//! Both treat a placement whose summed core load exceeds the server's compute
//! capacity as infeasible, because its energy term is undefined.

use std::io::Write;

use serde::Serialize;

use crate::config::Scenario;
use crate::cost::{self, CostError, FEASIBILITY_TOLERANCE};
use crate::error::{Error, Result};
use crate::model::*;
use crate::output::fmt_g;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpcoParams {
    pub v: f64,
    pub backend: SolverBackend,
    /// Largest candidate count the exhaustive backend may enumerate.
    pub exhaustive_ceiling: u64,
}

impl SpcoParams {
    pub fn new(v: f64, backend: SolverBackend) -> Self {
        Self { v, backend, exhaustive_ceiling: 10_000_000 }
    }

    pub fn from_control(c: &ControlParams) -> Self {
        Self { v: c.v, backend: c.solver, exhaustive_ceiling: c.exhaustive_ceiling }
    }

    pub fn with_v(self, v: f64) -> Self {
        Self { v, ..self }
    }
}

/// `B = ½·max(P_avg, ζ_max − P_avg)²`, an upper bound on `½(ζ − P_avg)²`.
pub fn drift_bound(z: &DeploymentDecision, scenario: &Scenario) -> f64 {
    let p_avg = scenario.budget().energy_budget_for(z);
    let zeta_max: f64 = z.deployed().map(|m| scenario.servers()[m].max_power).sum();
    0.5 * p_avg.max(zeta_max - p_avg).powi(2)
}

pub fn update_queue(backlog: f64, energy: f64, energy_budget: f64) -> f64 {
    (backlog + energy - energy_budget).max(0.0)
}

/// Energy deficit queue with its per-slot history.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct QueueState {
    pub backlog: f64,
    /// `(Θ(t), ζ(t))` for every processed slot.
    pub history: Vec<(f64, f64)>,
}

impl QueueState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, energy: f64, energy_budget: f64) {
        self.history.push((self.backlog, energy));
        self.backlog = update_queue(self.backlog, energy, energy_budget);
    }
}

/// `Θ·(ζ − P_avg) + V·Γ^Q` for one candidate decision.
pub fn p3_objective(
    decision: &TacticalDecision,
    previous: &BinaryMatrix,
    snapshot: &NetworkSnapshot,
    backlog: f64,
    v: f64,
    z: &DeploymentDecision,
    scenario: &Scenario,
) -> Result<f64, CostError> {
    let zeta = cost::energy(&decision.placement, z, snapshot, scenario)?;
    let gq = cost::tactical_cost(decision, previous, snapshot, scenario)?;
    let p_avg = scenario.budget().energy_budget_for(z);
    Ok(backlog * (zeta - p_avg) + v * gq)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub decision: TacticalDecision,
    pub objective: f64,
}

/// Per-slot lookup tables shared by both backends. Delay terms are already
/// weighted by the pair's interaction frequency; unreachable links are infinite.
struct SlotTables {
    m: usize,
    /// `[(2n + side)·M + m]`: access plus compute delay.
    edge: Vec<f64>,
    /// `[n·M² + a·M + b]`: exchange delay between the two service modules.
    exch: Vec<f64>,
    /// Per pair: cloud delay of one endpoint.
    cloud: Vec<f64>,
    /// Per pair: compute demand `f·c` of one endpoint.
    demand: Vec<f64>,
}

impl SlotTables {
    fn new(snapshot: &NetworkSnapshot, scenario: &Scenario) -> Self {
        let m = scenario.server_count();
        let n_pairs = scenario.pair_count();
        let t_cld = scenario.weights().cloud_delay;
        let mut edge = vec![f64::INFINITY; 2 * n_pairs * m];
        let mut exch = vec![0.0; n_pairs * m * m];
        let mut cloud = Vec::with_capacity(n_pairs);
        let mut demand = Vec::with_capacity(n_pairs);
        for (n, pair) in scenario.pairs().iter().enumerate() {
            let f = pair.interaction_frequency;
            for side in Side::BOTH {
                for mm in 0..m {
                    if let Ok(access) = cost::pair_access_delay(scenario, snapshot, n, side, mm) {
                        let compute = cost::pair_compute_delay(scenario, snapshot, n, mm);
                        edge[(2 * n + side.index()) * m + mm] = f * (access + compute);
                    }
                }
            }
            for a in 0..m {
                for b in 0..m {
                    exch[n * m * m + a * m + b] = f * cost::pair_exchange_delay(scenario, snapshot, n, a, b);
                }
            }
            cloud.push(f * t_cld);
            demand.push(f * scenario.pair_service(n).core_load);
        }
        Self { m, edge, exch, cloud, demand }
    }

    #[inline]
    fn endpoint(&self, n: usize, side: usize, at: Option<usize>) -> f64 {
        match at {
            None => self.cloud[n],
            Some(m) => self.edge[(2 * n + side) * self.m + m],
        }
    }

    #[inline]
    fn exchange(&self, n: usize, a: usize, b: usize) -> f64 {
        self.exch[n * self.m * self.m + a * self.m + b]
    }

    /// Delay cost of pair `n` with its endpoints at `a` and `b`.
    #[inline]
    fn pair(&self, n: usize, a: Option<usize>, b: Option<usize>) -> f64 {
        let ex = match (a, b) {
            (Some(a), Some(b)) => self.exchange(n, a, b),
            _ => 0.0,
        };
        self.endpoint(n, 0, a) + self.endpoint(n, 1, b) + ex
    }
}

/// Placement-dependent parts of the objective for one server/service cell.
struct CellCosts {
    /// `V·η2·(ρ·u + θ·u·[not previously placed])`
    operation: f64,
    /// `Θ·(P_max − P_idle)·c / C`
    energy: f64,
}

fn cell_costs(
    m: usize,
    s: usize,
    previous: &BinaryMatrix,
    snapshot: &NetworkSnapshot,
    backlog: f64,
    v: f64,
    scenario: &Scenario,
) -> CellCosts {
    let es = &scenario.servers()[m];
    let svc = &scenario.services()[s];
    let fresh = if previous.get(m, s) { 0.0 } else { 1.0 };
    let operation = v * scenario.weights().eta2 * svc.storage_size * (es.maintain_unit_cost + es.place_unit_cost * fresh);
    let energy = backlog * (es.max_power - es.idle_power) * svc.core_load / snapshot.compute_cap[m];
    CellCosts { operation, energy }
}

/// Constant part of the objective: `Θ·(Σ_deployed P_idle − P_avg)`.
fn base_objective(z: &DeploymentDecision, backlog: f64, scenario: &Scenario) -> f64 {
    let idle: f64 = z.deployed().map(|m| scenario.servers()[m].idle_power).sum();
    backlog * (idle - scenario.budget().energy_budget_for(z))
}

fn fits(used: f64, add: f64, cap: f64) -> bool {
    used + add <= cap + FEASIBILITY_TOLERANCE
}

/// Exhaustive candidate count bound `2^{d·S}·(d+1)^{2N}` for `d` deployed servers.
pub fn exhaustive_candidates(z: &DeploymentDecision, scenario: &Scenario) -> f64 {
    let d = z.count() as f64;
    2f64.powf(d * scenario.service_count() as f64) * (d + 1.0).powf(2.0 * scenario.pair_count() as f64)
}

fn strictly_better(candidate: f64, incumbent: f64) -> bool {
    if !incumbent.is_finite() {
        return candidate < incumbent;
    }
    candidate < incumbent - 1e-12 * incumbent.abs().max(1.0)
}

struct Search<'a> {
    tables: &'a SlotTables,
    pair_service: Vec<usize>,
    placed: Vec<bool>,
    services: usize,
    cap: Vec<f64>,
    choice: Vec<usize>,
    weight: f64,
    fixed: f64,
    best: f64,
    best_choice: Vec<usize>,
    best_placed: Vec<bool>,
}

impl Search<'_> {
    /// Depth-first over endpoints `e = 2n + side`; value 0 is the cloud, `m + 1` server `m`.
    fn descend(&mut self, e: usize, acc: f64) {
        if e == self.choice.len() {
            let total = self.fixed + self.weight * acc;
            if strictly_better(total, self.best) {
                self.best = total;
                self.best_choice.clone_from(&self.choice);
                self.best_placed.clone_from(&self.placed);
            }
            return;
        }
        let n = e / 2;
        let side = e % 2;
        let t = self.tables;
        let m_count = t.m;
        for value in 0..=m_count {
            let at = value.checked_sub(1);
            let mut term = t.endpoint(n, side, at);
            if let Some(m) = at {
                if !self.placed[m * self.services + self.pair_service[n]]
                    || !term.is_finite()
                    || !fits(0.0, t.demand[n], self.cap[m])
                {
                    continue;
                }
                if side == 1 {
                    if let Some(a) = self.choice[e - 1].checked_sub(1) {
                        term += t.exchange(n, a, m);
                    }
                }
                self.cap[m] -= t.demand[n];
            }
            self.choice[e] = value;
            self.descend(e + 1, acc + term);
            if let Some(m) = at {
                self.cap[m] += t.demand[n];
            }
        }
    }
}

/// Exact minimizer over all feasible decisions. Ties go to the
/// lexicographically smallest encoding: placement bits in row-major
/// (server, service) order, then per endpoint (src 0, dst 0, src 1, …) the
/// value 0 for the cloud or `m + 1` for server `m`.
pub fn solve_exhaustive(
    snapshot: &NetworkSnapshot,
    previous: &BinaryMatrix,
    backlog: f64,
    z: &DeploymentDecision,
    params: &SpcoParams,
    scenario: &Scenario,
) -> Result<Solution> {
    let candidates = exhaustive_candidates(z, scenario);
    if candidates > params.exhaustive_ceiling as f64 {
        return Err(Error::SearchTooLarge { candidates, ceiling: params.exhaustive_ceiling });
    }
    let (m_count, s_count, n_count) = (scenario.server_count(), scenario.service_count(), scenario.pair_count());
    let tables = SlotTables::new(snapshot, scenario);
    let cells: Vec<(usize, usize)> = z.deployed().flat_map(|m| (0..s_count).map(move |s| (m, s))).collect();
    let costs: Vec<CellCosts> =
        cells.iter().map(|&(m, s)| cell_costs(m, s, previous, snapshot, backlog, params.v, scenario)).collect();
    let base = base_objective(z, backlog, scenario);
    let k = cells.len();

    let mut search = Search {
        tables: &tables,
        pair_service: scenario.pairs().iter().map(|p| p.service).collect(),
        placed: vec![false; m_count * s_count],
        services: s_count,
        cap: vec![0.0; m_count],
        choice: vec![0; 2 * n_count],
        weight: params.v * scenario.weights().eta3,
        fixed: 0.0,
        best: f64::INFINITY,
        best_choice: vec![0; 2 * n_count],
        best_placed: vec![false; m_count * s_count],
    };

    for mask in 0u64..(1u64 << k) {
        search.placed.iter_mut().for_each(|p| *p = false);
        let mut storage = vec![0.0; m_count];
        let mut load = vec![0.0; m_count];
        let mut fixed = base;
        let mut ok = true;
        for (i, &(m, s)) in cells.iter().enumerate() {
            if mask >> (k - 1 - i) & 1 == 1 {
                let svc = &scenario.services()[s];
                storage[m] += svc.storage_size;
                load[m] += svc.core_load;
                if storage[m] > snapshot.storage_cap[m] + FEASIBILITY_TOLERANCE
                    || load[m] > snapshot.compute_cap[m] + FEASIBILITY_TOLERANCE
                {
                    ok = false;
                    break;
                }
                search.placed[m * s_count + s] = true;
                fixed += costs[i].operation + costs[i].energy;
            }
        }
        if !ok {
            continue;
        }
        search.fixed = fixed;
        search.cap.copy_from_slice(&snapshot.compute_cap);
        search.descend(0, 0.0);
    }

    let mut placement = BinaryMatrix::zeros(m_count, s_count);
    for (i, &p) in search.best_placed.iter().enumerate() {
        placement.set(i / s_count, i % s_count, p);
    }
    let at = |v: usize| v.checked_sub(1);
    let src: Vec<_> = (0..n_count).map(|n| at(search.best_choice[2 * n])).collect();
    let dst: Vec<_> = (0..n_count).map(|n| at(search.best_choice[2 * n + 1])).collect();
    let decision = TacticalDecision::from_assignment(placement, &src, &dst);
    let objective = p3_objective(&decision, previous, snapshot, backlog, params.v, z, scenario)?;
    Ok(Solution { decision, objective })
}

struct Greedy<'a> {
    tables: &'a SlotTables,
    scenario: &'a Scenario,
    snapshot: &'a NetworkSnapshot,
    s_count: usize,
    placed: Vec<bool>,
    /// Servers holding each service, ascending.
    holders: Vec<Vec<usize>>,
    /// Pairs of each service.
    users: Vec<Vec<usize>>,
}

impl Greedy<'_> {
    fn allowed(&self, n: usize) -> &[usize] {
        &self.holders[self.scenario.pairs()[n].service]
    }

    /// Cheapest pair cost over the current holders, ignoring compute capacity.
    fn best_uncapacitated(&self, n: usize) -> f64 {
        let t = self.tables;
        let mut best = t.pair(n, None, None);
        let opts = self.allowed(n);
        for &a in opts {
            best = best.min(t.pair(n, Some(a), None)).min(t.pair(n, None, Some(a)));
            for &b in opts {
                best = best.min(t.pair(n, Some(a), Some(b)));
            }
        }
        best
    }

    /// Cheapest cost of pair `n` if server `m` also held its service.
    fn best_with(&self, n: usize, m: usize, current: f64) -> f64 {
        let t = self.tables;
        let mut best = current.min(t.pair(n, Some(m), None)).min(t.pair(n, None, Some(m)));
        best = best.min(t.pair(n, Some(m), Some(m)));
        for &b in self.allowed(n) {
            best = best.min(t.pair(n, Some(m), Some(b))).min(t.pair(n, Some(b), Some(m)));
        }
        best
    }

    /// Best capacity-feasible endpoint pair for `n`; `cap` is remaining compute.
    fn assign(&self, n: usize, cap: &[f64]) -> (Option<usize>, Option<usize>) {
        let t = self.tables;
        let d = t.demand[n];
        let opts = self.allowed(n);
        let mut best = (None, None);
        let mut best_cost = t.pair(n, None, None);
        let mut consider = |a: Option<usize>, b: Option<usize>| {
            let c = t.pair(n, a, b);
            if c < best_cost {
                best_cost = c;
                best = (a, b);
            }
        };
        for &b in opts {
            if fits(0.0, d, cap[b]) {
                consider(None, Some(b));
            }
        }
        for &a in opts {
            if !fits(0.0, d, cap[a]) {
                continue;
            }
            consider(Some(a), None);
            for &b in opts {
                let need_b = if a == b { 2.0 * d } else { d };
                if fits(0.0, need_b, cap[b]) {
                    consider(Some(a), Some(b));
                }
            }
        }
        best
    }

    fn place(&mut self, m: usize, s: usize) {
        self.placed[m * self.s_count + s] = true;
        let h = &mut self.holders[s];
        let pos = h.partition_point(|&x| x < m);
        h.insert(pos, m);
    }

    fn remove(&mut self, m: usize, s: usize) {
        self.placed[m * self.s_count + s] = false;
        self.holders[s].retain(|&x| x != m);
    }
}

/// Heuristic single-slot solver; always returns a feasible decision.
pub fn solve_greedy(
    snapshot: &NetworkSnapshot,
    previous: &BinaryMatrix,
    backlog: f64,
    z: &DeploymentDecision,
    params: &SpcoParams,
    scenario: &Scenario,
) -> Result<Solution> {
    let (m_count, s_count, n_count) = (scenario.server_count(), scenario.service_count(), scenario.pair_count());
    let all_cloud = TacticalDecision::all_cloud(m_count, s_count, n_count);
    let cloud_objective = p3_objective(&all_cloud, previous, snapshot, backlog, params.v, z, scenario)?;
    if z.count() == 0 {
        return Ok(Solution { decision: all_cloud, objective: cloud_objective });
    }

    let tables = SlotTables::new(snapshot, scenario);
    let mut users = vec![Vec::new(); s_count];
    for (n, p) in scenario.pairs().iter().enumerate() {
        users[p.service].push(n);
    }
    let mut g = Greedy {
        tables: &tables,
        scenario,
        snapshot,
        s_count,
        placed: vec![false; m_count * s_count],
        holders: vec![Vec::new(); s_count],
        users,
    };
    let w3 = params.v * scenario.weights().eta3;

    // Phase 1: placement by marginal objective reduction per gigabyte.
    let mut current: Vec<f64> = (0..n_count).map(|n| g.best_uncapacitated(n)).collect();
    let mut storage = vec![0.0; m_count];
    let mut load = vec![0.0; m_count];
    let cell_cost: Vec<f64> = (0..m_count * s_count)
        .map(|i| {
            let c = cell_costs(i / s_count, i % s_count, previous, snapshot, backlog, params.v, scenario);
            c.operation + c.energy
        })
        .collect();
    let gain_of = |g: &Greedy, current: &[f64], m: usize, s: usize| -> f64 {
        g.users[s].iter().map(|&n| current[n] - g.best_with(n, m, current[n])).sum::<f64>() * w3
    };
    let mut gains = vec![f64::NAN; m_count * s_count];
    let mut dirty = vec![true; s_count];
    loop {
        let mut pick: Option<(usize, usize, f64)> = None;
        for m in z.deployed() {
            for s in 0..s_count {
                let i = m * s_count + s;
                if g.placed[i] {
                    continue;
                }
                let svc = &scenario.services()[s];
                if !fits(storage[m], svc.storage_size, g.snapshot.storage_cap[m])
                    || !fits(load[m], svc.core_load, g.snapshot.compute_cap[m])
                {
                    continue;
                }
                if dirty[s] || gains[i].is_nan() {
                    gains[i] = gain_of(&g, &current, m, s);
                }
                let net = gains[i] - cell_cost[i];
                if net <= 1e-12 {
                    continue;
                }
                let score = net / svc.storage_size;
                if pick.is_none_or(|(_, _, best)| score > best) {
                    pick = Some((m, s, score));
                }
            }
        }
        dirty.iter_mut().for_each(|d| *d = false);
        let Some((m, s, _)) = pick else { break };
        let svc = &scenario.services()[s];
        storage[m] += svc.storage_size;
        load[m] += svc.core_load;
        g.place(m, s);
        for &n in &g.users[s] {
            current[n] = g.best_with(n, m, current[n]);
        }
        dirty[s] = true;
        for mm in 0..m_count {
            gains[mm * s_count + s] = f64::NAN;
        }
    }

    // Phase 2: assignment in descending f·c order under compute capacity.
    let mut order: Vec<usize> = (0..n_count).collect();
    order.sort_by(|&a, &b| tables.demand[b].total_cmp(&tables.demand[a]));
    let mut cap = snapshot.compute_cap.clone();
    let mut assignment = vec![(None, None); n_count];
    let charge = |cap: &mut [f64], (a, b): (Option<usize>, Option<usize>), d: f64, sign: f64| {
        for m in [a, b].into_iter().flatten() {
            cap[m] -= sign * d;
        }
    };
    for &n in &order {
        let pick = g.assign(n, &cap);
        charge(&mut cap, pick, tables.demand[n], 1.0);
        assignment[n] = pick;
    }

    // Phase 3: one reassignment sweep.
    for &n in &order {
        charge(&mut cap, assignment[n], tables.demand[n], -1.0);
        let pick = g.assign(n, &cap);
        charge(&mut cap, pick, tables.demand[n], 1.0);
        assignment[n] = pick;
    }

    // Phase 4: drop placements nobody uses.
    let mut used = vec![false; m_count * s_count];
    for (n, &(a, b)) in assignment.iter().enumerate() {
        let s = scenario.pairs()[n].service;
        for m in [a, b].into_iter().flatten() {
            used[m * s_count + s] = true;
        }
    }
    for m in 0..m_count {
        for s in 0..s_count {
            if g.placed[m * s_count + s] && !used[m * s_count + s] {
                g.remove(m, s);
            }
        }
    }

    let mut placement = BinaryMatrix::zeros(m_count, s_count);
    for (i, &p) in g.placed.iter().enumerate() {
        placement.set(i / s_count, i % s_count, p);
    }
    let src: Vec<_> = assignment.iter().map(|p| p.0).collect();
    let dst: Vec<_> = assignment.iter().map(|p| p.1).collect();
    let decision = TacticalDecision::from_assignment(placement, &src, &dst);
    let objective = p3_objective(&decision, previous, snapshot, backlog, params.v, z, scenario)?;
    if objective <= cloud_objective {
        Ok(Solution { decision, objective })
    } else {
        Ok(Solution { decision: all_cloud, objective: cloud_objective })
    }
}

pub fn solve(
    snapshot: &NetworkSnapshot,
    previous: &BinaryMatrix,
    backlog: f64,
    z: &DeploymentDecision,
    params: &SpcoParams,
    scenario: &Scenario,
) -> Result<Solution> {
    match params.backend {
        SolverBackend::Exhaustive => solve_exhaustive(snapshot, previous, backlog, z, params, scenario),
        SolverBackend::Greedy => solve_greedy(snapshot, previous, backlog, z, params, scenario),
    }
}

/// Outcome of one slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlotRecord {
    pub t: usize,
    /// Θ(t), before the update.
    pub backlog: f64,
    pub energy: f64,
    pub operation: f64,
    pub ue_delay: f64,
    /// Q*(t) = Γ^Q of the chosen decision.
    pub tactical: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpcoRun {
    pub slots: Vec<SlotRecord>,
    pub decisions: Vec<TacticalDecision>,
    /// Time average of Q*(t).
    pub estimate: f64,
    pub queue: QueueState,
    pub drift_bound: f64,
    pub energy_budget: f64,
}

impl SpcoRun {
    fn mean(&self, f: impl Fn(&SlotRecord) -> f64) -> f64 {
        self.slots.iter().map(f).sum::<f64>() / self.slots.len() as f64
    }

    pub fn mean_energy(&self) -> f64 {
        self.mean(|s| s.energy)
    }

    pub fn mean_backlog(&self) -> f64 {
        self.mean(|s| s.backlog)
    }

    pub fn mean_operation(&self) -> f64 {
        self.mean(|s| s.operation)
    }

    pub fn mean_ue_delay(&self) -> f64 {
        self.mean(|s| s.ue_delay)
    }

    pub fn breakdown(&self, z: &DeploymentDecision, scenario: &Scenario) -> CostBreakdown {
        let w = scenario.weights();
        let deploy = cost::deployment_cost(z, scenario);
        let maintain = self
            .decisions
            .iter()
            .map(|d| cost::maintenance_cost(&d.placement, scenario))
            .sum::<f64>()
            / self.decisions.len() as f64;
        let operation = self.mean_operation();
        CostBreakdown {
            deploy,
            maintain,
            place: operation - maintain,
            operation,
            ue_delay: self.mean_ue_delay(),
            energy: self.mean_energy(),
            tactical: self.estimate,
            total: w.eta1 * deploy + self.estimate,
        }
    }
}

/// Runs the controller for `horizon` slots of `stream`, starting from an
/// empty queue and an empty previous placement.
pub fn run_spco(
    z: &DeploymentDecision,
    stream: impl IntoIterator<Item = NetworkSnapshot>,
    horizon: usize,
    params: &SpcoParams,
    scenario: &Scenario,
) -> Result<SpcoRun> {
    if horizon == 0 {
        return Err(Error::Cost(CostError::EmptyHorizon));
    }
    let p_avg = scenario.budget().energy_budget_for(z);
    let mut queue = QueueState::new();
    let mut previous = BinaryMatrix::zeros(scenario.server_count(), scenario.service_count());
    let mut slots = Vec::with_capacity(horizon);
    let mut decisions = Vec::with_capacity(horizon);
    let mut stream = stream.into_iter();
    for t in 0..horizon {
        let snapshot = stream
            .next()
            .ok_or_else(|| Error::Input(format!("information stream ended after {t} of {horizon} slots")))?;
        let sol = solve(&snapshot, &previous, queue.backlog, z, params, scenario)?;
        let c = cost::slot_cost(z, &sol.decision, &previous, &snapshot, scenario)?;
        slots.push(SlotRecord {
            t,
            backlog: queue.backlog,
            energy: c.energy,
            operation: c.operation,
            ue_delay: c.ue_delay,
            tactical: c.tactical,
            objective: sol.objective,
        });
        queue.record(c.energy, p_avg);
        previous = sol.decision.placement.clone();
        decisions.push(sol.decision);
    }
    let estimate = slots.iter().map(|s| s.tactical).sum::<f64>() / horizon as f64;
    Ok(SpcoRun { slots, decisions, estimate, queue, drift_bound: drift_bound(z, scenario), energy_budget: p_avg })
}

/// Writes `t,backlog,energy,operation,ue_delay,tactical` rows.
pub fn write_trace(mut out: impl Write, run: &SpcoRun) -> std::io::Result<()> {
    writeln!(out, "t,backlog,energy,operation,ue_delay,tactical")?;
    for s in &run.slots {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            s.t,
            fmt_g(s.backlog),
            fmt_g(s.energy),
            fmt_g(s.operation),
            fmt_g(s.ue_delay),
            fmt_g(s.tactical)
        )?;
    }
    Ok(())
}
