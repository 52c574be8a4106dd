//! Strategic layer: a Markov chain over budget-feasible deployments whose
//! stationary law is the Gibbs distribution `p*_z ∝ exp(−β·U(z))`.
//!
//! Each period the chain proposes a deployment uniformly among the other
//! feasible ones, evaluates its system cost `U(z') = η1·Γ^D + E[Q*]` with one
//! tactical run on fresh information, and moves with probability
//! `1 / (1 + α·exp(β·(U(z') − U(z))))`. The baselines reuse the same chain
//! with a restricted objective.

use std::collections::HashMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Scenario;
use crate::cost::{self, FEASIBILITY_TOLERANCE};
use crate::error::{Error, Result};
use crate::info::{derive_seed, InfoStream};
use crate::model::*;
use crate::output::fmt_g;
use crate::spco::{run_spco, SpcoParams, SpcoRun};

const PERIOD_TAG: u64 = 0x7065_7269;
const CHAIN_TAG: u64 = 0x6368_6169;

/// Largest server count whose deployment space is enumerated.
pub const MAX_ENUMERABLE_SERVERS: usize = 24;

/// All deployments within the budget, in ascending bitmask order (so the
/// empty deployment is always member 0).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSpace {
    members: Vec<DeploymentDecision>,
}

impl ConfigSpace {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        let m = scenario.server_count();
        if m > MAX_ENUMERABLE_SERVERS {
            return Err(Error::ConfigSpaceTooLarge { servers: m });
        }
        let budget = scenario.budget().deploy_budget;
        let members = (0u64..1 << m)
            .map(|mask| DeploymentDecision::from_mask(mask, m))
            .filter(|z| cost::deployment_cost(z, scenario) <= budget + FEASIBILITY_TOLERANCE)
            .collect();
        Ok(Self { members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[DeploymentDecision] {
        &self.members
    }

    pub fn get(&self, i: usize) -> &DeploymentDecision {
        &self.members[i]
    }

    pub fn index_of(&self, z: &DeploymentDecision) -> Option<usize> {
        self.members.iter().position(|m| m == z)
    }
}

/// Which cost a chain minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// η1·Γ^D + E[Γ^Q]
    #[default]
    Full,
    /// η1·Γ^D + E[η2·Γ^sop]
    OperationOnly,
    /// η1·Γ^D + E[η3·Γ^ue]
    DelayOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaiedParams {
    pub beta: f64,
    pub alpha: f64,
    /// Trace length L, including the initial state.
    pub periods: usize,
    /// Evaluate every deployment on the same information (and cache it).
    pub freeze_info: bool,
    pub objective: Objective,
    pub seed: u64,
}

impl MaiedParams {
    pub fn from_scenario(scenario: &Scenario) -> Self {
        let c = scenario.control();
        Self {
            beta: c.map_beta,
            alpha: c.map_alpha,
            periods: scenario.time().periods,
            freeze_info: c.freeze_info,
            objective: Objective::Full,
            seed: scenario.seed(),
        }
    }
}

/// `exp(−β·U) / Σ exp(−β·U')`, shifted by the minimum for stability.
pub fn gibbs_distribution(costs: &[f64], beta: f64) -> Vec<f64> {
    let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = costs.iter().map(|u| (-beta * (u - min)).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// `[1 + α·exp(β·(U_target − U_current))]⁻¹` without overflow.
pub fn transition_probability(u_current: f64, u_target: f64, alpha: f64, beta: f64) -> f64 {
    let x = alpha.ln() + beta * (u_target - u_current);
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// One period of a chain over state indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainStep {
    pub state: usize,
    pub cost: f64,
    pub proposal: Option<(usize, f64)>,
    pub accepted: bool,
}

/// Runs `periods` periods over states `0..size` starting at `initial`.
/// `eval(state, period)` returns the cost of a state observed in a period.
pub fn run_chain(
    size: usize,
    initial: usize,
    periods: usize,
    alpha: f64,
    beta: f64,
    rng: &mut impl Rng,
    mut eval: impl FnMut(usize, usize) -> Result<f64>,
) -> Result<Vec<ChainStep>> {
    let mut state = initial;
    let mut cost = eval(state, 0)?;
    let mut steps = Vec::with_capacity(periods);
    steps.push(ChainStep { state, cost, proposal: None, accepted: false });
    for l in 1..periods {
        if size < 2 {
            steps.push(ChainStep { state, cost, proposal: None, accepted: false });
            continue;
        }
        let mut target = rng.random_range(0..size - 1);
        if target >= state {
            target += 1;
        }
        let target_cost = eval(target, l)?;
        let accepted = rng.random::<f64>() < transition_probability(cost, target_cost, alpha, beta);
        if accepted {
            state = target;
            cost = target_cost;
        }
        steps.push(ChainStep { state, cost, proposal: Some((target, target_cost)), accepted });
    }
    Ok(steps)
}

/// Objective value of one tactical run.
pub fn run_cost(run: &SpcoRun, z: &DeploymentDecision, objective: Objective, scenario: &Scenario) -> f64 {
    let w = scenario.weights();
    let tactical = match objective {
        Objective::Full => run.estimate,
        Objective::OperationOnly => w.eta2 * run.mean_operation(),
        Objective::DelayOnly => w.eta3 * run.mean_ue_delay(),
    };
    w.eta1 * cost::deployment_cost(z, scenario) + tactical
}

/// `U(z)` averaged over the given streams (each run for `horizon` slots).
pub fn system_cost(
    z: &DeploymentDecision,
    streams: &[InfoStream],
    horizon: usize,
    spco: &SpcoParams,
    objective: Objective,
    scenario: &Scenario,
) -> Result<f64> {
    if streams.is_empty() {
        return Err(Error::Input("system cost needs at least one information stream".into()));
    }
    let mut total = 0.0;
    for s in streams {
        let run = run_spco(z, s.clone(), horizon, spco, scenario)?;
        total += run_cost(&run, z, objective, scenario);
    }
    Ok(total / streams.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaiedStep {
    pub period: usize,
    pub z: String,
    pub cost: f64,
    pub proposal: Option<String>,
    pub proposal_cost: Option<f64>,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaiedRun {
    pub trace: Vec<MaiedStep>,
    /// Ū, the mean of the recorded costs.
    pub average: f64,
    /// Lowest-cost deployment in the trace (first one on ties).
    pub best: DeploymentDecision,
    pub best_cost: f64,
    pub space_size: usize,
}

/// Stream observed in period `l`.
pub fn period_stream(scenario: &Scenario, params: &MaiedParams, l: usize) -> InfoStream {
    let index = if params.freeze_info { 0 } else { l as u64 };
    InfoStream::new(scenario, derive_seed(params.seed, PERIOD_TAG, index)).with_horizon(scenario.time().slots_per_period)
}

pub fn run_maied(scenario: &Scenario, params: &MaiedParams, spco: &SpcoParams) -> Result<MaiedRun> {
    if params.periods == 0 {
        return Err(Error::Input("the deployment chain needs at least one period".into()));
    }
    let space = ConfigSpace::new(scenario)?;
    let horizon = scenario.time().slots_per_period;
    let mut cache: HashMap<usize, f64> = HashMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, CHAIN_TAG, 0));
    let eval = |i: usize, l: usize| -> Result<f64> {
        if params.freeze_info {
            if let Some(&u) = cache.get(&i) {
                return Ok(u);
            }
        }
        let z = space.get(i);
        let run = run_spco(z, period_stream(scenario, params, l), horizon, spco, scenario)?;
        let u = run_cost(&run, z, params.objective, scenario);
        if params.freeze_info {
            cache.insert(i, u);
        }
        Ok(u)
    };
    let steps = run_chain(space.len(), 0, params.periods, params.alpha, params.beta, &mut rng, eval)?;

    let mut best = 0;
    for (l, s) in steps.iter().enumerate() {
        if s.cost < steps[best].cost {
            best = l;
        }
    }
    let trace = steps
        .iter()
        .enumerate()
        .map(|(period, s)| MaiedStep {
            period,
            z: space.get(s.state).bitstring(),
            cost: s.cost,
            proposal: s.proposal.map(|(j, _)| space.get(j).bitstring()),
            proposal_cost: s.proposal.map(|(_, u)| u),
            accepted: s.accepted,
        })
        .collect();
    Ok(MaiedRun {
        trace,
        average: steps.iter().map(|s| s.cost).sum::<f64>() / steps.len() as f64,
        best: space.get(steps[best].state).clone(),
        best_cost: steps[best].cost,
        space_size: space.len(),
    })
}

/// Deploy every server, budget or not.
pub fn baseline_dae(scenario: &Scenario) -> DeploymentDecision {
    DeploymentDecision::all(scenario.server_count())
}

/// Deployment chain driven by deployment plus service operation cost.
pub fn baseline_soed(scenario: &Scenario, params: &MaiedParams, spco: &SpcoParams) -> Result<DeploymentDecision> {
    let p = MaiedParams { objective: Objective::OperationOnly, ..*params };
    Ok(run_maied(scenario, &p, spco)?.best)
}

/// Deployment chain driven by deployment plus UE delay cost.
pub fn baseline_uoed(scenario: &Scenario, params: &MaiedParams, spco: &SpcoParams) -> Result<DeploymentDecision> {
    let p = MaiedParams { objective: Objective::DelayOnly, ..*params };
    Ok(run_maied(scenario, &p, spco)?.best)
}

/// Writes `period,z,cost,proposal,proposal_cost,accepted` rows.
pub fn write_trace(mut out: impl Write, run: &MaiedRun) -> std::io::Result<()> {
    writeln!(out, "period,z,cost,proposal,proposal_cost,accepted")?;
    for s in &run.trace {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            s.period,
            s.z,
            fmt_g(s.cost),
            s.proposal.as_deref().unwrap_or(""),
            s.proposal_cost.map(fmt_g).unwrap_or_default(),
            s.accepted
        )?;
    }
    Ok(())
}
