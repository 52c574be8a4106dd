//! Small ready-made scenarios for tests, oracle sweeps and examples.

use rand::Rng;

use crate::config::*;
use crate::info::InfoStream;
use crate::model::*;

/// The desk-scale default scenario shipped in `scenarios/desk.toml`.
pub const DESK_TOML: &str = include_str!("../../../scenarios/desk.toml");

pub fn desk_config() -> ScenarioConfig {
    ScenarioConfig::from_toml_str(DESK_TOML).expect("bundled desk scenario parses")
}

fn base_config(servers: Vec<EsProfile>, services: Vec<ServiceSpec>, pairs: Vec<UePair>) -> ScenarioConfig {
    ScenarioConfig {
        seed: 1,
        time: TimeConfig { slots_per_period: 10, periods: 10 },
        channel: ChannelConfig::default(),
        weights: WeightsConfig { cloud_delay: Some(10.0), ..WeightsConfig::default() },
        budget: BudgetSection::default(),
        distributions: DistributionsConfig { storage_std: 0.0, compute_std: 0.0, ..DistributionsConfig::default() },
        network: NetworkConfig::default(),
        control: ControlConfig::default(),
        servers: ServersSection::List(servers),
        services,
        pairs: PairsSection::List(pairs),
    }
}

fn server(id: usize, x: f64, y: f64) -> EsProfile {
    EsProfile {
        id,
        position: Point::new(x, y),
        deploy_cost: 100.0,
        maintain_unit_cost: 0.1,
        place_unit_cost: 0.5,
        idle_power: 100.0,
        max_power: 200.0,
    }
}

fn service(id: usize, storage_size: f64) -> ServiceSpec {
    ServiceSpec { id, storage_size, local_load: 0.0, core_load: 10.0, local_data_mb: 1.0, remote_data_mb: 0.5 }
}

fn first_snapshot(s: &Scenario) -> NetworkSnapshot {
    InfoStream::new(s, s.seed()).next().expect("unbounded stream")
}

/// One server in the middle of the arena, one service of size `storage_size`,
/// one pair 50 m either side of the server; deterministic capacities of 200.
pub fn single_server(storage_size: f64) -> (Scenario, NetworkSnapshot) {
    let pair = UePair {
        id: 0,
        service: 0,
        interaction_frequency: 0.5,
        src_position: Point::new(450.0, 500.0),
        dst_position: Point::new(550.0, 500.0),
        tx_power: 0.1,
    };
    let s = base_config(vec![server(0, 500.0, 500.0)], vec![service(0, storage_size)], vec![pair])
        .validate()
        .expect("fixture is valid");
    let snap = first_snapshot(&s);
    (s, snap)
}

/// Two servers 500 m apart with the pair's source near server 0 and its
/// destination near server 1.
pub fn two_servers() -> (Scenario, NetworkSnapshot) {
    let pair = UePair {
        id: 0,
        service: 0,
        interaction_frequency: 0.5,
        src_position: Point::new(200.0, 500.0),
        dst_position: Point::new(800.0, 500.0),
        tx_power: 0.1,
    };
    let s = base_config(
        vec![server(0, 250.0, 500.0), server(1, 750.0, 500.0)],
        vec![service(0, 40.0)],
        vec![pair],
    )
    .validate()
    .expect("fixture is valid");
    let snap = first_snapshot(&s);
    (s, snap)
}

fn point(rng: &mut impl Rng, side: f64) -> Point {
    Point::new(rng.random_range(0.0..side), rng.random_range(0.0..side))
}

/// Random explicit scenario with exactly `m` servers, `s` services and `n` pairs.
///
/// Parameters are spread so that storage, compute, energy and the cloud
/// fallback each decide some instances.
pub fn random_config(rng: &mut impl Rng, m: usize, s: usize, n: usize) -> ScenarioConfig {
    let side = 1000.0;
    let servers = (0..m)
        .map(|id| {
            let idle = rng.random_range(50.0..120.0);
            EsProfile {
                id,
                position: point(rng, side),
                deploy_cost: rng.random_range(50.0..150.0),
                maintain_unit_cost: rng.random_range(0.02..0.2),
                place_unit_cost: rng.random_range(0.1..1.0),
                idle_power: idle,
                max_power: idle + rng.random_range(20.0..150.0),
            }
        })
        .collect();
    let services = (0..s)
        .map(|id| ServiceSpec {
            id,
            storage_size: rng.random_range(20.0..150.0),
            local_load: 0.0,
            core_load: rng.random_range(20.0..150.0),
            local_data_mb: rng.random_range(0.2..3.0),
            remote_data_mb: rng.random_range(0.0..3.0),
        })
        .collect();
    let pairs = (0..n)
        .map(|id| UePair {
            id,
            service: rng.random_range(0..s),
            interaction_frequency: rng.random_range(0.1..1.0),
            src_position: point(rng, side),
            dst_position: point(rng, side),
            tx_power: 0.1,
        })
        .collect();
    let mut cfg = base_config(servers, services, pairs);
    cfg.seed = rng.random();
    cfg.weights.cloud_delay = Some(rng.random_range(0.5..8.0));
    cfg.weights.eta2 = rng.random_range(0.2..1.5);
    cfg.distributions.storage_mean = rng.random_range(60.0..250.0);
    cfg.distributions.compute_mean = rng.random_range(60.0..250.0);
    cfg.distributions.storage_std = 5.0;
    cfg.distributions.compute_std = 5.0;
    cfg.budget.deploy_budget = rng.random_range(100.0..400.0);
    cfg.budget.energy_budget_per_server = Some(rng.random_range(80.0..200.0));
    cfg
}

/// Everything a single-slot solver needs.
#[derive(Debug, Clone)]
pub struct TinyInstance {
    pub scenario: Scenario,
    pub snapshot: NetworkSnapshot,
    pub z: DeploymentDecision,
    pub previous: BinaryMatrix,
    pub theta: f64,
    pub v: f64,
}

/// Random single-slot instance with at most `max_m` servers, `max_s`
/// services and `max_n` pairs.
pub fn random_tiny_instance(rng: &mut impl Rng, max_m: usize, max_s: usize, max_n: usize) -> TinyInstance {
    let m = rng.random_range(1..=max_m);
    let s = rng.random_range(1..=max_s);
    let n = rng.random_range(1..=max_n);
    let scenario = random_config(rng, m, s, n).validate().expect("random tiny scenario is valid");
    let snapshot = first_snapshot(&scenario);
    let z = DeploymentDecision::new((0..m).map(|_| rng.random_bool(0.75)).collect());
    let mut previous = BinaryMatrix::zeros(m, s);
    for mm in z.deployed() {
        for ss in 0..s {
            previous.set(mm, ss, rng.random_bool(0.3));
        }
    }
    let theta = if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..300.0) };
    let v = [0.0, 1.0, 10.0, 100.0][rng.random_range(0..4)];
    TinyInstance { scenario, snapshot, z, previous, theta, v }
}
