//! Shared helpers for the integration tests and the acceptance runner.

#![allow(dead_code)]

use mec_core::cost::*;
use mec_core::fixtures;
use mec_core::model::*;
use mec_core::{Scenario, ScenarioConfig};

/// One frozen example: a computed value against its expected value.
pub struct Check {
    pub name: &'static str,
    pub got: f64,
    pub want: f64,
}

impl Check {
    pub fn ok(&self, rel: f64) -> bool {
        close(self.got, self.want, rel)
    }
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn flag(b: bool) -> f64 {
    if b { 1.0 } else { 0.0 }
}

pub fn with_weights(s: &Scenario, f: impl FnOnce(&mut ScenarioConfig)) -> Scenario {
    let mut cfg = s.to_config();
    f(&mut cfg);
    cfg.validate().expect("modified fixture stays valid")
}

/// Placement of service 0 on server 0 only.
fn placed(m: usize, s: usize) -> BinaryMatrix {
    let mut x = BinaryMatrix::zeros(m, s);
    x.set(0, 0, true);
    x
}

/// Every tagged cost-engine example. Expected values of the derived cases
/// were computed by an independent scalar evaluation and are frozen here.
pub fn cost_examples() -> Vec<Check> {
    let w = CostWeights { alpha: 1.0, beta_tx: 1.0, eta1: 1.0, eta2: 1.0, eta3: 1.0, cloud_delay: 10.0 };
    let unit = ChannelParams { bandwidth_hz: 2e6, noise_power_w: 1.0, path_loss_exponent: 2.0 };
    let table = ChannelParams::from_noise_density(2e6, -174.0, 4.0);
    let mut out = vec![
        Check { name: "rate: p*h/N0 = 1, W = 2 MHz", got: shannon_rate(2.0, 4.0, &unit).unwrap(), want: 2e6 },
        Check { name: "rate: p = 0", got: shannon_rate(5.0, 0.0, &unit).unwrap(), want: 0.0 },
        Check { name: "rate: co-located is an error", got: flag(shannon_rate(0.0, 0.1, &table).is_err()), want: 1.0 },
        Check { name: "rate: 200 m, 0.1 W, -174 dBm/Hz", got: shannon_rate(200.0, 0.1, &table).unwrap(), want: 25877190.9836056 },
        Check { name: "compute: c=10, C=200", got: compute_delay_cost(10.0, 200.0, &w), want: 0.05 },
        Check { name: "compute: alpha = 0", got: compute_delay_cost(10.0, 200.0, &CostWeights { alpha: 0.0, ..w }), want: 0.0 },
        Check { name: "compute: doubled load", got: compute_delay_cost(20.0, 200.0, &w), want: 0.1 },
        Check { name: "access: no data", got: access_delay_cost(0.0, 3e6, &w).unwrap(), want: 0.0 },
        Check { name: "access: 8 Mbit at 2 Mbit/s", got: access_delay_cost(1.0, 2e6, &w).unwrap(), want: 4.0 },
        Check { name: "access: doubled rate halves", got: access_delay_cost(1.0, 4e6, &w).unwrap(), want: 2.0 },
        Check { name: "access: zero rate is an error", got: flag(access_delay_cost(1.0, 0.0, &w).is_err()), want: 1.0 },
        Check { name: "exchange: same server", got: exchange_delay_cost(0.5, WiredLink::SameNode, &w), want: 0.0 },
        Check { name: "exchange: no remote data", got: exchange_delay_cost(0.0, WiredLink::Capacity(1e6), &w), want: 0.0 },
        Check { name: "exchange: 4 Mbit at 1 Mbit/s", got: exchange_delay_cost(0.5, WiredLink::Capacity(1e6), &w), want: 4.0 },
    ];

    // UE delay on the one-server and two-server fixtures (f = 0.5, T_cld = 10).
    let (s1, snap1) = fixtures::single_server(2.0);
    let cloud = TacticalDecision::all_cloud(1, 1, 1);
    out.push(Check { name: "ue: all cloud", got: ue_delay_cost(&cloud, &snap1, &s1).unwrap(), want: 10.0 });
    let same = TacticalDecision::from_assignment(placed(1, 1), &[Some(0)], &[Some(0)]);
    let same_cost = ue_delay_cost(&same, &snap1, &s1).unwrap();
    out.push(Check { name: "ue: both endpoints on one server", got: same_cost, want: 0.24103645098740634 });
    let parts = 0.5
        * (pair_access_delay(&s1, &snap1, 0, Side::Src, 0).unwrap()
            + pair_access_delay(&s1, &snap1, 0, Side::Dst, 0).unwrap()
            + 2.0 * pair_compute_delay(&s1, &snap1, 0, 0)
            + pair_exchange_delay(&s1, &snap1, 0, 0, 0));
    out.push(Check { name: "ue: sum of the component terms", got: same_cost, want: parts });
    let half = TacticalDecision::from_assignment(placed(1, 1), &[Some(0)], &[None]);
    out.push(Check { name: "ue: source edge, destination cloud", got: ue_delay_cost(&half, &snap1, &s1).unwrap(), want: 5.120518225493703 });
    let (s2, snap2) = fixtures::two_servers();
    let mut both = BinaryMatrix::zeros(2, 1);
    both.set(0, 0, true);
    both.set(1, 0, true);
    let split = TacticalDecision::from_assignment(both.clone(), &[Some(0)], &[Some(1)]);
    out.push(Check { name: "ue: endpoints on two servers", got: ue_delay_cost(&split, &snap2, &s2).unwrap(), want: 0.26103645098740635 });

    // Operation costs: u = 2, rho = 0.1, theta = 0.5.
    let x = placed(1, 1);
    let none = BinaryMatrix::zeros(1, 1);
    out.push(Check { name: "placement: unchanged", got: placement_cost(&x, &x, &s1), want: 0.0 });
    out.push(Check { name: "placement: removal is free", got: placement_cost(&none, &x, &s1), want: 0.0 });
    out.push(Check { name: "placement: new u=2, theta=0.5", got: placement_cost(&x, &none, &s1), want: 1.0 });
    out.push(Check { name: "maintenance: u=2, rho=0.1", got: maintenance_cost(&x, &s1), want: 0.2 });
    out.push(Check {
        name: "operation = maintenance + placement",
        got: operation_cost(&x, &none, &s1),
        want: maintenance_cost(&x, &s1) + placement_cost(&x, &none, &s1),
    });

    // Deployment cost.
    let desk = fixtures::desk_config().validate().unwrap();
    out.push(Check { name: "deploy: none", got: deployment_cost(&DeploymentDecision::none(9), &desk), want: 0.0 });
    out.push(Check { name: "deploy: nine at 100", got: deployment_cost(&DeploymentDecision::all(9), &desk), want: 900.0 });
    out.push(Check { name: "deploy: single", got: deployment_cost(&DeploymentDecision::from_mask(1, 9), &desk), want: 100.0 });

    // Energy: P_idle = 100, P_max = 200, service core load 10.
    let one = DeploymentDecision::all(1);
    out.push(Check { name: "energy: idle only", got: energy(&none, &one, &snap1, &s1).unwrap(), want: 100.0 });
    let mut full = snap1.clone();
    full.compute_cap[0] = 10.0;
    out.push(Check { name: "energy: full load", got: energy(&x, &one, &full, &s1).unwrap(), want: 200.0 });
    let mut halfload = snap2.clone();
    halfload.compute_cap = vec![20.0, 20.0];
    out.push(Check {
        name: "energy: two servers half loaded",
        got: energy(&both, &DeploymentDecision::all(2), &halfload, &s2).unwrap(),
        want: 300.0,
    });
    out.push(Check {
        name: "energy: undeployed server draws nothing",
        got: energy(&none, &DeploymentDecision::none(1), &snap1, &s1).unwrap(),
        want: 0.0,
    });

    // Tactical and total cost.
    let zero = with_weights(&s1, |c| {
        c.weights.eta2 = 0.0;
        c.weights.eta3 = 0.0;
    });
    out.push(Check { name: "tactical: eta2 = eta3 = 0", got: tactical_cost(&same, &none, &snap1, &zero).unwrap(), want: 0.0 });
    let weighted = with_weights(&s1, |c| {
        c.weights.eta2 = 2.0;
        c.weights.eta3 = 3.0;
    });
    out.push(Check {
        name: "tactical: weighted sum",
        got: tactical_cost(&same, &none, &snap1, &weighted).unwrap(),
        want: 2.0 * 1.2 + 3.0 * 0.24103645098740634,
    });
    out.push(Check {
        name: "total: single slot",
        got: total_cost(&one, &[7.0], &s1).unwrap(),
        want: s1.weights().eta1 * 100.0 + 7.0,
    });
    out.push(Check { name: "total: empty horizon is an error", got: flag(total_cost(&one, &[], &s1).is_err()), want: 1.0 });

    // Constraints.
    let orphan = TacticalDecision::from_assignment(BinaryMatrix::zeros(1, 1), &[Some(0)], &[None]);
    out.push(Check {
        name: "constraints: offload without the service fails availability",
        got: flag(!check_constraints(&one, &orphan, &snap1, &s1).service_ok()),
        want: 1.0,
    });
    let undeployed = TacticalDecision::from_assignment(x.clone(), &[None], &[None]);
    out.push(Check {
        name: "constraints: placement on an undeployed server fails",
        got: flag(!check_constraints(&DeploymentDecision::none(1), &undeployed, &snap1, &s1).server_ok()),
        want: 1.0,
    });
    let (s_tight, snap_tight) = fixtures::single_server(200.0);
    let rep = check_constraints(&one, &TacticalDecision::from_assignment(x, &[None], &[None]), &snap_tight, &s_tight);
    out.push(Check { name: "constraints: storage exactly full passes", got: flag(rep.storage_ok()), want: 1.0 });
    out.push(Check { name: "constraints: storage exactly full has zero slack", got: rep.storage_slack[0], want: 0.0 });
    out
}

pub fn desk() -> Scenario {
    fixtures::desk_config().validate().unwrap()
}
