mod common;

use approx::assert_relative_eq;
use mec_core::cost::*;
use mec_core::fixtures::{random_tiny_instance, TinyInstance};
use mec_core::model::*;
use mec_core::oracle::feasible_decisions;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn tagged_examples_match_to_1e9() {
    let mut bad = Vec::new();
    for c in common::cost_examples() {
        if !c.ok(1e-9) {
            bad.push(format!("{}: got {} want {}", c.name, c.got, c.want));
        }
    }
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}

fn instance(seed: u64) -> TinyInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_tiny_instance(&mut rng, 3, 2, 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn more_compute_never_costs_more(c in 0.1f64..500.0, cap in 1.0f64..500.0, extra in 0.0f64..500.0) {
        let w = CostWeights { alpha: 1.3, beta_tx: 1.0, eta1: 1.0, eta2: 1.0, eta3: 1.0, cloud_delay: 1.0 };
        prop_assert!(compute_delay_cost(c, cap + extra, &w) <= compute_delay_cost(c, cap, &w));
    }

    #[test]
    fn faster_links_never_cost_more(mb in 0.0f64..10.0, rate in 1e3f64..1e9, extra in 0.0f64..1e9) {
        let w = CostWeights { alpha: 1.0, beta_tx: 0.7, eta1: 1.0, eta2: 1.0, eta3: 1.0, cloud_delay: 1.0 };
        prop_assert!(access_delay_cost(mb, rate + extra, &w).unwrap() <= access_delay_cost(mb, rate, &w).unwrap());
        prop_assert!(
            exchange_delay_cost(mb, WiredLink::Capacity(rate + extra), &w)
                <= exchange_delay_cost(mb, WiredLink::Capacity(rate), &w)
        );
    }

    #[test]
    fn cloud_fallback_is_closed_form(seed in any::<u64>()) {
        let t = instance(seed);
        let s = &t.scenario;
        let d = TacticalDecision::all_cloud(s.server_count(), s.service_count(), s.pair_count());
        let f: f64 = s.pairs().iter().map(|p| p.interaction_frequency).sum();
        assert_relative_eq!(ue_delay_cost(&d, &t.snapshot, s).unwrap(), 2.0 * s.weights().cloud_delay * f, max_relative = 1e-12);
    }

    #[test]
    fn operation_is_maintenance_plus_placement(seed in any::<u64>()) {
        let t = instance(seed);
        for d in feasible_decisions(&t.z, &t.snapshot, &t.scenario, false).into_iter().take(50) {
            let x = &d.placement;
            prop_assert_eq!(
                operation_cost(x, &t.previous, &t.scenario),
                maintenance_cost(x, &t.scenario) + placement_cost(x, &t.previous, &t.scenario)
            );
        }
    }

    #[test]
    fn energy_stays_between_idle_and_max(seed in any::<u64>()) {
        let t = instance(seed);
        let s = &t.scenario;
        for d in feasible_decisions(&t.z, &t.snapshot, s, false).into_iter().take(50) {
            let one = |m: usize| {
                let only = DeploymentDecision::new((0..s.server_count()).map(|i| i == m).collect());
                energy(&d.placement, &only, &t.snapshot, s).unwrap()
            };
            for m in t.z.deployed() {
                let es = &s.servers()[m];
                let e = one(m);
                prop_assert!(e >= es.idle_power - 1e-9 && e <= es.max_power + 1e-9);
            }
        }
    }

    #[test]
    fn ue_delay_is_homogeneous_in_its_coefficients(seed in any::<u64>(), k in 0.1f64..10.0) {
        let t = instance(seed);
        let s = &t.scenario;
        let tx_only = common::with_weights(s, |c| c.weights.alpha = 0.0);
        let tx_scaled = common::with_weights(s, |c| {
            c.weights.alpha = 0.0;
            c.weights.beta_tx *= k;
        });
        let cpu_only = common::with_weights(s, |c| {
            c.weights.beta_tx = 0.0;
            c.weights.cloud_delay = Some(0.0);
        });
        let cpu_scaled = common::with_weights(s, |c| {
            c.weights.beta_tx = 0.0;
            c.weights.cloud_delay = Some(0.0);
            c.weights.alpha *= k;
        });
        for d in feasible_decisions(&t.z, &t.snapshot, s, false).into_iter().take(50) {
            // The cloud term does not scale with the transmission weight,
            // so that half of the property needs every endpoint at the edge.
            let at_edge = (0..s.pair_count()).all(|n| d.src_offload.column_sum(n) == 1 && d.dst_offload.column_sum(n) == 1);
            if at_edge {
                let a = ue_delay_cost(&d, &t.snapshot, &tx_only).unwrap();
                let b = ue_delay_cost(&d, &t.snapshot, &tx_scaled).unwrap();
                assert_relative_eq!(b, k * a, max_relative = 1e-9);
            }
            let a = ue_delay_cost(&d, &t.snapshot, &cpu_only).unwrap();
            let b = ue_delay_cost(&d, &t.snapshot, &cpu_scaled).unwrap();
            assert_relative_eq!(b, k * a, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn enumerated_decisions_pass_the_constraint_checker(seed in any::<u64>()) {
        let t = instance(seed);
        for d in feasible_decisions(&t.z, &t.snapshot, &t.scenario, false).into_iter().take(200) {
            let rep = check_constraints(&t.z, &d, &t.snapshot, &t.scenario);
            prop_assert!(rep.tactical_feasible(), "{:?}", rep);
        }
    }
}

#[test]
fn breakdown_identities_hold() {
    let s = common::desk();
    let z = DeploymentDecision::all(s.server_count());
    let run = mec_core::spco::run_spco(
        &z,
        mec_core::info::InfoStream::new(&s, 3),
        20,
        &mec_core::spco::SpcoParams::from_control(s.control()),
        &s,
    )
    .unwrap();
    let b = run.breakdown(&z, &s);
    let w = s.weights();
    assert_relative_eq!(b.operation, b.maintain + b.place, max_relative = 1e-12);
    assert_relative_eq!(b.tactical, w.eta2 * b.operation + w.eta3 * b.ue_delay, max_relative = 1e-12);
    assert_relative_eq!(b.total, w.eta1 * b.deploy + b.tactical, max_relative = 1e-12);
    assert!(b.deploy >= 0.0 && b.maintain >= 0.0 && b.place >= 0.0 && b.ue_delay >= 0.0);
}

#[test]
fn dae_over_budget_is_flagged() {
    let s = common::desk();
    let z = mec_core::maied::baseline_dae(&s);
    assert_eq!(z, DeploymentDecision::all(9));
    let snap = mec_core::info::InfoStream::new(&s, 1).next().unwrap();
    let d = TacticalDecision::all_cloud(9, s.service_count(), s.pair_count());
    let rep = check_constraints(&z, &d, &snap, &s);
    assert!(rep.tactical_feasible());
    assert!(!rep.budget_ok());
    assert_eq!(rep.budget_slack, 500.0 - 900.0);
}
