mod common;

use approx::assert_relative_eq;
use mec_core::fixtures::{self, random_tiny_instance};
use mec_core::info::InfoStream;
use mec_core::model::*;
use mec_core::oracle::oracle_p3;
use mec_core::spco::*;
use mec_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn exhaustive(v: f64) -> SpcoParams {
    SpcoParams::new(v, SolverBackend::Exhaustive)
}

fn greedy(v: f64) -> SpcoParams {
    SpcoParams::new(v, SolverBackend::Greedy)
}

#[test]
fn queue_recursion() {
    assert_eq!(update_queue(0.0, 150.0, 150.0), 0.0);
    assert_eq!(update_queue(5.0, 140.0, 150.0), 0.0);
    assert_eq!(update_queue(3.0, 152.0, 150.0), 5.0);
    let mut q = QueueState::new();
    q.record(160.0, 150.0);
    q.record(145.0, 150.0);
    assert_eq!(q.backlog, 5.0);
    assert_eq!(q.history, vec![(0.0, 160.0), (10.0, 145.0)]);
}

#[test]
fn drift_bound_covers_both_extremes() {
    let (s, _) = fixtures::single_server(2.0);
    // P_avg = 150, ζ_max = 200: ½·max(150, 50)²
    assert_eq!(drift_bound(&DeploymentDecision::all(1), &s), 0.5 * 150.0 * 150.0);
}

#[test]
fn objective_degenerate_cases() {
    let (s, snap) = fixtures::single_server(2.0);
    let z = DeploymentDecision::all(1);
    let prev = BinaryMatrix::zeros(1, 1);
    let mut x = BinaryMatrix::zeros(1, 1);
    x.set(0, 0, true);
    let d = TacticalDecision::from_assignment(x.clone(), &[Some(0)], &[Some(0)]);
    let gq = mec_core::cost::tactical_cost(&d, &prev, &snap, &s).unwrap();
    let zeta = mec_core::cost::energy(&x, &z, &snap, &s).unwrap();
    assert_eq!(p3_objective(&d, &prev, &snap, 0.0, 7.0, &z, &s).unwrap(), 7.0 * gq);
    assert_eq!(p3_objective(&d, &prev, &snap, 4.0, 0.0, &z, &s).unwrap(), 4.0 * (zeta - 150.0));
    assert_relative_eq!(p3_objective(&d, &prev, &snap, 4.0, 7.0, &z, &s).unwrap(), 4.0 * (zeta - 150.0) + 7.0 * gq);
}

/// Hand enumeration of the eight candidates of a one-server, one-service,
/// one-pair instance; values frozen from an independent evaluation.
#[test]
fn exhaustive_single_server_examples() {
    let z = DeploymentDecision::all(1);
    let prev = BinaryMatrix::zeros(1, 1);
    let cases = [
        (2.0, 0.0, 1.0, 1.4410364509874063, true),
        (2.0, 2.0, 10.0, -75.58963549012594, true),
        (2.0, 50.0, 0.0, -2500.0, false),
        (30.0, 0.0, 1.0, 10.0, false),
    ];
    for (u, theta, v, want, place) in cases {
        let (s, snap) = fixtures::single_server(u);
        let sol = solve_exhaustive(&snap, &prev, theta, &z, &exhaustive(v), &s).unwrap();
        assert_relative_eq!(sol.objective, want, max_relative = 1e-12);
        assert_eq!(sol.decision.placement.get(0, 0), place, "u={u} theta={theta} v={v}");
        let expect = if place { vec![Some(0)] } else { vec![None] };
        assert_eq!(sol.decision.assignment(Side::Src).unwrap(), expect);
        assert_eq!(sol.decision.assignment(Side::Dst).unwrap(), expect);
    }
}

#[test]
fn nothing_deployed_means_all_cloud() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let t = random_tiny_instance(&mut rng, 3, 2, 2);
        let s = &t.scenario;
        let z = DeploymentDecision::none(s.server_count());
        let cloud = TacticalDecision::all_cloud(s.server_count(), s.service_count(), s.pair_count());
        for params in [exhaustive(t.v), greedy(t.v)] {
            let sol = solve(&t.snapshot, &t.previous, t.theta, &z, &params, s).unwrap();
            assert_eq!(sol.decision, cloud);
        }
    }
}

#[test]
fn pure_drift_places_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let t = random_tiny_instance(&mut rng, 3, 2, 2);
        let sol = solve_exhaustive(&t.snapshot, &t.previous, 10.0, &t.z, &exhaustive(0.0), &t.scenario).unwrap();
        assert!(sol.decision.placement.ones().next().is_none());
    }
}

#[test]
fn exhaustive_agrees_with_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for i in 0..60 {
        let t = random_tiny_instance(&mut rng, 3, 2, 2);
        let ex = solve_exhaustive(&t.snapshot, &t.previous, t.theta, &t.z, &exhaustive(t.v), &t.scenario).unwrap();
        let or = oracle_p3(&t.snapshot, &t.previous, t.theta, &t.z, t.v, &t.scenario).unwrap();
        assert!(common::close(ex.objective, or.objective, 1e-9), "instance {i}: {} vs {}", ex.objective, or.objective);
        assert_eq!(ex.decision, or.decision, "instance {i}: tie-break differs");
        let gr = solve_greedy(&t.snapshot, &t.previous, t.theta, &t.z, &greedy(t.v), &t.scenario).unwrap();
        assert!(gr.objective >= ex.objective - 1e-9 * ex.objective.abs().max(1.0), "instance {i}");
        let rep = mec_core::cost::check_constraints(&t.z, &gr.decision, &t.snapshot, &t.scenario);
        assert!(rep.tactical_feasible(), "instance {i}: {rep:?}");
    }
}

#[test]
fn dominant_server_takes_both_endpoints() {
    let (s, mut snap) = fixtures::two_servers();
    let s = common::with_weights(&s, |c| {
        c.map_servers(|e| {
            e.maintain_unit_cost = 0.01;
            e.place_unit_cost = 0.01;
        })
    });
    // Server 1 cannot hold the service at all.
    snap.compute_cap[1] = 5.0;
    let z = DeploymentDecision::all(2);
    let prev = BinaryMatrix::zeros(2, 1);
    let ex = solve_exhaustive(&snap, &prev, 0.0, &z, &exhaustive(1.0), &s).unwrap();
    let gr = solve_greedy(&snap, &prev, 0.0, &z, &greedy(1.0), &s).unwrap();
    assert_relative_eq!(gr.objective, ex.objective, max_relative = 1e-12);
    for d in [&ex.decision, &gr.decision] {
        assert_eq!(d.assignment(Side::Src).unwrap(), vec![Some(0)]);
        assert_eq!(d.assignment(Side::Dst).unwrap(), vec![Some(0)]);
    }
}

#[test]
fn exhaustive_refuses_large_instances() {
    let s = common::desk();
    let snap = InfoStream::new(&s, 1).next().unwrap();
    let z = DeploymentDecision::all(9);
    let err = solve_exhaustive(&snap, &BinaryMatrix::zeros(9, 4), 0.0, &z, &exhaustive(1.0), &s).unwrap_err();
    assert!(matches!(err, Error::SearchTooLarge { .. }));
    assert!(err.to_string().contains("greedy"));
}

#[test]
fn single_slot_run_estimate_is_that_slot() {
    let (s, _) = fixtures::single_server(2.0);
    let z = DeploymentDecision::all(1);
    let run = run_spco(&z, InfoStream::new(&s, 1), 1, &exhaustive(10.0), &s).unwrap();
    assert_eq!(run.slots.len(), 1);
    assert_eq!(run.estimate, run.slots[0].tactical);
    assert!(run_spco(&z, InfoStream::new(&s, 1), 0, &exhaustive(10.0), &s).is_err());
}

#[test]
fn static_information_settles_after_the_first_slot() {
    let (s, _) = fixtures::single_server(2.0);
    let s = common::with_weights(&s, |c| c.distributions.mobility_step_std = 0.0);
    let z = DeploymentDecision::all(1);
    let run = run_spco(&z, InfoStream::new(&s, 1), 12, &exhaustive(10.0), &s).unwrap();
    // Slot 0 pays the placement; afterwards only maintenance remains.
    assert!(run.slots[0].tactical > run.slots[1].tactical);
    for w in run.slots[1..].windows(2) {
        assert_relative_eq!(w[0].tactical, w[1].tactical, max_relative = 1e-12);
    }
}

#[test]
fn empty_deployment_estimate_is_closed_form() {
    let s = common::desk();
    let z = DeploymentDecision::none(9);
    let run = run_spco(&z, InfoStream::new(&s, 2), 30, &greedy(100.0), &s).unwrap();
    let f: f64 = s.pairs().iter().map(|p| p.interaction_frequency).sum();
    assert_relative_eq!(run.estimate, s.weights().eta3 * 2.0 * s.weights().cloud_delay * f, max_relative = 1e-12);
}

#[test]
fn queue_never_goes_negative_and_grows_with_v() {
    let s = common::desk();
    // Middle column: three servers whose energy budget binds.
    let z = DeploymentDecision::from_mask(0b010_010_010, 9);
    assert_eq!(z.bitstring(), "010010010");
    let mut backlog = Vec::new();
    for v in [1.0, 10.0, 100.0] {
        let run = run_spco(&z, InfoStream::new(&s, 5), 2000, &greedy(v), &s).unwrap();
        assert!(run.slots.iter().all(|r| r.backlog >= 0.0));
        assert!(run.queue.backlog >= 0.0);
        backlog.push(run.mean_backlog());
    }
    assert!(backlog[0] <= backlog[1] && backlog[1] <= backlog[2] && backlog[0] < backlog[2], "{backlog:?}");
}

#[test]
fn runs_are_deterministic() {
    let s = common::desk();
    let z = DeploymentDecision::from_mask(0b1_0101_0101, 9);
    let a = run_spco(&z, InfoStream::new(&s, 9), 50, &greedy(100.0), &s).unwrap();
    let b = run_spco(&z, InfoStream::new(&s, 9), 50, &greedy(100.0), &s).unwrap();
    assert_eq!(a, b);
}

#[test]
fn trace_has_one_row_per_slot() {
    let (s, _) = fixtures::single_server(2.0);
    let run = run_spco(&DeploymentDecision::all(1), InfoStream::new(&s, 1), 4, &exhaustive(1.0), &s).unwrap();
    let mut buf = Vec::new();
    write_trace(&mut buf, &run).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("t,backlog,energy,operation,ue_delay,tactical\n"));
}
