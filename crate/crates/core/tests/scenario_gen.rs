mod common;

use mec_core::info::*;
use mec_core::{Error, ScenarioConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

#[test]
fn bundled_scenarios_validate() {
    for name in ["desk", "tiny"] {
        let path = format!("{}/../../scenarios/{name}.toml", env!("CARGO_MANIFEST_DIR"));
        ScenarioConfig::load_scenario(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    let s = common::desk();
    assert_eq!((s.server_count(), s.service_count(), s.pair_count()), (9, 4, 10));
    assert!(s.pairs().iter().all(|p| p.interaction_frequency == 0.5));
}

#[test]
fn violations_point_at_file_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    let text = mec_core::fixtures::DESK_TOML
        .replace("periods = 200", "periods = 0")
        .replace("idle_power = 100.0", "idle_power = 300.0");
    std::fs::write(&path, &text).unwrap();
    let Err(Error::Invalid(report)) = ScenarioConfig::load_scenario(&path) else { panic!("expected a validation error") };
    let line_of = |needle: &str| text.lines().position(|l| l.starts_with(needle)).unwrap() + 1;
    let periods = report.violations.iter().find(|v| v.field == "time.periods").unwrap();
    assert_eq!(periods.line, Some(line_of("periods")));
    assert!(report.mentions("power ordering violated"));
    let shown = report.to_string();
    assert!(shown.contains(&format!("bad.toml:{}: time.periods", line_of("periods"))), "{shown}");
}

#[test]
fn degenerate_distributions_give_the_means() {
    let s = common::with_weights(&common::desk(), |c| {
        c.distributions.storage_std = 0.0;
        c.distributions.compute_std = 0.0;
    });
    for snap in InfoStream::new(&s, 4).with_horizon(20) {
        assert!(snap.storage_cap.iter().all(|&v| v == 200.0));
        assert!(snap.compute_cap.iter().all(|&v| v == 200.0));
    }
}

#[test]
fn streams_are_reproducible_and_seed_dependent() {
    let s = common::desk();
    let a: Vec<_> = InfoStream::new(&s, 42).with_horizon(50).collect();
    let b: Vec<_> = InfoStream::new(&s, 42).with_horizon(50).collect();
    let c: Vec<_> = InfoStream::new(&s, 43).with_horizon(50).collect();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn snapshots_rebuild_from_seed_and_slot() {
    let s = common::desk();
    let dist = InfoStream::new(&s, 8).distributions().clone();
    let mut positions = s.initial_positions();
    for (t, snap) in InfoStream::new(&s, 8).with_horizon(10).enumerate() {
        let again = generate_snapshot(&dist, s.server_count(), s.wired(), &positions, 8, t);
        assert_eq!(again, snap);
        positions = snap.ue_positions.clone();
    }
}

#[test]
fn capacity_draws_match_their_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws: Vec<f64> = (0..10_000).map(|_| truncated_normal(&mut rng, 200.0, 5.0)).collect();
    let (m, sd) = mean_std(&draws);
    assert!((m - 200.0).abs() < 0.5, "mean {m}");
    assert!((sd - 5.0).abs() < 0.5, "std {sd}");
}

#[test]
fn truncation_keeps_capacities_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let min = (0..1_000_000).map(|_| truncated_normal(&mut rng, 10.0, 20.0)).fold(f64::INFINITY, f64::min);
    assert!(min >= 0.1, "min {min}");
}

#[test]
fn walkers_stay_in_the_arena() {
    let s = common::with_weights(&common::desk(), |c| c.distributions.mobility_step_std = 150.0);
    let side = s.distributions().arena_side;
    for snap in InfoStream::new(&s, 3).with_horizon(500) {
        for p in snap.ue_positions.iter().flatten() {
            assert!((0.0..=side).contains(&p.x) && (0.0..=side).contains(&p.y), "{p:?}");
        }
    }
}

#[test]
fn batches_are_independent_and_unbiased() {
    let s = common::desk();
    let one = sample_scenario_batch(&s, 9, 1, 5);
    assert_eq!(one.len(), 1);
    let seed = one[0].seed();
    let a: Vec<_> = sample_scenario_batch(&s, 9, 1, 5).remove(0).collect();
    let b: Vec<_> = InfoStream::new(&s, seed).with_horizon(5).collect();
    assert_eq!(a, b);

    let batch = sample_scenario_batch(&s, 9, 100, 10);
    let streams: Vec<Vec<_>> = batch.into_iter().map(|st| st.collect()).collect();
    assert_ne!(streams[0], streams[1]);
    let means: Vec<f64> = streams
        .iter()
        .map(|st: &Vec<mec_core::model::NetworkSnapshot>| {
            let v: Vec<f64> = st.iter().flat_map(|x| x.compute_cap.iter().copied()).collect();
            v.iter().sum::<f64>() / v.len() as f64
        })
        .collect();
    let pooled = means.iter().sum::<f64>() / means.len() as f64;
    let draws = 100.0 * 10.0 * 9.0;
    let se = 5.0 / f64::sqrt(draws);
    assert!((pooled - 200.0).abs() < 3.0 * se, "pooled mean {pooled}, se {se}");
}

#[test]
fn horizon_bounds_the_stream() {
    let s = common::desk();
    let mut st = InfoStream::new(&s, 1).with_horizon(3);
    assert_eq!(st.next_slot(), 0);
    assert_eq!(st.by_ref().count(), 3);
    assert!(st.next().is_none());
}
