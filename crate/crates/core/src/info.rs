//! Seeded generation of per-slot network information.
//!
//! An [`InfoStream`] yields one [`NetworkSnapshot`] per slot. Capacities are
//! drawn independently every slot from a normal distribution truncated below
//! at 1% of its mean; user endpoints follow a Gaussian random walk reflected
//! at the arena walls. Every random draw comes from its own ChaCha8 generator
//! keyed by `(stream seed, slot, purpose)`, so a stream is reproducible and
//! the capacity draws do not depend on how many users exist (and vice versa).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::Scenario;
use crate::model::*;

const CAPACITY_TAG: u64 = 0x6361_7061;
const MOBILITY_TAG: u64 = 0x6d6f_6269;
const BATCH_TAG: u64 = 0x6261_7463;

/// Lower truncation point as a fraction of the mean.
pub const TRUNCATION_FLOOR: f64 = 0.01;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Mixes a base seed, a purpose tag and an index into an independent sub-seed.
pub fn derive_seed(base: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ tag) ^ index)
}

/// One draw from N(mean, std²) conditioned on being at least `TRUNCATION_FLOOR·mean`.
pub fn truncated_normal(rng: &mut ChaCha8Rng, mean: f64, std: f64) -> f64 {
    let floor = TRUNCATION_FLOOR * mean;
    if std == 0.0 {
        return mean;
    }
    let normal = Normal::new(mean, std).expect("validated std is finite and non-negative");
    // Rejection is cheap unless std dwarfs the mean; give up after a while.
    for _ in 0..10_000 {
        let v = normal.sample(rng);
        if v >= floor {
            return v;
        }
    }
    floor
}

/// Folds `v` back into `[0, side]` as if bouncing off both walls.
pub fn reflect(v: f64, side: f64) -> f64 {
    let period = 2.0 * side;
    let r = v.rem_euclid(period);
    if r > side {
        period - r
    } else {
        r
    }
}

/// Draws slot `t` of the stream keyed by `stream_seed`.
///
/// Slot 0 keeps `previous` positions as they are (the initial layout); later
/// slots move every endpoint by one isotropic Gaussian step.
pub fn generate_snapshot(
    dist: &ScenarioDistributions,
    servers: usize,
    wired: &WiredCapacity,
    previous: &[[Point; 2]],
    stream_seed: u64,
    t: usize,
) -> NetworkSnapshot {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(stream_seed, CAPACITY_TAG, t as u64));
    let storage_cap = (0..servers).map(|_| truncated_normal(&mut rng, dist.storage_mean, dist.storage_std)).collect();
    let compute_cap = (0..servers).map(|_| truncated_normal(&mut rng, dist.compute_mean, dist.compute_std)).collect();

    let ue_positions = if t == 0 || dist.mobility_step_std == 0.0 {
        previous.to_vec()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(stream_seed, MOBILITY_TAG, t as u64));
        let step = Normal::new(0.0, dist.mobility_step_std).expect("validated step std");
        let side = dist.arena_side;
        previous
            .iter()
            .map(|ends| {
                ends.map(|p| {
                    let dx = step.sample(&mut rng);
                    let dy = step.sample(&mut rng);
                    Point::new(reflect(p.x + dx, side), reflect(p.y + dy, side))
                })
            })
            .collect()
    };

    NetworkSnapshot { slot: t, storage_cap, compute_cap, wired: wired.clone(), ue_positions }
}

/// Sequential source of snapshots; slot `t` exists only after slots `0..t`
/// have been produced.
#[derive(Debug, Clone)]
pub struct InfoStream {
    dist: ScenarioDistributions,
    servers: usize,
    wired: WiredCapacity,
    positions: Vec<[Point; 2]>,
    seed: u64,
    next_slot: usize,
    horizon: Option<usize>,
}

impl InfoStream {
    /// Unbounded stream starting from the scenario's initial user layout.
    pub fn new(scenario: &Scenario, seed: u64) -> Self {
        Self {
            dist: *scenario.distributions(),
            servers: scenario.server_count(),
            wired: scenario.wired().clone(),
            positions: scenario.initial_positions(),
            seed,
            next_slot: 0,
            horizon: None,
        }
    }

    /// Stops after `horizon` slots.
    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = Some(horizon);
        self
    }

    /// The a-priori known distribution parameters.
    pub fn distributions(&self) -> &ScenarioDistributions {
        &self.dist
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_slot(&self) -> usize {
        self.next_slot
    }
}

impl Iterator for InfoStream {
    type Item = NetworkSnapshot;

    fn next(&mut self) -> Option<NetworkSnapshot> {
        if self.horizon.is_some_and(|h| self.next_slot >= h) {
            return None;
        }
        let snap = generate_snapshot(&self.dist, self.servers, &self.wired, &self.positions, self.seed, self.next_slot);
        self.positions.clone_from(&snap.ue_positions);
        self.next_slot += 1;
        Some(snap)
    }
}

/// `count` independent streams of `horizon` slots with sub-seeds derived from `base_seed`.
pub fn sample_scenario_batch(scenario: &Scenario, base_seed: u64, count: usize, horizon: usize) -> Vec<InfoStream> {
    (0..count)
        .map(|i| InfoStream::new(scenario, derive_seed(base_seed, BATCH_TAG, i as u64)).with_horizon(horizon))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn reflection_stays_inside() {
        assert_eq!(reflect(-3.0, 10.0), 3.0);
        assert_eq!(reflect(12.0, 10.0), 8.0);
        assert_eq!(reflect(25.0, 10.0), 5.0);
        assert_eq!(reflect(4.0, 10.0), 4.0);
    }

    #[test]
    fn degenerate_normal_returns_mean() {
        let mut s = fixtures::desk_config();
        s.distributions.storage_std = 0.0;
        s.distributions.compute_std = 0.0;
        let s = s.validate().unwrap();
        for snap in InfoStream::new(&s, 9).take(20) {
            assert!(snap.storage_cap.iter().all(|&c| c == 200.0));
            assert!(snap.compute_cap.iter().all(|&c| c == 200.0));
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let s = fixtures::desk_config().validate().unwrap();
        let a: Vec<_> = InfoStream::new(&s, 4).take(30).collect();
        let b: Vec<_> = InfoStream::new(&s, 4).take(30).collect();
        let c: Vec<_> = InfoStream::new(&s, 5).take(30).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn horizon_limits_stream() {
        let s = fixtures::desk_config().validate().unwrap();
        let batch = sample_scenario_batch(&s, 1, 3, 7);
        assert_eq!(batch.len(), 3);
        assert!(batch.into_iter().all(|st| st.count() == 7));
    }
}
