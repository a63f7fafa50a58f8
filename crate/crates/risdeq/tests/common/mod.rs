//! Shared scenario builders for the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use risdeq::geometry::build_scenario;
use risdeq::{
    ChannelStatistics, Fading, GeometryConfig, PathLossConfig, PowerConfig, Protocol, SystemDims, TrainingConfig,
};

/// Noise power used by the small test scenarios, watts.
pub const SIGMA2_W: f64 = 1e-12;

/// Geometric scenario with default placement.
pub fn scenario(m: usize, k: usize, l: usize, n: usize, fading: Fading) -> ChannelStatistics<f64> {
    let dims = SystemDims::with_elements(m, k, l, n).unwrap();
    build_scenario(dims, &GeometryConfig::default(), &PathLossConfig::default(), fading).unwrap()
}

/// Randomized small scenario: dimensions, arc radii and span vary with `seed`.
pub fn random_scenario(seed: u64, fading: Fading) -> ChannelStatistics<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(4..=12);
    let k = rng.random_range(2..=5);
    let l = rng.random_range(1..=3);
    let n = [4, 6, 8, 9, 12][rng.random_range(0..5)];
    let geo = GeometryConfig {
        user_arc_radius: rng.random_range(150.0..450.0),
        ris_arc_radius: rng.random_range(60.0..140.0),
        arc_span_deg: rng.random_range(10.0..40.0),
        ..GeometryConfig::default()
    };
    let dims = SystemDims::with_elements(m, k, l, n).unwrap();
    build_scenario(dims, &geo, &PathLossConfig::default(), fading).unwrap()
}

/// Equal power split at `P_max = p_max_w` over the test noise level.
pub fn powers(p_max_w: f64, k: usize) -> PowerConfig {
    PowerConfig::equal(p_max_w, SIGMA2_W, k)
}

/// Training configuration with a pilot SNR of `rho_p`.
pub fn training(protocol: Protocol, rho_p: f64, k: usize) -> TrainingConfig {
    TrainingConfig::new(protocol, rho_p, k)
}

/// Relative difference `|a − b| / |b|`.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Largest relative difference between two slices.
pub fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| rel(*x, *y)).fold(0.0, f64::max)
}
