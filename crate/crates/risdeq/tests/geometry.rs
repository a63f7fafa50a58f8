mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use risdeq::channels::*;
use risdeq::geometry::*;
use risdeq::linalg::{frobenius, rel_frobenius};
use risdeq::scalar::{CMat, CVec, Cx};
use risdeq::{Fading, GeometryConfig, PathLossConfig, SystemDims};

#[test]
fn path_loss_values() {
    assert!(rel(path_loss(-30.0, 1.0, 2.0).unwrap(), 1e-3) < 1e-14);
    assert!(rel(path_loss(-30.0, 250.0, 2.0).unwrap(), 1.6e-8) < 1e-12);
    assert!(rel(path_loss(-30.0, 400.0, 3.5).unwrap(), 1e-3 * 400f64.powf(-3.5)) < 1e-14);
    assert!(path_loss(-30.0, 0.0, 2.0).is_err());
}

#[test]
fn rician_factor_values() {
    let k0 = rician_factor(0.0);
    assert!(rel(k0, 10f64.powf(1.3)) < 1e-14);
    assert!((k0 / (k0 + 1.0) - 0.952).abs() < 1e-3);
    assert!((rician_factor(1300.0 / 3.0) - 1.0).abs() < 1e-12);
    assert_eq!(rician_factor_with(500.0, KappaUnits::Linear), 0.0);
}

#[test]
fn direct_gain_of_the_reference_scenario() {
    let stats = scenario(60, 20, 20, 60, Fading::Rician);
    for b in stats.beta_d() {
        assert!(rel(*b, 1e-3 * 400f64.powf(-3.5)) < 1e-12);
    }
    assert_eq!(stats.dims().n1 * stats.dims().n2, 60);
    assert_eq!((stats.dims().n1, stats.dims().n2), (6, 10));
}

#[test]
fn no_ris_scenario_has_empty_ris_arrays() {
    let dims = SystemDims::with_elements(4, 2, 0, 1).unwrap();
    let stats =
        build_scenario::<f64>(dims, &GeometryConfig::default(), &PathLossConfig::default(), Fading::Rician).unwrap();
    assert!(stats.h1().is_empty() && stats.beta2().is_empty() && stats.h_bar2().is_empty());
    assert_eq!(stats.h_bar_d().len(), 2);
}

#[test]
fn los_vectors_have_the_los_amplitude() {
    let stats = scenario(4, 1, 1, 16, Fading::Rician);
    let (b, k) = (stats.beta2()[0][0], stats.kappa2()[0][0]);
    let amp = (b * k / (k + 1.0)).sqrt();
    assert!(stats.h_bar2()[0][0].iter().all(|z| rel(z.norm(), amp) < 1e-12));
    let (b, k) = (stats.beta_d()[0], stats.kappa_d()[0]);
    assert!(stats.h_bar_d()[0].iter().all(|z| rel(z.norm(), (b * k / (k + 1.0)).sqrt()) < 1e-12));
}

#[test]
fn bs_ris_channel_properties() {
    let geo = GeometryConfig::default();
    let pl = PathLossConfig::default();
    let dims = SystemDims::with_elements(32, 2, 2, 64).unwrap();
    let h_left = los_bs_ris_channel::<f64>(&geo, &pl, &dims, 0).unwrap();
    let h_right = los_bs_ris_channel::<f64>(&geo, &pl, &dims, 1).unwrap();
    let beta1 = path_loss(-30.0, 250.0, 2.0).unwrap();
    assert!(h_left.iter().all(|z| rel(z.norm(), beta1.sqrt()) < 1e-12));
    assert!(rel(frobenius(&h_left), frobenius(&h_right)) < 1e-12);
    assert!(bs_ris_rank(&h_left) > 1);
    assert!(los_bs_ris_channel::<f64>(&geo, &pl, &dims, 2).is_err());
}

#[test]
fn semi_unitary_channels() {
    let h = semi_unitary_bs_ris::<f64>(16, 16, 2.0, 3).unwrap();
    let gram = &h * h.adjoint();
    assert!((gram - CMat::<f64>::identity(16, 16) * Cx::new(32.0, 0.0)).norm() < 1e-10);
    let h = semi_unitary_bs_ris::<f64>(32, 64, 1.0, 3).unwrap();
    let tr: f64 = (&h * h.adjoint()).diagonal().iter().map(|z| z.re).sum();
    assert!(rel(tr, 32.0 * 64.0) < 1e-12);
    assert_eq!(h, semi_unitary_bs_ris::<f64>(32, 64, 1.0, 3).unwrap());
    assert!(semi_unitary_bs_ris::<f64>(8, 4, 1.0, 0).is_err());
}

#[test]
fn statistics_invariants_are_enforced() {
    let stats = scenario(4, 2, 1, 4, Fading::Rician);
    let ray = stats.to_rayleigh();
    assert_eq!(ray.fading(), Fading::Rayleigh);
    assert!(ray.kappa_d().iter().all(|k| *k == 0.0));
    let parts = StatisticsParts {
        dims: *stats.dims(),
        fading: Fading::Rician,
        beta_d: stats.beta_d().to_vec(),
        beta2: stats.beta2().to_vec(),
        beta1: stats.beta1().to_vec(),
        kappa_d: stats.kappa_d().to_vec(),
        kappa2: stats.kappa2().to_vec(),
        h_bar_d: vec![CVec::<f64>::zeros(4); 2],
        h_bar2: stats.h_bar2().to_vec(),
        h1: stats.h1().to_vec(),
    };
    assert!(ChannelStatistics::from_parts(parts.clone()).is_err());
    let mut bad = parts.clone();
    bad.h_bar_d = stats.h_bar_d().to_vec();
    bad.beta_d[0] = -1.0;
    assert!(ChannelStatistics::from_parts(bad).is_err());
    let mut bad = parts;
    bad.h_bar_d = stats.h_bar_d().to_vec();
    bad.fading = Fading::Rayleigh;
    assert!(ChannelStatistics::from_parts(bad).is_err());
}

#[test]
fn geometry_validation() {
    assert!(GeometryConfig { wavelength: 0.0, ..GeometryConfig::default() }.validate().is_err());
    assert!(PathLossConfig { alpha_bs_user: 1.5, ..PathLossConfig::default() }.validate().is_err());
    assert!(SystemDims::new(0, 1, 1, 1, 1).is_err());
    assert!(SystemDims::with_grid(4, 1, 1, 12, 3, 5).is_err());
    assert!(square_factor(0).is_err());
}

#[test]
fn realization_moments_match_statistics() {
    let stats = scenario(3, 1, 1, 4, Fading::Rician);
    let phases = PhaseProfile::random(4, 2);
    let trials = 100_000u64;
    let mu = los_mean(&stats, &phases, 0);
    let a = nlos_covariance(&stats, 0);
    let mut mean = CVec::<f64>::zeros(3);
    let mut cov = CMat::<f64>::zeros(3, 3);
    let mut direct = CMat::<f64>::zeros(3, 3);
    for t in 0..trials {
        let real = sample_realization_trial(&stats, 5, t);
        let h = aggregate_channel(&real, &stats, &phases, 0).unwrap();
        mean += &h;
        let dev = &h - &mu;
        cov += &dev * dev.adjoint();
        let dd = &real.h_d[0] - &stats.h_bar_d()[0];
        direct += &dd * dd.adjoint();
    }
    let n = Cx::new(trials as f64, 0.0);
    mean /= n;
    cov /= n;
    direct /= n;
    let scale = (a[(0, 0)].re / trials as f64).sqrt();
    assert!((mean - &mu).iter().all(|z| z.norm() < 4.0 * scale * 2f64.sqrt()));
    assert!(rel_frobenius(&cov, &a) < 0.05);
    let want = CMat::<f64>::identity(3, 3) * Cx::new(stats.beta_n_d(0), 0.0);
    assert!(rel_frobenius(&direct, &want) < 0.05);
}

#[test]
fn rayleigh_realizations_are_zero_mean() {
    let stats = scenario(2, 1, 1, 1, Fading::Rayleigh);
    let trials = 100_000u64;
    let mut mean = CVec::<f64>::zeros(2);
    for t in 0..trials {
        mean += &sample_realization_trial(&stats, 1, t).h_d[0];
    }
    mean /= Cx::new(trials as f64, 0.0);
    let sd = (stats.beta_d()[0] / 2.0 / trials as f64).sqrt();
    assert!(mean.iter().all(|z| z.re.abs() < 4.0 * sd && z.im.abs() < 4.0 * sd));
}

#[test]
fn aggregate_channel_selector_example() {
    let stats = scenario(3, 1, 1, 4, Fading::Rician);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut real = sample_realization(&stats, &mut rng);
    real.h2[0][0] = CVec::<f64>::from_fn(4, |i, _| if i == 0 { Cx::new(1.0, 0.0) } else { Cx::new(0.0, 0.0) });
    let h = aggregate_channel(&real, &stats, &PhaseProfile::ones(4), 0).unwrap();
    let want = &real.h_d[0] + stats.h1()[0].column(0);
    assert!((h - want).norm() < 1e-18);
    assert!(aggregate_channel(&real, &stats, &PhaseProfile::ones(3), 0).is_err());
}

#[test]
fn equivalent_covariance_is_phase_independent_and_reduces_without_ris() {
    let stats = scenario(4, 2, 2, 4, Fading::Rician);
    let a = equivalent_stats(&stats, &PhaseProfile::random(8, 1)).unwrap();
    let b = equivalent_stats(&stats, &PhaseProfile::random(8, 2)).unwrap();
    assert_eq!(a.a, b.a);
    assert_ne!(a.mu, b.mu);
    let ray = stats.to_rayleigh().without_ris();
    let e = equivalent_stats(&ray, &PhaseProfile::ones(0)).unwrap();
    assert!(e.mu[0].norm() == 0.0);
    let want = CMat::<f64>::identity(4, 4) * Cx::new(ray.beta_d()[0], 0.0);
    assert!(rel_frobenius(&e.a[0], &want) < 1e-15);
}

#[test]
fn huge_rician_factor_gives_the_los_channel() {
    let base = scenario(4, 1, 1, 4, Fading::Rician);
    let parts = StatisticsParts {
        dims: *base.dims(),
        fading: Fading::Rician,
        beta_d: base.beta_d().to_vec(),
        beta2: base.beta2().to_vec(),
        beta1: base.beta1().to_vec(),
        kappa_d: vec![1e12],
        kappa2: vec![vec![1e12]],
        h_bar_d: base.h_bar_d().to_vec(),
        h_bar2: base.h_bar2().to_vec(),
        h1: base.h1().to_vec(),
    };
    let stats = ChannelStatistics::from_parts(parts).unwrap();
    let real = sample_realization_trial(&stats, 0, 0);
    assert!((&real.h_d[0] - &stats.h_bar_d()[0]).norm() < 1e-5 * stats.h_bar_d()[0].norm());
}

#[test]
fn substreams_are_distinct_and_reproducible() {
    use rand::Rng;
    let a: u64 = substream(1, 2, 3, StreamTag::DirectLink).random();
    let b: u64 = substream(1, 2, 3, StreamTag::DirectLink).random();
    let c: u64 = substream(1, 2, 3, StreamTag::RisLink(0)).random();
    let d: u64 = substream(1, 3, 3, StreamTag::DirectLink).random();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_ne!(a, d);
}

proptest! {
    #[test]
    fn square_factor_is_most_square(n in 1usize..5000) {
        let (a, b) = square_factor(n).unwrap();
        prop_assert_eq!(a * b, n);
        prop_assert!(a <= b);
        for c in (a + 1)..=((n as f64).sqrt() as usize) {
            prop_assert!(n % c != 0);
        }
    }

    #[test]
    fn phase_profiles_are_unit_modulus(theta in proptest::collection::vec(-10.0f64..10.0, 1..40)) {
        let p = PhaseProfile::<f64>::from_angles(&theta);
        prop_assert!(p.max_modulus_error() < 1e-12);
        prop_assert!(PhaseProfile::new(p.as_vector().clone()).is_ok());
        let scaled = p.as_vector() * Cx::new(1.5, 0.0);
        prop_assert!(PhaseProfile::new(scaled).is_err());
    }

    #[test]
    fn arc_positions_keep_their_radius(k in 1usize..30, i in 0usize..30) {
        let geo = GeometryConfig::default();
        let i = i % k;
        let u = geo.user_position(i, k);
        prop_assert!((u.norm() - 400.0).abs() < 1e-9);
        prop_assert!(geo.arc_angle(i, k).abs() <= 30f64.to_radians() + 1e-12);
    }
}
