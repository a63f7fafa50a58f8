mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use risdeq::channels::{aggregate_channel, los_mean, sample_realization_trial, PhaseProfile};
use risdeq::estimation::*;
use risdeq::linalg::rel_frobenius;
use risdeq::montecarlo::TrialSampler;
use risdeq::scalar::{CMat, CVec, Cx};
use risdeq::{Fading, RisError, SystemDims};

const RHO_P: f64 = 2e11;

#[test]
fn overhead_symbols_follow_the_subphase_count() {
    let dims = SystemDims::with_elements(60, 20, 20, 100).unwrap();
    let cfg = training(Protocol::MmseDft, 1.0, 20);
    let dft = training_overhead(Protocol::MmseDft, &dims, &cfg).unwrap();
    assert!((dft.s - (2000.0 / 60.0 + 1.0)).abs() < 1e-12);
    assert_eq!(dft.symbols.round(), 687.0);
    assert!((dft.prefactor - (1.0 - dft.symbols / 2000.0)).abs() < 1e-15);
    let de = training_overhead(Protocol::DirectEstimate, &dims, &cfg).unwrap();
    assert_eq!(de.symbols, 20.0);
    assert!((de.prefactor - 0.99).abs() < 1e-15);
    let ceil = TrainingConfig { subphase_mode: SubphaseMode::Ceiling, ..cfg.clone() };
    assert_eq!(training_overhead(Protocol::MmseDft, &dims, &ceil).unwrap().symbols, 700.0);
    let free = TrainingConfig { perfect_csi_pays_training: false, ..cfg };
    assert_eq!(training_overhead(Protocol::PerfectCsi, &dims, &free).unwrap().prefactor, 1.0);
}

#[test]
fn infeasible_overhead_is_rejected() {
    let dims = SystemDims::with_elements(10, 20, 20, 320).unwrap();
    let cfg = training(Protocol::MmseDft, 1.0, 20);
    assert!(matches!(training_overhead(Protocol::MmseDft, &dims, &cfg), Err(RisError::InfeasibleOverhead { .. })));
    assert!(cfg.validate(&dims).is_err());
}

#[test]
fn dft_training_matrix_has_orthogonal_columns() {
    for (s, cols) in [(4, 4), (7, 5), (3, 1)] {
        let v = dft_training_matrix::<f64>(s, cols).unwrap();
        let gram = v.adjoint() * &v;
        let want = CMat::<f64>::identity(cols, cols) * Cx::new(s as f64, 0.0);
        assert!((gram - want).norm() < 1e-12);
        assert!(v.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
    }
    assert!(dft_training_matrix::<f64>(0, 1).is_err());
}

#[test]
fn dft_noise_variances_formula() {
    let stats = scenario(8, 2, 2, 4, Fading::Rician);
    let cfg = training(Protocol::MmseDft, 3.0, 2);
    let (v0, vl) = dft_noise_variances(&stats, &cfg);
    let s = 8.0 / 8.0 + 1.0;
    assert!(rel(v0, 1.0 / (s * 3.0 * 2.0)) < 1e-14);
    for l in 0..2 {
        assert!(rel(vl[l], v0 / (8.0 * stats.beta1()[l])) < 1e-14);
    }
}

/// Empirical covariance of `ĥ_k − μ_k` and the orthogonality statistic
/// `E[(h_k − ĥ_k)(ĥ_k − μ_k)^H]` (entrywise mean and standard error).
fn estimator_moments(protocol: Protocol, trials: u64) -> (Vec<CMat<f64>>, Vec<CMat<f64>>, Vec<(CMat<f64>, CMat<f64>)>) {
    let stats = scenario(4, 2, 2, 4, Fading::Rician);
    let phases = PhaseProfile::random(8, 17);
    let cfg = training(protocol, RHO_P * 1e-3, 2);
    let sampler = TrialSampler::new(&stats, &phases, &cfg).unwrap();
    let mu: Vec<CVec<f64>> = (0..2).map(|k| los_mean(&stats, &phases, k)).collect();
    let mut cov = vec![CMat::<f64>::zeros(4, 4); 2];
    let mut orth = vec![(CMat::<f64>::zeros(4, 4), CMat::<f64>::zeros(4, 4)); 2];
    for t in 0..trials {
        let ch = sampler.sample(99, t).unwrap();
        for k in 0..2 {
            let dev = &ch.h_hat[k] - &mu[k];
            cov[k] += &dev * dev.adjoint();
            let cross = (&ch.h[k] - &ch.h_hat[k]) * dev.adjoint();
            orth[k].0 += &cross;
            orth[k].1 += cross.map(|z| Cx::new(z.re * z.re, z.im * z.im));
        }
    }
    let n = trials as f64;
    let cov = cov.into_iter().map(|c| c / Cx::new(n, 0.0)).collect();
    let orth = orth
        .into_iter()
        .map(|(s, s2)| {
            let mean = &s / Cx::new(n, 0.0);
            let se = CMat::<f64>::from_fn(4, 4, |i, j| {
                let m = mean[(i, j)];
                let q = s2[(i, j)] / Cx::new(n, 0.0);
                Cx::new(((q.re - m.re * m.re) / n).sqrt(), ((q.im - m.im * m.im) / n).sqrt())
            });
            (mean, se)
        })
        .collect();
    let want = estimate_covariances(&stats, &cfg).unwrap();
    (cov, want, orth)
}

#[test]
fn estimator_covariance_and_orthogonality() {
    for protocol in [Protocol::MmseDft, Protocol::DirectEstimate] {
        let (emp, want, orth) = estimator_moments(protocol, 10_000);
        for k in 0..2 {
            let r = rel_frobenius(&emp[k], &want[k]);
            assert!(r < 0.05, "{protocol:?} user {k}: relative Frobenius error {r}");
            let (mean, se) = &orth[k];
            for (m, s) in mean.iter().zip(se.iter()) {
                assert!(m.re.abs() <= 5.0 * s.re + 1e-30 && m.im.abs() <= 5.0 * s.im + 1e-30);
            }
        }
    }
}

#[test]
fn perfect_csi_estimate_is_the_channel() {
    let stats = scenario(4, 2, 1, 4, Fading::Rician);
    let phases = PhaseProfile::random(4, 1);
    let cfg = training(Protocol::PerfectCsi, RHO_P, 2);
    let ch = TrialSampler::new(&stats, &phases, &cfg).unwrap().sample(1, 3).unwrap();
    assert_eq!(ch.h, ch.h_hat);
}

#[test]
fn dft_covariance_uses_shrunk_link_variances() {
    let stats = scenario(6, 2, 2, 4, Fading::Rician);
    let cfg = training(Protocol::MmseDft, 5.0, 2);
    let (wd, wl) = dft_shrinkage(&stats, &cfg, 1);
    let mut want = CMat::<f64>::identity(6, 6) * Cx::new(wd * stats.beta_n_d(1), 0.0);
    for l in 0..2 {
        want += &stats.gram()[l] * Cx::new(wl[l] * stats.beta_n_2(l, 1), 0.0);
    }
    assert!(rel_frobenius(&dft_estimate_covariance(&stats, &cfg, 1), &want) < 1e-14);
}

#[test]
fn de_matrices_satisfy_defining_identity() {
    let stats = scenario(6, 2, 2, 4, Fading::Rician);
    let cfg = training(Protocol::DirectEstimate, 1e10, 2);
    let de = DeMatrices::build(&stats, &cfg).unwrap();
    for k in 0..2 {
        let back = &de.r[k] + CMat::<f64>::identity(6, 6) * Cx::new(cfg.inverse_training_snr(), 0.0);
        let id = &back * &de.q[k];
        assert!((id - CMat::<f64>::identity(6, 6)).norm() < 1e-9);
    }
}

#[test]
fn full_training_pipeline_matches_effective_noise_levels() {
    // M = 2, N = 1, L = 2 → NL + 1 = 3 orthogonal sub-phases.
    let stats = scenario(2, 1, 2, 1, Fading::Rician);
    let cfg = training(Protocol::MmseDft, 1e12, 1);
    let s = 3usize;
    let base = 1.0 / (s as f64 * cfg.rho_p * cfg.tau_s);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trials = 20_000;
    let (mut v0, mut v1) = (0.0, [0.0; 2]);
    for t in 0..trials {
        let real = sample_realization_trial(&stats, 3, t);
        let obs = simulate_dft_observations_full(&real, &stats, &cfg, s, &mut rng).unwrap();
        v0 += (&obs.r0[0] - &real.h_d[0]).norm_squared() / 2.0;
        for l in 0..2 {
            v1[l] += (&obs.rl[l][0] - &real.h2[l][0]).norm_squared();
        }
    }
    let n = trials as f64;
    assert!(rel(v0 / n, base) < 0.03);
    for l in 0..2 {
        assert!(rel(v1[l] / n, base / (2.0 * stats.beta1()[l])) < 0.03);
    }
    assert!(simulate_dft_observations_full(&sample_realization_trial(&stats, 3, 0), &stats, &cfg, 2, &mut rng).is_err());
}

#[test]
fn observation_draws_are_reproducible() {
    let stats = scenario(4, 2, 1, 4, Fading::Rician);
    let phases = PhaseProfile::random(4, 1);
    let cfg = training(Protocol::DirectEstimate, RHO_P, 2);
    let real = sample_realization_trial(&stats, 8, 2);
    let a = simulate_de_observation_trial(&real, &stats, &phases, &cfg, 8, 2).unwrap();
    let b = simulate_de_observation_trial(&real, &stats, &phases, &cfg, 8, 2).unwrap();
    assert_eq!(a, b);
    let c = simulate_de_observation_trial(&real, &stats, &phases, &cfg, 8, 3).unwrap();
    assert_ne!(a, c);
    let h = aggregate_channel(&real, &stats, &phases, 0).unwrap();
    assert_eq!(h.len(), 4);
}

#[test]
fn estimates_reject_wrong_phase_length() {
    let stats = scenario(4, 2, 1, 4, Fading::Rician);
    let cfg = training(Protocol::DirectEstimate, RHO_P, 2);
    let de = DeMatrices::build(&stats, &cfg).unwrap();
    let y = vec![CVec::<f64>::zeros(4); 2];
    assert!(mmse_de_estimate(&y, &stats, &PhaseProfile::ones(3), &de).is_err());
}
