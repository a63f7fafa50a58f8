mod common;

use common::*;
use risdeq::channels::{los_mean, PhaseProfile};
use risdeq::detequiv::{sinr_det_de_rician, sinr_det_dft_rician, sinr_det_perfect_rician};
use risdeq::estimation::estimate_covariances;
use risdeq::linalg::norm2;
use risdeq::montecarlo::*;
use risdeq::scalar::{CMat, CVec, Cx};
use risdeq::{Fading, PowerConfig, Protocol};

const RHO_P: f64 = 2e11;

#[test]
fn mrt_scalar_normalization() {
    let h = vec![CVec::<f64>::from_vec(vec![Cx::new(0.0, 2.0), Cx::new(0.0, 0.0)])];
    let pw = PowerConfig { p_max_w: 9.0, sigma2_w: 1.0, p: vec![1.0] };
    let mrt = mrt_precoders(&h, &pw, None).unwrap();
    assert!((mrt.zeta - 1.5).abs() < 1e-15);
    assert!((mrt.g[(0, 0)] - Cx::new(0.0, 3.0)).norm() < 1e-15);
    let zero = vec![CVec::<f64>::zeros(2)];
    assert!(mrt_precoders(&zero, &pw, None).is_err());
}

#[test]
fn mrt_meets_the_average_power_budget() {
    let stats = scenario(6, 3, 1, 4, Fading::Rician);
    let phases = PhaseProfile::random(4, 2);
    let cfg = training(Protocol::DirectEstimate, RHO_P, 3);
    let pw = powers(4.0, 3);
    let sampler = TrialSampler::new(&stats, &phases, &cfg).unwrap();
    // Ψ from one seed, power measured on fresh draws.
    let psi: f64 = (0..10_000u64)
        .map(|t| {
            let ch = sampler.sample(1, t).unwrap();
            ch.h_hat.iter().zip(&pw.p).map(|(h, p)| p * norm2(h)).sum::<f64>()
        })
        .sum::<f64>()
        / 1e4;
    let power: f64 = (0..10_000u64)
        .map(|t| {
            let ch = sampler.sample(2, t).unwrap();
            let mrt = mrt_precoders(&ch.h_hat, &pw, Some(psi)).unwrap();
            (0..3).map(|k| pw.p[k] * mrt.g.column(k).norm_squared()).sum::<f64>()
        })
        .sum::<f64>()
        / 1e4;
    assert!(rel(power, 4.0) < 0.02, "average power {power}");
    let c = estimate_covariances(&stats, &cfg).unwrap();
    let det: f64 = (0..3)
        .map(|k| pw.p[k] * (norm2(&los_mean(&stats, &phases, k)) + (0..6).map(|i| c[k][(i, i)].re).sum::<f64>()))
        .sum();
    assert!(rel(psi, det) < 0.05);
}

#[test]
fn single_user_perfect_csi_matches_analytic_moments() {
    // h ~ CN(μ, β·I_M): E‖h‖² = ‖μ‖² + Mβ, Var‖h‖² = Mβ² + 2β‖μ‖².
    let stats = scenario(2, 1, 1, 1, Fading::Rician).without_ris();
    let mu = stats.h_bar_d()[0].clone();
    let beta = stats.beta_n_d(0);
    let m = 2.0;
    let mean = norm2(&mu) + m * beta;
    let var = m * beta * beta + 2.0 * beta * norm2(&mu);
    let pw = PowerConfig { p_max_w: 2.0, sigma2_w: SIGMA2_W, p: vec![1.0] };
    let rho = pw.rho();
    let want = mean * mean / (var + mean / rho);
    let cfg = training(Protocol::PerfectCsi, RHO_P, 1);
    let rep = mc_sinr(&stats, &PhaseProfile::ones(0), &cfg, &pw, &McConfig::new(100_000, 4)).unwrap();
    assert!(rel(rep.gamma_hat[0], want) < 0.02, "{} vs {want}", rep.gamma_hat[0]);
    assert!(rel(rep.mean_eff[0].re, mean) < 0.01);
    assert!(rel(rep.var_eff[0], var) < 0.03);
}

#[test]
fn effective_gain_mean_is_unbiased() {
    let stats = scenario(8, 3, 2, 4, Fading::Rician);
    let phases = PhaseProfile::random(8, 6);
    let pw = powers(1.0, 3);
    for protocol in [Protocol::MmseDft, Protocol::DirectEstimate] {
        let cfg = training(protocol, RHO_P * 1e-2, 3);
        let rep = mc_sinr(&stats, &phases, &cfg, &pw, &McConfig::new(10_000, 3)).unwrap();
        let c = estimate_covariances(&stats, &cfg).unwrap();
        for k in 0..3 {
            let want = norm2(&los_mean(&stats, &phases, k)) + (0..8).map(|i| c[k][(i, i)].re).sum::<f64>();
            assert!(rel(rep.mean_eff[k].re, want) < 0.05, "{protocol:?} user {k}");
        }
    }
}

#[test]
fn monte_carlo_tracks_the_deterministic_equivalent() {
    let stats = scenario(32, 4, 2, 16, Fading::Rician);
    let phases = PhaseProfile::random(32, 1);
    let pw = powers(1.0, 4);
    let cfg = training(Protocol::MmseDft, RHO_P, 4);
    let mc = McConfig::new(400, 12);
    let checks = [
        (Protocol::MmseDft, sinr_det_dft_rician(&stats, &phases, &pw, &cfg).unwrap()),
        (Protocol::DirectEstimate, sinr_det_de_rician(&stats, &phases, &pw, &cfg).unwrap()),
        (Protocol::PerfectCsi, sinr_det_perfect_rician(&stats, &phases, &pw, &cfg).unwrap()),
    ];
    for (protocol, det) in checks {
        let rep = mc_sinr(&stats, &phases, &cfg.with_protocol(protocol), &pw, &mc).unwrap();
        let r = rel(rep.mean_sinr, det.mean_sinr());
        assert!(r < 0.10, "{protocol:?}: MC {} vs det {} ({r})", rep.mean_sinr, det.mean_sinr());
        assert_eq!(rep.prefactor, det.prefactor);
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let stats = scenario(8, 3, 2, 4, Fading::Rician);
    let phases = PhaseProfile::random(8, 6);
    let pw = powers(1.0, 3);
    let cfg = training(Protocol::MmseDft, RHO_P, 3);
    let mc = McConfig::new(300, 77);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_sinr(&stats, &phases, &cfg, &pw, &mc).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(1));
    assert_ne!(one, mc_sinr(&stats, &phases, &cfg, &pw, &McConfig::new(300, 78)).unwrap());
}

#[test]
fn too_few_trials_rejected() {
    let stats = scenario(4, 2, 1, 4, Fading::Rician);
    let cfg = training(Protocol::MmseDft, RHO_P, 2);
    let r = mc_sinr(&stats, &PhaseProfile::ones(4), &cfg, &powers(1.0, 2), &McConfig::new(1, 0));
    assert!(r.is_err());
}

#[test]
fn instantaneous_sinr_trivial_cases() {
    let h = vec![CVec::<f64>::from_vec(vec![Cx::new(1.0, 1.0), Cx::new(0.0, 2.0)])];
    let pw = PowerConfig { p_max_w: 5.0, sigma2_w: 1.0, p: vec![0.7] };
    let g = instantaneous_sinr(&h, &[CMat::<f64>::zeros(2, 2)], &pw).unwrap();
    assert!(rel(g[0], 0.7 * 6.0 * 6.0 / (0.7 * 6.0 / 5.0)) < 1e-14);
    assert!(rel(g[0], 6.0 * 5.0) < 1e-14);

    let h = vec![
        CVec::<f64>::from_vec(vec![Cx::new(1.0, 0.0), Cx::new(0.0, 0.0)]),
        CVec::<f64>::from_vec(vec![Cx::new(0.0, 0.0), Cx::new(0.0, -1.0)]),
    ];
    let pw = PowerConfig { p_max_w: 2.0, sigma2_w: 1.0, p: vec![0.5, 0.5] };
    let g = instantaneous_sinr(&h, &[CMat::<f64>::zeros(2, 2), CMat::<f64>::zeros(2, 2)], &pw).unwrap();
    // No interference: γ = p·1/(Ψ/ρ) = 0.5/(1/2).
    assert!(rel(g[0], 1.0) < 1e-14 && rel(g[1], 1.0) < 1e-14);
    let rate = instantaneous_net_rate(&h, &[CMat::<f64>::zeros(2, 2), CMat::<f64>::zeros(2, 2)], &pw, 0.5).unwrap();
    assert!(rel(rate, 1.0) < 1e-14);
}

#[test]
fn net_rate_of_a_report_uses_the_shared_formula() {
    let stats = scenario(6, 2, 1, 4, Fading::Rician);
    let cfg = training(Protocol::DirectEstimate, RHO_P, 2);
    let rep = mc_sinr(&stats, &PhaseProfile::ones(4), &cfg, &powers(1.0, 2), &McConfig::new(50, 1)).unwrap();
    let want = risdeq::detequiv::net_sum_rate(&rep.gamma_hat, rep.prefactor).unwrap();
    assert!(rel(mc_net_sum_rate(&rep, rep.prefactor), want) < 1e-15);
    assert!(rel(rep.net_sum_rate, want) < 1e-15);
    assert!(rep.net_sum_rate_stderr > 0.0);
}

#[test]
fn mc_average_is_deterministic() {
    let mc = McConfig::new(40, 0);
    let (mean, se) = mc_average::<f64, _>(&mc, |t| Ok(t as f64)).unwrap();
    assert!((mean - 19.5).abs() < 1e-12);
    assert!(se > 0.0);
}

#[test]
fn reported_stderr_matches_replicate_spread() {
    let stats = scenario(8, 3, 2, 4, Fading::Rician);
    let phases = PhaseProfile::random(8, 6);
    let pw = powers(1.0, 3);
    let cfg = training(Protocol::DirectEstimate, RHO_P * 1e-2, 3);
    let reps: Vec<_> =
        (0..40).map(|s| mc_sinr(&stats, &phases, &cfg, &pw, &McConfig::new(200, 1000 + s)).unwrap()).collect();
    let rates: Vec<f64> = reps.iter().map(|r| r.net_sum_rate).collect();
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    let spread = (rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (rates.len() - 1) as f64).sqrt();
    let reported = reps.iter().map(|r| r.net_sum_rate_stderr).sum::<f64>() / reps.len() as f64;
    assert!(reported > 0.6 * spread && reported < 1.6 * spread, "reported {reported} vs spread {spread}");
}
