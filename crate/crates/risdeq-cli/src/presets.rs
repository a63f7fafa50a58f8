//! Built-in experiment configurations for the six reference figures.
//!
//! Common parameters: BS at the origin with a half-wavelength ULA along z;
//! users on a 400 m arc and RISs on a 250 m arc, both spanning ±30° about
//! the y-axis; −30 dB reference gain; path-loss exponents 2 (BS–RIS),
//! 2.8 (RIS–user) and 3.5 (BS–user); `κ = 13 − 0.03·d` dB; `p_k = 1/K`;
//! `P_max = 10 W`; `σ² = −94 dBm`; `τ_C = 2000`, `τ_S = K`.
//!
//! Two calibration constants are not part of the nominal parameter list:
//! a 32.63 dB receiver noise offset and a 0.2 W pilot power. They pin the
//! no-RIS baselines to their reference levels (see the README).

use crate::config::{
    ExperimentConfig, GaSection, GeometrySection, MethodConfig, PathLossSection, PgaSection, PowerSection,
    ScenarioConfig, SemiUnitarySection, SweepConfig, TrainingSection,
};
use anyhow::{bail, Result};

/// Names accepted by [`figure_preset`].
pub const PRESET_NAMES: [&str; 6] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"];

/// Receiver noise offset (noise figure plus margin), dB.
pub const NOISE_OFFSET_DB: f64 = 32.63;
/// Pilot power, watts.
pub const PILOT_POWER_W: f64 = 0.2;
/// Candidate profiles of the "optimized" Rayleigh curves.
pub const RAYLEIGH_CANDIDATES: usize = 16;
/// Coherence blocks averaged by the instantaneous-CSI GA curve.
pub const GA_BLOCKS: usize = 4;

fn method(label: &str, protocol: &str, design: &str, evaluation: &str) -> MethodConfig {
    MethodConfig {
        label: label.into(),
        protocol: protocol.into(),
        phase_design: design.into(),
        evaluation: evaluation.into(),
        ris: true,
        centralized: false,
        n: None,
        candidates: RAYLEIGH_CANDIDATES,
        trials: None,
        selection_trials: None,
    }
}

fn no_ris(label: &str, protocol: &str, evaluation: &str) -> MethodConfig {
    MethodConfig { ris: false, ..method(label, protocol, "fixed", evaluation) }
}

fn scenario(m: usize, k: usize, l: usize, n: usize, fading: &str) -> ScenarioConfig {
    ScenarioConfig {
        m,
        k,
        l,
        n,
        fading: fading.into(),
        kappa_units: "db".into(),
        geometry: GeometrySection {
            user_arc_radius: Some(400.0),
            ris_arc_radius: Some(250.0),
            arc_span_deg: Some(30.0),
            d_bs: Some(0.5),
            d_ris: Some(0.5),
            wavelength: None,
        },
        path_loss: PathLossSection {
            c0_db: Some(-30.0),
            alpha_bs_ris: Some(2.0),
            alpha_ris_user: Some(2.8),
            alpha_bs_user: Some(3.5),
        },
        semi_unitary: None,
    }
}

fn base(name: &str, scenario: ScenarioConfig, sweep: SweepConfig, methods: Vec<MethodConfig>) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        seed: 1,
        output: None,
        timing: true,
        scenario,
        training: TrainingSection {
            tau_c: 2000.0,
            tau_s: None,
            pilot_power_w: PILOT_POWER_W,
            subphase_mode: "fractional".into(),
            perfect_csi_pays_training: true,
        },
        powers: PowerSection { p_max_w: 10.0, noise_dbm: -94.0, noise_offset_db: NOISE_OFFSET_DB },
        sweep,
        methods,
        pga: PgaSection::default(),
        ga: GaSection::default(),
        trials: 500,
        pga_trace: false,
    }
}

fn sweep(variable: &str, values: Vec<f64>) -> SweepConfig {
    SweepConfig { variable: variable.into(), values, fixed_total_elements: None }
}

fn power_sweep_methods(with_baselines: bool) -> Vec<MethodConfig> {
    let mut m = vec![
        method("Perfect CSI-opt. RISs (Th)", "perfect", "pga_scsi", "deterministic"),
        method("DFT-CE-opt. RISs (Th)", "dft", "pga_scsi", "deterministic"),
        method("DE-CE-opt. RISs (Th)", "de", "pga_scsi", "deterministic"),
        method("DFT-CE-opt. RISs (MC)", "dft", "pga_scsi", "monte_carlo"),
        method("DE-CE-opt. RISs (MC)", "de", "pga_scsi", "monte_carlo"),
        method("Perfect CSI-rand. RISs (Th)", "perfect", "random", "deterministic"),
        method("DFT-CE-rand. RISs (Th)", "dft", "random", "deterministic"),
        method("DE-CE-rand. RISs (Th)", "de", "random", "deterministic"),
    ];
    if with_baselines {
        m.push(no_ris("No RISs-Perfect CSI", "perfect", "deterministic"));
        m.push(no_ris("No RISs-Imperfect CSI", "de", "deterministic"));
    }
    m
}

fn power_values() -> Vec<f64> {
    (1..=10).map(|i| 2.0 * i as f64).collect()
}

/// Returns the named preset.
pub fn figure_preset(name: &str) -> Result<ExperimentConfig> {
    let cfg = match name {
        // Average SINR against the power budget.
        "fig2" => base(
            "fig2",
            scenario(60, 20, 20, 60, "rician"),
            sweep("p_max_w", power_values()),
            power_sweep_methods(false),
        ),
        // Net sum-rate against the power budget, with direct-link baselines.
        "fig3" => base(
            "fig3",
            scenario(60, 20, 20, 60, "rician"),
            sweep("p_max_w", power_values()),
            power_sweep_methods(true),
        ),
        // Net sum-rate and training overhead against N.
        "fig4" => {
            let ga = MethodConfig {
                trials: Some(GA_BLOCKS),
                ..method("DFT-CE (MRT), I-CSI (RISs)", "dft", "ga_icsi", "instantaneous")
            };
            base(
                "fig4",
                scenario(60, 20, 20, 100, "rician"),
                sweep("n", vec![20.0, 60.0, 80.0, 100.0, 160.0, 240.0, 320.0]),
                vec![
                    ga,
                    method("DFT-CE (MRT), S-CSI (RISs)", "dft", "pga_scsi", "deterministic"),
                    method("DE-CE (MRT), S-CSI (RISs)", "de", "pga_scsi", "deterministic"),
                    method("Perfect CSI (MRT), S-CSI (RISs)", "perfect", "pga_scsi", "deterministic"),
                    no_ris("No RISs, imperfect CSI", "de", "deterministic"),
                    no_ris("No RISs, perfect CSI", "perfect", "deterministic"),
                ],
            )
        }
        // Distributed against centralized RISs at a fixed element budget.
        "fig5" => {
            let cent = |label: &str, protocol: &str| MethodConfig {
                centralized: true,
                ..method(label, protocol, "pga_scsi", "deterministic")
            };
            let mut cfg = base(
                "fig5",
                scenario(60, 20, 20, 60, "rician"),
                SweepConfig {
                    variable: "l".into(),
                    values: vec![2.0, 4.0, 10.0, 20.0, 30.0, 40.0],
                    fixed_total_elements: Some(1200),
                },
                vec![
                    method("Dist. RISs, DFT-CE", "dft", "pga_scsi", "deterministic"),
                    method("Dist. RISs, DE-CE", "de", "pga_scsi", "deterministic"),
                    method("Dist. RISs, perfect CSI", "perfect", "pga_scsi", "deterministic"),
                    cent("Cent. RIS, DFT-CE", "dft"),
                    cent("Cent. RIS, DE-CE", "de"),
                    cent("Cent. RIS, perfect CSI", "perfect"),
                ],
            );
            cfg.scenario.n = 60;
            cfg
        }
        // Rayleigh fading: phase-independent closed forms against sampled
        // random and best-of-F phases.
        "fig6" => base(
            "fig6",
            scenario(70, 20, 20, 100, "rayleigh"),
            sweep("n", vec![20.0, 60.0, 80.0, 100.0, 120.0, 160.0, 200.0, 240.0, 280.0, 320.0]),
            vec![
                method("DFT-CE (Th)", "dft", "random", "deterministic"),
                method("DE-CE (Th)", "de", "random", "deterministic"),
                method("DFT-CE, rand. RISs (MC)", "dft", "random", "monte_carlo"),
                method("DE-CE, rand. RISs (MC)", "de", "random", "monte_carlo"),
                MethodConfig {
                    selection_trials: Some(100),
                    ..method("DFT-CE, opt. RISs (MC)", "dft", "best_of_random", "monte_carlo")
                },
                MethodConfig {
                    selection_trials: Some(100),
                    ..method("DE-CE, opt. RISs (MC)", "de", "best_of_random", "monte_carlo")
                },
            ],
        ),
        // Semi-unitary single-RIS channels: average SINR against ρ.
        "fig7" => {
            let with_n = |label: &str, evaluation: &str, n: usize| MethodConfig {
                n: Some(n),
                ..method(label, "perfect", "fixed", evaluation)
            };
            let mut sc = scenario(32, 12, 1, 32, "rayleigh");
            sc.semi_unitary = Some(SemiUnitarySection { beta_d: 1.0, c: 1.0, beta1: 1.0 });
            base(
                "fig7",
                sc,
                sweep("rho_db", (0..=8).map(|i| -20.0 + 5.0 * i as f64).collect()),
                vec![
                    no_ris("No RIS (MC)", "perfect", "monte_carlo"),
                    no_ris("No RIS (closed form)", "perfect", "special_case"),
                    with_n("With RIS (MC), N=32", "monte_carlo", 32),
                    with_n("With RIS (closed form), N=32", "special_case", 32),
                    with_n("With RIS (MC), N=64", "monte_carlo", 64),
                    with_n("With RIS (closed form), N=64", "special_case", 64),
                ],
            )
        }
        other => bail!("unknown preset {other:?} (expected one of {})", PRESET_NAMES.join(", ")),
    };
    cfg.validate()?;
    Ok(cfg)
}
