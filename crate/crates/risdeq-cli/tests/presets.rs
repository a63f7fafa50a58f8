use risdeq_cli::config::{Evaluation, PhaseDesign};
use risdeq_cli::figure_preset;
use risdeq_cli::presets::PRESET_NAMES;

#[test]
fn shared_parameters_match_the_reference_setup() {
    for name in PRESET_NAMES {
        let cfg = figure_preset(name).unwrap();
        assert_eq!(cfg.training.tau_c, 2000.0, "{name}");
        assert_eq!(cfg.powers.noise_dbm, -94.0, "{name}");
        if cfg.scenario.semi_unitary.is_some() {
            continue;
        }
        assert_eq!(cfg.powers.p_max_w, 10.0, "{name}");
        let pl = cfg.scenario.path_loss().unwrap();
        assert_eq!(pl.c0_db, -30.0);
        assert_eq!((pl.alpha_bs_ris, pl.alpha_ris_user, pl.alpha_bs_user), (2.0, 2.8, 3.5));
        let geo = cfg.scenario.geometry();
        assert_eq!((geo.user_arc_radius, geo.ris_arc_radius, geo.arc_span_deg), (400.0, 250.0, 30.0));
    }
}

#[test]
fn power_sweeps() {
    for (name, count) in [("fig2", 8), ("fig3", 10)] {
        let cfg = figure_preset(name).unwrap();
        let s = &cfg.scenario;
        assert_eq!((s.m, s.n, s.l, s.k), (60, 60, 20, 20));
        assert_eq!(cfg.sweep.variable, "p_max_w");
        assert_eq!(cfg.sweep.values, (1..=10).map(|i| 2.0 * i as f64).collect::<Vec<_>>());
        assert_eq!(cfg.methods.len(), count);
        let parsed = cfg.parsed_methods().unwrap();
        for protocol in ["dft", "de"] {
            for ev in [Evaluation::Deterministic, Evaluation::MonteCarlo] {
                assert!(parsed
                    .iter()
                    .any(|m| m.raw.protocol == protocol && m.design == PhaseDesign::PgaScsi && m.evaluation == ev));
            }
        }
        assert_eq!(parsed.iter().filter(|m| m.design == PhaseDesign::Random).count(), 3);
    }
}

#[test]
fn element_sweep_with_instantaneous_benchmark() {
    let cfg = figure_preset("fig4").unwrap();
    assert_eq!((cfg.scenario.m, cfg.scenario.k, cfg.scenario.l), (60, 20, 20));
    assert_eq!(cfg.sweep.variable, "n");
    assert_eq!(cfg.sweep.values.first(), Some(&20.0));
    assert_eq!(cfg.sweep.values.last(), Some(&320.0));
    let parsed = cfg.parsed_methods().unwrap();
    assert!(parsed.iter().any(|m| m.design == PhaseDesign::GaIcsi && m.evaluation == Evaluation::Instantaneous));
}

#[test]
fn distributed_against_centralized() {
    let cfg = figure_preset("fig5").unwrap();
    assert_eq!(cfg.sweep.variable, "l");
    assert_eq!(cfg.sweep.fixed_total_elements, Some(1200));
    assert_eq!(cfg.sweep.values, vec![2.0, 4.0, 10.0, 20.0, 30.0, 40.0]);
    assert_eq!(cfg.methods.iter().filter(|m| m.centralized).count(), 3);
}

#[test]
fn rayleigh_preset_has_best_of_f_curves() {
    let cfg = figure_preset("fig6").unwrap();
    assert_eq!(cfg.scenario.fading, "rayleigh");
    assert_eq!((cfg.scenario.m, cfg.scenario.k, cfg.scenario.l), (70, 20, 20));
    let best: Vec<_> =
        cfg.parsed_methods().unwrap().into_iter().filter(|m| m.design == PhaseDesign::BestOfRandom).collect();
    assert_eq!(best.len(), 2);
    assert!(best.iter().all(|m| m.raw.candidates == 16 && m.raw.label.contains("opt. RISs")));
}

#[test]
fn semi_unitary_preset() {
    let cfg = figure_preset("fig7").unwrap();
    assert!(cfg.scenario.semi_unitary.is_some());
    assert_eq!((cfg.scenario.m, cfg.scenario.k, cfg.scenario.l), (32, 12, 1));
    assert_eq!(cfg.sweep.variable, "rho_db");
    assert_eq!(cfg.sweep.values, (0..=8).map(|i| -20.0 + 5.0 * i as f64).collect::<Vec<_>>());
    let parsed = cfg.parsed_methods().unwrap();
    assert_eq!(parsed.iter().filter(|m| m.evaluation == Evaluation::SpecialCase).count(), 3);
    for n in [32, 64] {
        assert!(parsed.iter().any(|m| m.raw.n == Some(n) && m.evaluation == Evaluation::MonteCarlo));
    }
}

#[test]
fn unknown_preset_rejected() {
    let e = figure_preset("fig9").unwrap_err().to_string();
    assert!(e.contains("unknown preset") && e.contains("fig2"));
}
