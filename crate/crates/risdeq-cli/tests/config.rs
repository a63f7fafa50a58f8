use risdeq_cli::config::{Evaluation, ExperimentConfig, PhaseDesign};
use risdeq_cli::figure_preset;

const SMALL: &str = r#"
name = "small"
seed = 3

[scenario]
m = 8
k = 3
l = 2
n = 4

[sweep]
variable = "p_max_w"
values = [1.0, 2.0]

[[methods]]
label = "de-opt"
protocol = "de"
"#;

fn with(extra_replace: (&str, &str)) -> anyhow::Result<ExperimentConfig> {
    ExperimentConfig::from_toml(&SMALL.replace(extra_replace.0, extra_replace.1))
}

fn err_text(r: anyhow::Result<ExperimentConfig>) -> String {
    format!("{:#}", r.expect_err("config should be rejected"))
}

#[test]
fn minimal_config_gets_documented_defaults() {
    let cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    assert_eq!(cfg.trials, 500);
    assert_eq!(cfg.training.tau_c, 2000.0);
    assert_eq!(cfg.powers.noise_dbm, -94.0);
    assert!(cfg.timing);
    let m = &cfg.parsed_methods().unwrap()[0];
    assert_eq!(m.design, PhaseDesign::PgaScsi);
    assert_eq!(m.evaluation, Evaluation::Deterministic);
    assert_eq!(m.raw.candidates, 16);
}

#[test]
fn toml_round_trip() {
    for name in risdeq_cli::presets::PRESET_NAMES {
        let cfg = figure_preset(name).unwrap();
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, back, "{name}");
    }
}

#[test]
fn empty_methods_rejected() {
    let text = SMALL
        .replace("[[methods]]\nlabel = \"de-opt\"\nprotocol = \"de\"\n", "")
        .replace("seed = 3", "seed = 3\nmethods = []");
    assert!(err_text(ExperimentConfig::from_toml(&text)).contains("at least one method"));
}

#[test]
fn sweep_values_must_increase() {
    assert!(err_text(with(("[1.0, 2.0]", "[2.0, 1.0]"))).contains("strictly increasing"));
    assert!(err_text(with(("[1.0, 2.0]", "[1.0, 1.0]"))).contains("strictly increasing"));
    assert!(err_text(with(("[1.0, 2.0]", "[]"))).contains("at least one value"));
}

#[test]
fn invalid_method_pairs_rejected() {
    let e = err_text(with((
        "protocol = \"de\"",
        "protocol = \"de\"\nphase_design = \"ga_icsi\"\nevaluation = \"instantaneous\"",
    )));
    assert!(e.contains("invalid combination"), "{e}");
    let e = err_text(with(("protocol = \"de\"", "protocol = \"dft\"\nevaluation = \"instantaneous\"")));
    assert!(e.contains("invalid combination"), "{e}");
    let e = err_text(with(("protocol = \"de\"", "protocol = \"de\"\nphase_design = \"best_of_random\"")));
    assert!(e.contains("invalid combination"), "{e}");
    assert!(with((
        "protocol = \"de\"",
        "protocol = \"dft\"\nphase_design = \"ga_icsi\"\nevaluation = \"instantaneous\""
    ))
    .is_ok());
}

#[test]
fn unknown_names_are_reported() {
    assert!(err_text(with(("protocol = \"de\"", "protocol = \"zf\""))).contains("unknown protocol"));
    assert!(err_text(with(("\"p_max_w\"", "\"m\""))).contains("unknown sweep variable"));
    assert!(err_text(with(("n = 4", "n = 4\nfading = \"nakagami\""))).contains("unknown fading"));
    assert!(err_text(with(("seed = 3", "seed = 3\nbogus = 1"))).contains("bogus"));
}

#[test]
fn special_case_needs_semi_unitary_scenario() {
    let e = err_text(with(("protocol = \"de\"", "protocol = \"perfect\"\nevaluation = \"special_case\"")));
    assert!(e.contains("semi_unitary"), "{e}");
}

#[test]
fn fixed_total_must_divide() {
    let text = SMALL.replace("\"p_max_w\"", "\"l\"").replace("[1.0, 2.0]", "[2.0, 3.0]\nfixed_total_elements = 8");
    assert!(err_text(ExperimentConfig::from_toml(&text)).contains("not divisible"));
}

#[test]
fn duplicate_labels_rejected() {
    let text = format!("{SMALL}\n[[methods]]\nlabel = \"de-opt\"\nprotocol = \"dft\"\n");
    assert!(err_text(ExperimentConfig::from_toml(&text)).contains("unique"));
}

#[test]
fn effective_noise_and_pilot_snr() {
    let cfg = with(("[sweep]", "[powers]\nnoise_dbm = -94.0\nnoise_offset_db = 4.0\n\n[sweep]")).unwrap();
    let want = 10f64.powf((-94.0 + 4.0 - 30.0) / 10.0);
    assert!((cfg.powers.sigma2_w() - want).abs() <= 1e-12 * want);
    assert!((cfg.rho_p() - 0.2 / want).abs() <= 1e-9 * cfg.rho_p());
}
