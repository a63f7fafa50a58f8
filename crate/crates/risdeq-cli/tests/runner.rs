use risdeq::detequiv::sinr_special_case;
use risdeq_cli::config::ExperimentConfig;
use risdeq_cli::output::write_rows;
use risdeq_cli::runner::{build_stats, run_experiment, ScenarioKey};
use risdeq_cli::{apply_overrides, run_config};
use std::process::Command;

const BASE: &str = r#"
name = "tiny"
seed = 9
trials = 40

[scenario]
m = 8
k = 3
l = 2
n = 4

[powers]
noise_offset_db = 32.63

[pga]
starts = 2
max_iters = 40

[sweep]
variable = "p_max_w"
values = [1.0, 5.0]

[[methods]]
label = "de opt (Th)"
protocol = "de"

[[methods]]
label = "de opt (MC)"
protocol = "de"
evaluation = "monte_carlo"

[[methods]]
label = "dft rand (Th)"
protocol = "dft"
phase_design = "random"

[[methods]]
label = "no RIS"
protocol = "de"
ris = false
"#;

fn csv_of(cfg: &ExperimentConfig) -> String {
    let mut buf = Vec::new();
    write_rows(&run_experiment(cfg).unwrap().rows, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn rows_follow_sweep_then_method_order() {
    let cfg = ExperimentConfig::from_toml(BASE).unwrap();
    let rows = run_experiment(&cfg).unwrap().rows;
    assert_eq!(rows.len(), 8);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.sweep_value, [1.0, 5.0][i / 4]);
        assert_eq!(r.method, cfg.methods[i % 4].label);
        assert!(r.net_sum_rate > 0.0 && r.prefactor > 0.0);
    }
    assert!(rows[1].stderr.is_some() && rows[0].stderr.is_none());
    // Optimized phases beat the shared random draw; more power helps.
    assert!(rows[0].net_sum_rate > rows[3].net_sum_rate);
    assert!(rows[4].net_sum_rate > rows[0].net_sum_rate);
}

#[test]
fn identical_config_and_seed_give_identical_bytes() {
    let mut cfg = ExperimentConfig::from_toml(BASE).unwrap();
    cfg.timing = false;
    let a = csv_of(&cfg);
    let one_thread = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| csv_of(&cfg));
    assert_eq!(a, one_thread);
    apply_overrides(&mut cfg, Some(10), None);
    assert_ne!(a, csv_of(&cfg));
}

#[test]
fn infeasible_overhead_gives_flagged_zero_row() {
    // N·L = 160 on M = 4 antennas: S = 41 sub-phases of 3 symbols > τ_C = 100.
    let text = BASE
        .replace("m = 8", "m = 4")
        .replace("n = 4", "n = 80")
        .replace("[powers]", "[training]\ntau_c = 100.0\n\n[powers]")
        .replace("label = \"dft rand (Th)\"", "label = \"dft rand (Th)\"\ntrials = 2");
    let cfg = ExperimentConfig::from_toml(&text).unwrap();
    let rows = run_experiment(&cfg).unwrap().rows;
    let dft = &rows[2];
    assert_eq!(dft.net_sum_rate, 0.0);
    assert_eq!(dft.mean_sinr, 0.0);
    assert!(dft.prefactor <= 0.0);
    assert!((dft.overhead_symbols - 41.0 * 3.0).abs() < 1e-9);
    assert!(rows[0].net_sum_rate > 0.0);
}

#[test]
fn special_case_rows_use_the_closed_form() {
    let text = r#"
name = "su"
[scenario]
m = 8
k = 4
l = 1
n = 16
fading = "rayleigh"
[scenario.semi_unitary]
c = 0.5
[sweep]
variable = "rho_db"
values = [-10.0, 0.0]
[[methods]]
label = "cf"
protocol = "perfect"
phase_design = "fixed"
evaluation = "special_case"
[[methods]]
label = "cf no ris"
protocol = "perfect"
evaluation = "special_case"
ris = false
"#;
    let cfg = ExperimentConfig::from_toml(text).unwrap();
    let rows = run_experiment(&cfg).unwrap().rows;
    for (i, rho_db) in [-10.0f64, 0.0].iter().enumerate() {
        let rho = 10f64.powf(rho_db / 10.0);
        let g = sinr_special_case(&[1.0; 4], 0.5, 16, 8, rho)[0];
        assert!((rows[2 * i].mean_sinr - g).abs() < 1e-12 * g);
        let g0 = sinr_special_case(&[1.0; 4], 0.0, 0, 8, rho)[0];
        assert!((rows[2 * i + 1].mean_sinr - g0).abs() < 1e-12 * g0);
    }
    assert_eq!(build_stats(&cfg, ScenarioKey { n: 0, l: 0 }).unwrap().dims().l, 0);
}

#[test]
fn run_config_writes_csv_and_traces() {
    let mut cfg = ExperimentConfig::from_toml(BASE).unwrap();
    cfg.pga_trace = true;
    let dir = tempfile::tempdir().unwrap();
    let (path, rows) = run_config(&cfg, dir.path()).unwrap();
    assert_eq!(path, dir.path().join("tiny.csv"));
    assert_eq!(risdeq_cli::read_csv(&path).unwrap().len(), rows.len());
    let trace = std::fs::read_to_string(dir.path().join("tiny_pga/de_0.csv")).unwrap();
    assert!(trace.starts_with("iteration,objective,step,grad_norm\n"));
}

#[test]
fn binary_reports_errors_and_validates() {
    let bin = env!("CARGO_BIN_EXE_risdeq");
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    std::fs::write(&good, BASE).unwrap();
    let out = Command::new(bin).args(["validate", good.to_str().unwrap()]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok: tiny"));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, BASE.replace("[1.0, 5.0]", "[5.0, 1.0]")).unwrap();
    let out = Command::new(bin).args(["validate", bad.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error: kind=config message=\""), "{err}");
    assert!(err.contains("strictly increasing"));

    let out = Command::new(bin).args(["preset", "fig9"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("kind=config"));

    let out = Command::new(bin).args(["run", "/nonexistent/x.toml"]).output().unwrap();
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: kind=io"));

    let out =
        Command::new(bin).args(["run", good.to_str().unwrap()]).env("RISDEQ_OUT_DIR", dir.path()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("tiny.csv").exists());

    let out = Command::new(bin).args(["preset", "fig7", "--print"]).output().unwrap();
    assert!(out.status.success());
    assert!(ExperimentConfig::from_toml(&String::from_utf8_lossy(&out.stdout)).is_ok());
}
