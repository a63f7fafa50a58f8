//! Sweep execution: scenario construction, phase design and evaluation.
//!
//! A run proceeds in three deduplicated, parallel stages: build every
//! distinct scenario, run every distinct PGA phase design, then evaluate
//! every distinct (scenario, power, method) combination. Rows are assembled
//! single-threaded in sweep-then-method order, so the output is independent
//! of scheduling.

use crate::config::{Evaluation, ExperimentConfig, ParsedMethod, PhaseDesign, SweepVariable};
use crate::output::ResultRow;
use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;
use risdeq::channels::{nlos_covariance, sample_realization_trial};
use risdeq::detequiv::{
    db_to_linear, net_sum_rate, sinr_det_de_rayleigh, sinr_det_dft_rayleigh, sinr_det_noris, sinr_det_perfect_rayleigh,
    sinr_special_case, DetEqModel,
};
use risdeq::estimation::{
    combine_links, dft_estimate_covariance, estimate_dft_links, simulate_dft_observations_trial, subphases,
    training_overhead,
};
use risdeq::geometry::{build_scenario, build_semi_unitary_scenario, SemiUnitaryConfig};
use risdeq::montecarlo::{instantaneous_sinr, mc_average, mc_sinr};
use risdeq::optimizer::{best_of_random, ga_optimize_icsi, optimize_phases_scsi, PgaStep};
use risdeq::scalar::CMat;
use risdeq::{
    ChannelStatistics64, Fading, McConfig, PhaseProfile64, PowerConfig, Protocol, RisError, SinrReport64, SystemDims,
    TrainingConfig,
};
use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

/// Seed offsets separating the random streams of one run.
const PGA_SEED_OFFSET: u64 = 0x1000;
const MC_SEED_OFFSET: u64 = 0x2000;
const SELECTION_SEED_OFFSET: u64 = 0x3000;
const CANDIDATE_SEED_OFFSET: u64 = 0x4000;
const ICSI_SEED_OFFSET: u64 = 0x5000;
const SEMI_UNITARY_SEED_OFFSET: u64 = 0x6000;

/// Concrete parameters of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    /// Swept value as written in the config.
    pub value: f64,
    /// Elements per RIS.
    pub n: usize,
    /// RIS count.
    pub l: usize,
    /// Powers and noise.
    pub powers: PowerConfig,
}

/// Expands the sweep into concrete points.
pub fn sweep_points(cfg: &ExperimentConfig) -> Result<Vec<SweepPoint>> {
    let sc = &cfg.scenario;
    let sigma2 = cfg.powers.sigma2_w();
    let base = PowerConfig::equal(cfg.powers.p_max_w, sigma2, sc.k);
    let var = cfg.sweep.parse_variable()?;
    Ok(cfg
        .sweep
        .values
        .iter()
        .map(|&v| {
            let mut p = SweepPoint { value: v, n: sc.n, l: sc.l, powers: base.clone() };
            match var {
                SweepVariable::PMaxW => p.powers = PowerConfig::equal(v, sigma2, sc.k),
                SweepVariable::N => p.n = v as usize,
                SweepVariable::L => {
                    p.l = v as usize;
                    if let Some(total) = cfg.sweep.fixed_total_elements {
                        p.n = total / p.l;
                    }
                }
                SweepVariable::RhoDb => {
                    p.powers = PowerConfig::from_rho(db_to_linear(v), vec![1.0 / sc.k as f64; sc.k])
                }
            }
            p
        })
        .collect())
}

/// RIS layout of one evaluation (`l = 0` is the direct-link baseline).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScenarioKey {
    /// Elements per RIS.
    pub n: usize,
    /// RIS count.
    pub l: usize,
}

/// Layout used by `method` at `point`.
pub fn scenario_key(point: &SweepPoint, method: &ParsedMethod) -> ScenarioKey {
    if !method.raw.ris {
        return ScenarioKey { n: 0, l: 0 };
    }
    let n = method.raw.n.unwrap_or(point.n);
    if method.raw.centralized {
        ScenarioKey { n: n * point.l, l: 1 }
    } else {
        ScenarioKey { n, l: point.l }
    }
}

type PowerKey = (u64, u64);

fn power_key(p: &PowerConfig) -> PowerKey {
    (p.p_max_w.to_bits(), p.sigma2_w.to_bits())
}

/// Channel statistics of a layout under the config's scenario model.
pub fn build_stats(cfg: &ExperimentConfig, key: ScenarioKey) -> Result<ChannelStatistics64> {
    let sc = &cfg.scenario;
    // The baseline is built with one placeholder RIS (as large as the
    // semi-unitary model requires) and then stripped.
    let (l, n, strip) = if key.l == 0 { (1, sc.m, true) } else { (key.l, key.n, false) };
    let stats: ChannelStatistics64 = match &sc.semi_unitary {
        Some(su) => build_semi_unitary_scenario(
            sc.m,
            n,
            &SemiUnitaryConfig {
                beta_d: vec![su.beta_d; sc.k],
                c: vec![su.c; l],
                beta1: vec![su.beta1; l],
                seed: cfg.seed.wrapping_add(SEMI_UNITARY_SEED_OFFSET),
            },
        )?,
        None => build_scenario(
            SystemDims::with_elements(sc.m, sc.k, l, n)?,
            &sc.geometry(),
            &sc.path_loss()?,
            sc.fading()?,
        )?,
    };
    Ok(if strip { stats.without_ris() } else { stats })
}

/// Training configuration of `protocol` under the config.
pub fn training_config(cfg: &ExperimentConfig, protocol: Protocol) -> Result<TrainingConfig> {
    Ok(TrainingConfig {
        rho_p: cfg.rho_p(),
        tau_s: cfg.training.tau_s.unwrap_or(cfg.scenario.k as f64),
        tau_c: cfg.training.tau_c,
        protocol,
        subphase_mode: cfg.training.subphase_mode()?,
        perfect_csi_pays_training: cfg.training.perfect_csi_pays_training,
    })
}

/// Result of one S-CSI phase design.
#[derive(Debug, Clone)]
pub struct PhaseDesignOutcome {
    /// Optimized phases.
    pub phases: PhaseProfile64,
    /// Trace of the best start.
    pub trace: Vec<PgaStep>,
    /// Wall time of the optimization, ms.
    pub wall_ms: f64,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Result rows in sweep-then-method order.
    pub rows: Vec<ResultRow>,
    /// PGA traces keyed by a file-name stem `<protocol>_<point index>`.
    pub traces: Vec<(String, Vec<PgaStep>)>,
}

fn protocol_name(p: Protocol) -> &'static str {
    match p {
        Protocol::MmseDft => "dft",
        Protocol::DirectEstimate => "de",
        Protocol::PerfectCsi => "perfect",
    }
}

/// Numbers behind one row.
#[derive(Debug, Clone, PartialEq)]
struct Evaluated {
    mean_sinr: f64,
    net_sum_rate: f64,
    prefactor: f64,
    overhead_symbols: f64,
    stderr: Option<f64>,
    wall_ms: f64,
}

/// Whether `method` needs a PGA design at `key`.
fn needs_pga(stats: &ChannelStatistics64, method: &ParsedMethod) -> bool {
    method.design == PhaseDesign::PgaScsi
        && method.evaluation != Evaluation::SpecialCase
        && stats.dims().l > 0
        && stats.fading() == Fading::Rician
}

/// Multi-start PGA for `protocol`; `None` when the training overhead is
/// infeasible.
pub fn design_phases(
    cfg: &ExperimentConfig,
    stats: &ChannelStatistics64,
    powers: &PowerConfig,
    protocol: Protocol,
) -> Result<Option<PhaseDesignOutcome>> {
    let tcfg = training_config(cfg, protocol)?;
    if training_overhead(protocol, stats.dims(), &tcfg).is_err() {
        return Ok(None);
    }
    let start = Instant::now();
    let pga = cfg.pga.to_pga(cfg.seed.wrapping_add(PGA_SEED_OFFSET));
    let out = optimize_phases_scsi(stats, powers, &tcfg, &pga, cfg.pga.starts)?;
    log::info!(
        "PGA {} NL={}: {:.6} bit/s/Hz after {} iterations",
        protocol_name(protocol),
        stats.dims().nl(),
        out.best.objective,
        out.best.trace.len().saturating_sub(1)
    );
    Ok(Some(PhaseDesignOutcome {
        phases: out.best.phi,
        trace: out.best.trace,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    }))
}

fn from_report(rep: &SinrReport64, overhead_symbols: f64) -> Evaluated {
    Evaluated {
        mean_sinr: rep.mean_sinr(),
        net_sum_rate: rep.net_sum_rate,
        prefactor: rep.prefactor,
        overhead_symbols,
        stderr: None,
        wall_ms: 0.0,
    }
}

/// Deterministic-equivalent report for fixed phases.
fn deterministic(
    stats: &ChannelStatistics64,
    phases: &PhaseProfile64,
    powers: &PowerConfig,
    tcfg: &TrainingConfig,
) -> Result<SinrReport64> {
    let has_ris = stats.dims().l > 0;
    Ok(match (has_ris, stats.fading(), tcfg.protocol) {
        (false, _, Protocol::DirectEstimate) => sinr_det_noris(stats, powers, tcfg)?,
        (true, Fading::Rayleigh, Protocol::MmseDft) => sinr_det_dft_rayleigh(stats, phases, powers, tcfg)?,
        (true, Fading::Rayleigh, Protocol::DirectEstimate) => sinr_det_de_rayleigh(stats, powers, tcfg)?,
        (true, Fading::Rayleigh, Protocol::PerfectCsi) => sinr_det_perfect_rayleigh(stats, powers, tcfg)?,
        _ => DetEqModel::new(stats, tcfg, powers)?.evaluate(phases)?,
    })
}

fn evaluate(
    cfg: &ExperimentConfig,
    method: &ParsedMethod,
    stats: &ChannelStatistics64,
    powers: &PowerConfig,
    designed: Option<&PhaseDesignOutcome>,
) -> Result<Evaluated> {
    let start = Instant::now();
    let tcfg = training_config(cfg, method.protocol)?;
    let dims = stats.dims();
    let symbols = subphases(method.protocol, dims, tcfg.subphase_mode) * tcfg.tau_s;
    let overhead_symbols =
        if method.protocol == Protocol::PerfectCsi && !tcfg.perfect_csi_pays_training { 0.0 } else { symbols };
    let prefactor = match training_overhead(method.protocol, dims, &tcfg) {
        Ok(o) => o.prefactor,
        Err(RisError::InfeasibleOverhead { .. }) => {
            return Ok(Evaluated {
                mean_sinr: 0.0,
                net_sum_rate: 0.0,
                prefactor: 1.0 - symbols / tcfg.tau_c,
                overhead_symbols,
                stderr: None,
                wall_ms: 0.0,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let nl = dims.nl();
    let trials = method.raw.trials.unwrap_or(cfg.trials);
    let mc_seed = cfg.seed.wrapping_add(MC_SEED_OFFSET);
    let phases = match method.design {
        PhaseDesign::Fixed => PhaseProfile64::ones(nl),
        PhaseDesign::Random => PhaseProfile64::random(nl, cfg.seed),
        PhaseDesign::PgaScsi => match designed {
            Some(d) => d.phases.clone(),
            None => {
                if nl > 0 && method.evaluation != Evaluation::SpecialCase {
                    log::info!(
                        "method {:?}: no S-CSI gradient at this point, using the shared random draw",
                        method.raw.label
                    );
                }
                PhaseProfile64::random(nl, cfg.seed)
            }
        },
        PhaseDesign::BestOfRandom => {
            let sel = McConfig::new(
                method.raw.selection_trials.unwrap_or(trials),
                cfg.seed.wrapping_add(SELECTION_SEED_OFFSET),
            );
            let (best, idx) =
                best_of_random(nl, method.raw.candidates, cfg.seed.wrapping_add(CANDIDATE_SEED_OFFSET), |p| {
                    Ok(mc_sinr(stats, p, &tcfg, powers, &sel)?.net_sum_rate)
                })?;
            log::info!("method {:?}: candidate {idx} selected", method.raw.label);
            best
        }
        PhaseDesign::GaIcsi => PhaseProfile64::ones(nl),
    };

    let mut out = match method.evaluation {
        Evaluation::Deterministic => from_report(&deterministic(stats, &phases, powers, &tcfg)?, overhead_symbols),
        Evaluation::MonteCarlo => {
            let rep = mc_sinr(stats, &phases, &tcfg, powers, &McConfig::new(trials, mc_seed))?;
            Evaluated {
                mean_sinr: rep.mean_sinr,
                net_sum_rate: rep.net_sum_rate,
                prefactor: rep.prefactor,
                overhead_symbols,
                stderr: Some(rep.net_sum_rate_stderr),
                wall_ms: 0.0,
            }
        }
        Evaluation::Instantaneous => {
            let seed = cfg.seed.wrapping_add(ICSI_SEED_OFFSET);
            let c_tilde: Vec<CMat<f64>> =
                (0..dims.k).map(|k| nlos_covariance(stats, k) - dft_estimate_covariance(stats, &tcfg, k)).collect();
            let per_block: Vec<(f64, f64)> = (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    let real = sample_realization_trial(stats, seed, t);
                    let obs = simulate_dft_observations_trial(&real, stats, &tcfg, seed, t);
                    let links = estimate_dft_links(&obs, stats, &tcfg);
                    let ga = cfg.ga.to_ga(seed.wrapping_add(t));
                    let (phi, rate) = ga_optimize_icsi(&links, stats, powers, &tcfg, &ga)?;
                    let gamma = instantaneous_sinr(&combine_links(&links, stats, &phi), &c_tilde, powers)?;
                    Ok((rate, gamma.iter().sum::<f64>() / gamma.len() as f64))
                })
                .collect::<Result<_>>()?;
            let mc = McConfig::new(trials, seed);
            let (rate, se) = mc_average::<f64, _>(&mc, |t| Ok(per_block[t as usize].0))?;
            let (sinr, _) = mc_average::<f64, _>(&mc, |t| Ok(per_block[t as usize].1))?;
            Evaluated {
                mean_sinr: sinr,
                net_sum_rate: rate,
                prefactor,
                overhead_symbols,
                stderr: Some(se),
                wall_ms: 0.0,
            }
        }
        Evaluation::SpecialCase => {
            let su = cfg
                .scenario
                .semi_unitary
                .as_ref()
                .ok_or_else(|| anyhow!("special_case evaluation needs a semi-unitary scenario"))?;
            let beta_d = vec![su.beta_d; dims.k];
            let c_bar = su.c * dims.l as f64;
            let n = if dims.l > 0 { dims.n() } else { 0 };
            let gamma = sinr_special_case(&beta_d, c_bar, n, dims.m, powers.rho());
            Evaluated {
                mean_sinr: gamma.iter().sum::<f64>() / gamma.len() as f64,
                net_sum_rate: net_sum_rate(&gamma, prefactor)?,
                prefactor,
                overhead_symbols,
                stderr: None,
                wall_ms: 0.0,
            }
        }
    };
    out.wall_ms = start.elapsed().as_secs_f64() * 1e3 + designed.map_or(0.0, |d| d.wall_ms);
    Ok(out)
}

/// Runs a validated experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let methods = cfg.parsed_methods()?;
    let points = sweep_points(cfg)?;

    // Stage 1: distinct scenarios.
    let mut keys: Vec<ScenarioKey> = Vec::new();
    for p in &points {
        for m in &methods {
            let k = scenario_key(p, m);
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
    }
    let built: Vec<Arc<ChannelStatistics64>> = keys
        .par_iter()
        .map(|k| build_stats(cfg, *k).map(Arc::new).with_context(|| format!("building scenario N={} L={}", k.n, k.l)))
        .collect::<Result<_>>()?;
    let stats: HashMap<ScenarioKey, Arc<ChannelStatistics64>> = keys.iter().copied().zip(built).collect();

    // Stage 2: distinct PGA designs (scenario, powers, protocol).
    type DesignKey = (ScenarioKey, PowerKey, Protocol);
    let mut design_jobs: Vec<(DesignKey, usize)> = Vec::new();
    for (pi, p) in points.iter().enumerate() {
        for m in &methods {
            let sk = scenario_key(p, m);
            if needs_pga(&stats[&sk], m) {
                let dk = (sk, power_key(&p.powers), m.protocol);
                if !design_jobs.iter().any(|(k, _)| *k == dk) {
                    design_jobs.push((dk, pi));
                }
            }
        }
    }
    let designs: Vec<Option<PhaseDesignOutcome>> = design_jobs
        .par_iter()
        .map(|((sk, _, protocol), pi)| {
            design_phases(cfg, &stats[sk], &points[*pi].powers, *protocol)
                .with_context(|| format!("optimizing phases at sweep value {}", points[*pi].value))
        })
        .collect::<Result<_>>()?;
    let traces = design_jobs
        .iter()
        .zip(&designs)
        .filter_map(|(((_, _, protocol), pi), d)| {
            d.as_ref().map(|d| (format!("{}_{pi}", protocol_name(*protocol)), d.trace.clone()))
        })
        .collect();
    let design_map: HashMap<DesignKey, Option<PhaseDesignOutcome>> =
        design_jobs.into_iter().map(|(k, _)| k).zip(designs).collect();

    // Stage 3: distinct evaluations (scenario, powers, method).
    type EvalKey = (ScenarioKey, PowerKey, usize);
    let mut eval_jobs: Vec<(EvalKey, usize)> = Vec::new();
    for (pi, p) in points.iter().enumerate() {
        for (mi, m) in methods.iter().enumerate() {
            let ek = (scenario_key(p, m), power_key(&p.powers), mi);
            if !eval_jobs.iter().any(|(k, _)| *k == ek) {
                eval_jobs.push((ek, pi));
            }
        }
    }
    let evaluated: Vec<Evaluated> = eval_jobs
        .par_iter()
        .map(|((sk, pk, mi), pi)| {
            let m = &methods[*mi];
            let designed = if m.design == PhaseDesign::PgaScsi {
                design_map.get(&(*sk, *pk, m.protocol)).and_then(Option::as_ref)
            } else {
                None
            };
            evaluate(cfg, m, &stats[sk], &points[*pi].powers, designed)
                .with_context(|| format!("method {:?} at sweep value {}", m.raw.label, points[*pi].value))
        })
        .collect::<Result<_>>()?;
    let eval_map: HashMap<EvalKey, Evaluated> = eval_jobs.into_iter().map(|(k, _)| k).zip(evaluated).collect();

    let mut rows = Vec::with_capacity(points.len() * methods.len());
    for p in &points {
        for (mi, m) in methods.iter().enumerate() {
            let e = &eval_map[&(scenario_key(p, m), power_key(&p.powers), mi)];
            rows.push(ResultRow {
                sweep_value: p.value,
                method: m.raw.label.clone(),
                mean_sinr: e.mean_sinr,
                net_sum_rate: e.net_sum_rate,
                prefactor: e.prefactor,
                overhead_symbols: e.overhead_symbols,
                stderr: e.stderr,
                wall_ms: if cfg.timing { e.wall_ms } else { 0.0 },
            });
        }
    }
    Ok(RunOutput { rows, traces })
}
