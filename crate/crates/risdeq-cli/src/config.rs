//! Experiment configuration: a TOML schema with defaults and validation.

use anyhow::{bail, ensure, Context, Result};
use risdeq::detequiv::{db_to_linear, dbm_to_watts};
use risdeq::geometry::KappaUnits;
use risdeq::{Fading, GeometryConfig, PathLossConfig, PgaConfig, PgaInit, Protocol, SubphaseMode};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Complete description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Experiment name (used for the default output file name).
    pub name: String,
    /// Master seed; every random draw of the run derives from it.
    #[serde(default)]
    pub seed: u64,
    /// Output CSV path; relative paths resolve against the output directory.
    #[serde(default)]
    pub output: Option<String>,
    /// Record wall-clock times in the `wall_ms` column (zeros otherwise).
    #[serde(default = "default_true")]
    pub timing: bool,
    /// System scenario.
    pub scenario: ScenarioConfig,
    /// Channel training.
    #[serde(default)]
    pub training: TrainingSection,
    /// Transmit power and noise.
    #[serde(default)]
    pub powers: PowerSection,
    /// Swept parameter.
    pub sweep: SweepConfig,
    /// Curves to compute at every sweep point.
    pub methods: Vec<MethodConfig>,
    /// Projected-gradient-ascent settings.
    #[serde(default)]
    pub pga: PgaSection,
    /// Genetic-algorithm settings.
    #[serde(default)]
    pub ga: GaSection,
    /// Default Monte-Carlo trial count.
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Write one PGA trace CSV per optimized (sweep point, protocol) pair.
    #[serde(default)]
    pub pga_trace: bool,
}

fn default_true() -> bool {
    true
}

fn default_trials() -> usize {
    500
}

/// Scenario dimensions and channel model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// BS antennas `M`.
    pub m: usize,
    /// Users `K`.
    pub k: usize,
    /// RIS count `L`.
    pub l: usize,
    /// Elements per RIS `N`.
    pub n: usize,
    /// `"rician"` or `"rayleigh"`.
    #[serde(default = "default_fading")]
    pub fading: String,
    /// Rician-factor formula units: `"db"` or `"linear"`.
    #[serde(default = "default_kappa_units")]
    pub kappa_units: String,
    /// Placement overrides.
    #[serde(default)]
    pub geometry: GeometrySection,
    /// Path-loss overrides.
    #[serde(default)]
    pub path_loss: PathLossSection,
    /// Replace the geometric model by semi-unitary BS–RIS channels with
    /// normalized gains.
    #[serde(default)]
    pub semi_unitary: Option<SemiUnitarySection>,
}

fn default_fading() -> String {
    "rician".into()
}

fn default_kappa_units() -> String {
    "db".into()
}

/// Placement parameters (all optional).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    /// User arc radius, metres.
    pub user_arc_radius: Option<f64>,
    /// RIS arc radius, metres.
    pub ris_arc_radius: Option<f64>,
    /// Arc half-span, degrees.
    pub arc_span_deg: Option<f64>,
    /// BS antenna spacing, wavelengths.
    pub d_bs: Option<f64>,
    /// RIS element spacing, wavelengths.
    pub d_ris: Option<f64>,
    /// Wavelength, metres.
    pub wavelength: Option<f64>,
}

/// Path-loss parameters (all optional).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossSection {
    /// Reference gain at 1 m, dB.
    pub c0_db: Option<f64>,
    /// BS–RIS exponent.
    pub alpha_bs_ris: Option<f64>,
    /// RIS–user exponent.
    pub alpha_ris_user: Option<f64>,
    /// BS–user exponent.
    pub alpha_bs_user: Option<f64>,
}

/// Semi-unitary scenario with equal direct gains and one ratio `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemiUnitarySection {
    /// Direct gain `β_d` shared by every user.
    #[serde(default = "one")]
    pub beta_d: f64,
    /// Ratio `c = β_1·β_2k/β_dk`.
    #[serde(default = "one")]
    pub c: f64,
    /// BS–RIS gain `β_1`.
    #[serde(default = "one")]
    pub beta1: f64,
}

fn one() -> f64 {
    1.0
}

/// Training parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSection {
    /// Coherence interval `τ_C`, symbols.
    #[serde(default = "default_tau_c")]
    pub tau_c: f64,
    /// Symbols per sub-phase `τ_S` (defaults to `K`).
    #[serde(default)]
    pub tau_s: Option<f64>,
    /// Pilot power in watts; the pilot SNR is this over the effective noise.
    #[serde(default = "default_pilot")]
    pub pilot_power_w: f64,
    /// `"fractional"` or `"ceiling"` sub-phase count.
    #[serde(default = "default_subphase")]
    pub subphase_mode: String,
    /// Whether perfect CSI is charged one training sub-phase.
    #[serde(default = "default_true")]
    pub perfect_csi_pays_training: bool,
}

fn default_tau_c() -> f64 {
    2000.0
}

fn default_pilot() -> f64 {
    0.2
}

fn default_subphase() -> String {
    "fractional".into()
}

impl Default for TrainingSection {
    fn default() -> Self {
        Self {
            tau_c: default_tau_c(),
            tau_s: None,
            pilot_power_w: default_pilot(),
            subphase_mode: default_subphase(),
            perfect_csi_pays_training: true,
        }
    }
}

/// Power and noise parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSection {
    /// Power budget, watts (the sweep may override it).
    #[serde(default = "default_pmax")]
    pub p_max_w: f64,
    /// Receiver noise power, dBm.
    #[serde(default = "default_noise_dbm")]
    pub noise_dbm: f64,
    /// Extra noise (noise figure plus implementation margin), dB.
    #[serde(default)]
    pub noise_offset_db: f64,
}

fn default_pmax() -> f64 {
    10.0
}

fn default_noise_dbm() -> f64 {
    -94.0
}

impl Default for PowerSection {
    fn default() -> Self {
        Self { p_max_w: default_pmax(), noise_dbm: default_noise_dbm(), noise_offset_db: 0.0 }
    }
}

impl PowerSection {
    /// Effective noise power `σ²` in watts.
    pub fn sigma2_w(&self) -> f64 {
        dbm_to_watts(self.noise_dbm + self.noise_offset_db)
    }
}

/// Swept variable and its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// One of `p_max_w`, `n`, `l`, `rho_db`.
    pub variable: String,
    /// Strictly increasing values.
    pub values: Vec<f64>,
    /// With `variable = "l"`: keep `N·L` fixed at this total.
    #[serde(default)]
    pub fixed_total_elements: Option<usize>,
}

/// Swept variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Power budget in watts.
    PMaxW,
    /// Elements per RIS.
    N,
    /// Number of RISs.
    L,
    /// `ρ = P_max/σ²` in dB.
    RhoDb,
}

/// Phase design of a method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseDesign {
    /// One seeded uniform draw per sweep.
    Random,
    /// Multi-start PGA on the deterministic equivalent of the method's protocol.
    PgaScsi,
    /// GA on the instantaneous rate, per coherence block.
    GaIcsi,
    /// All phases equal to one.
    Fixed,
    /// Best of `candidates` random profiles by a Monte-Carlo rate estimate.
    BestOfRandom,
}

/// How a method's curve is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    /// Closed-form deterministic equivalent.
    Deterministic,
    /// Monte-Carlo hardening-bound SINR.
    MonteCarlo,
    /// Average instantaneous net rate (with the GA phase design).
    Instantaneous,
    /// Closed-form semi-unitary special case.
    SpecialCase,
}

/// One curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    /// CSV label.
    pub label: String,
    /// `"dft"`, `"de"` or `"perfect"`.
    pub protocol: String,
    /// `"random"`, `"pga_scsi"`, `"ga_icsi"`, `"fixed"` or `"best_of_random"`.
    #[serde(default = "default_design")]
    pub phase_design: String,
    /// `"deterministic"`, `"monte_carlo"`, `"instantaneous"` or `"special_case"`.
    #[serde(default = "default_evaluation")]
    pub evaluation: String,
    /// Include the RISs (false gives the direct-link baseline).
    #[serde(default = "default_true")]
    pub ris: bool,
    /// Put all `N·L` elements on one RIS at the arc centre.
    #[serde(default)]
    pub centralized: bool,
    /// Per-method override of `N`.
    #[serde(default)]
    pub n: Option<usize>,
    /// Candidate count for `best_of_random`.
    #[serde(default = "default_candidates")]
    pub candidates: usize,
    /// Per-method trial count (Monte-Carlo or coherence blocks).
    #[serde(default)]
    pub trials: Option<usize>,
    /// Trials of the Monte-Carlo score used to pick the `best_of_random`
    /// profile (drawn on a seed separate from the reported evaluation).
    #[serde(default)]
    pub selection_trials: Option<usize>,
}

fn default_design() -> String {
    "pga_scsi".into()
}

fn default_evaluation() -> String {
    "deterministic".into()
}

fn default_candidates() -> usize {
    16
}

/// PGA settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PgaSection {
    /// Convergence threshold on the squared objective change.
    #[serde(default = "default_eps")]
    pub epsilon: f64,
    /// Iteration cap.
    #[serde(default = "default_iters")]
    pub max_iters: usize,
    /// Random starts.
    #[serde(default = "default_starts")]
    pub starts: usize,
    /// Initial step.
    #[serde(default = "one")]
    pub mu0: f64,
    /// Step shrink factor.
    #[serde(default = "default_shrink")]
    pub shrink: f64,
    /// Armijo constant.
    #[serde(default = "default_armijo")]
    pub armijo_c: f64,
}

fn default_eps() -> f64 {
    1e-6
}

fn default_iters() -> usize {
    500
}

fn default_starts() -> usize {
    4
}

fn default_shrink() -> f64 {
    0.5
}

fn default_armijo() -> f64 {
    1e-4
}

impl Default for PgaSection {
    fn default() -> Self {
        Self {
            epsilon: default_eps(),
            max_iters: default_iters(),
            starts: default_starts(),
            mu0: 1.0,
            shrink: default_shrink(),
            armijo_c: default_armijo(),
        }
    }
}

impl PgaSection {
    /// Library configuration with a random start of the given seed.
    pub fn to_pga(&self, seed: u64) -> PgaConfig {
        PgaConfig {
            epsilon: self.epsilon,
            max_iters: self.max_iters,
            mu0: self.mu0,
            shrink: self.shrink,
            armijo_c: self.armijo_c,
            init: PgaInit::Random(seed),
            ..PgaConfig::default()
        }
    }
}

/// GA settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaSection {
    /// Population size.
    #[serde(default = "default_population")]
    pub population: usize,
    /// Generations.
    #[serde(default = "default_generations")]
    pub generations: usize,
    /// Initial mutation deviation, radians.
    #[serde(default = "default_mutation")]
    pub mutation_std_rad: f64,
    /// Crossover probability.
    #[serde(default = "default_crossover")]
    pub crossover_rate: f64,
    /// Elites per generation.
    #[serde(default = "default_elites")]
    pub elite_count: usize,
}

fn default_population() -> usize {
    50
}

fn default_generations() -> usize {
    100
}

fn default_mutation() -> f64 {
    0.3
}

fn default_crossover() -> f64 {
    0.9
}

fn default_elites() -> usize {
    2
}

impl Default for GaSection {
    fn default() -> Self {
        Self {
            population: default_population(),
            generations: default_generations(),
            mutation_std_rad: default_mutation(),
            crossover_rate: default_crossover(),
            elite_count: default_elites(),
        }
    }
}

impl GaSection {
    /// Library configuration with the given seed.
    pub fn to_ga(&self, seed: u64) -> risdeq::GaConfig {
        risdeq::GaConfig {
            population: self.population,
            generations: self.generations,
            mutation_std_rad: self.mutation_std_rad,
            crossover_rate: self.crossover_rate,
            elite_count: self.elite_count,
            seed,
            ..risdeq::GaConfig::default()
        }
    }
}

/// A method with its string fields parsed.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedMethod {
    /// Source entry.
    pub raw: MethodConfig,
    /// Protocol.
    pub protocol: Protocol,
    /// Phase design.
    pub design: PhaseDesign,
    /// Evaluation.
    pub evaluation: Evaluation,
}

fn parse_protocol(s: &str) -> Result<Protocol> {
    Ok(match s {
        "dft" | "mmse_dft" => Protocol::MmseDft,
        "de" | "direct" => Protocol::DirectEstimate,
        "perfect" => Protocol::PerfectCsi,
        other => bail!("unknown protocol {other:?} (expected \"dft\", \"de\" or \"perfect\")"),
    })
}

fn parse_design(s: &str) -> Result<PhaseDesign> {
    Ok(match s {
        "random" => PhaseDesign::Random,
        "pga_scsi" => PhaseDesign::PgaScsi,
        "ga_icsi" => PhaseDesign::GaIcsi,
        "fixed" => PhaseDesign::Fixed,
        "best_of_random" => PhaseDesign::BestOfRandom,
        other => bail!("unknown phase_design {other:?} (expected random, pga_scsi, ga_icsi, fixed or best_of_random)"),
    })
}

fn parse_evaluation(s: &str) -> Result<Evaluation> {
    Ok(match s {
        "deterministic" => Evaluation::Deterministic,
        "monte_carlo" => Evaluation::MonteCarlo,
        "instantaneous" => Evaluation::Instantaneous,
        "special_case" => Evaluation::SpecialCase,
        other => {
            bail!("unknown evaluation {other:?} (expected deterministic, monte_carlo, instantaneous or special_case)")
        }
    })
}

impl MethodConfig {
    /// Parses and cross-checks the string fields.
    pub fn parse(&self) -> Result<ParsedMethod> {
        let ctx = || format!("method {:?}", self.label);
        let protocol = parse_protocol(&self.protocol).with_context(ctx)?;
        let design = parse_design(&self.phase_design).with_context(ctx)?;
        let evaluation = parse_evaluation(&self.evaluation).with_context(ctx)?;
        let pair_ok = match (design, evaluation) {
            (PhaseDesign::GaIcsi, Evaluation::Instantaneous) => protocol == Protocol::MmseDft,
            (PhaseDesign::GaIcsi, _) | (_, Evaluation::Instantaneous) => false,
            (PhaseDesign::BestOfRandom, e) => e == Evaluation::MonteCarlo,
            _ => true,
        };
        ensure!(
            pair_ok,
            "method {:?}: invalid combination protocol={}, phase_design={}, evaluation={} \
             (ga_icsi needs protocol=dft with evaluation=instantaneous; best_of_random needs monte_carlo)",
            self.label,
            self.protocol,
            self.phase_design,
            self.evaluation
        );
        ensure!(self.candidates >= 1, "method {:?}: candidates must be at least 1", self.label);
        for t in [self.trials, self.selection_trials].into_iter().flatten() {
            ensure!(t >= 2, "method {:?}: trial counts must be at least 2", self.label);
        }
        Ok(ParsedMethod { raw: self.clone(), protocol, design, evaluation })
    }
}

impl SweepConfig {
    /// Parsed variable.
    pub fn parse_variable(&self) -> Result<SweepVariable> {
        Ok(match self.variable.as_str() {
            "p_max_w" => SweepVariable::PMaxW,
            "n" => SweepVariable::N,
            "l" => SweepVariable::L,
            "rho_db" => SweepVariable::RhoDb,
            other => bail!("unknown sweep variable {other:?} (expected p_max_w, n, l or rho_db)"),
        })
    }
}

impl ScenarioConfig {
    /// Fading model.
    pub fn fading(&self) -> Result<Fading> {
        Ok(match self.fading.as_str() {
            "rician" => Fading::Rician,
            "rayleigh" => Fading::Rayleigh,
            other => bail!("unknown fading {other:?} (expected \"rician\" or \"rayleigh\")"),
        })
    }

    /// Geometry with overrides applied.
    pub fn geometry(&self) -> GeometryConfig {
        let d = GeometryConfig::default();
        let g = &self.geometry;
        GeometryConfig {
            user_arc_radius: g.user_arc_radius.unwrap_or(d.user_arc_radius),
            ris_arc_radius: g.ris_arc_radius.unwrap_or(d.ris_arc_radius),
            arc_span_deg: g.arc_span_deg.unwrap_or(d.arc_span_deg),
            d_bs: g.d_bs.unwrap_or(d.d_bs),
            d_ris1: g.d_ris.unwrap_or(d.d_ris1),
            d_ris2: g.d_ris.unwrap_or(d.d_ris2),
            wavelength: g.wavelength.unwrap_or(d.wavelength),
            ..d
        }
    }

    /// Path loss with overrides applied.
    pub fn path_loss(&self) -> Result<PathLossConfig> {
        let d = PathLossConfig::default();
        let p = &self.path_loss;
        let kappa_units = match self.kappa_units.as_str() {
            "db" => KappaUnits::Db,
            "linear" => KappaUnits::Linear,
            other => bail!("unknown kappa_units {other:?} (expected \"db\" or \"linear\")"),
        };
        Ok(PathLossConfig {
            c0_db: p.c0_db.unwrap_or(d.c0_db),
            alpha_bs_ris: p.alpha_bs_ris.unwrap_or(d.alpha_bs_ris),
            alpha_ris_user: p.alpha_ris_user.unwrap_or(d.alpha_ris_user),
            alpha_bs_user: p.alpha_bs_user.unwrap_or(d.alpha_bs_user),
            kappa_units,
        })
    }
}

impl TrainingSection {
    /// Sub-phase rounding mode.
    pub fn subphase_mode(&self) -> Result<SubphaseMode> {
        Ok(match self.subphase_mode.as_str() {
            "fractional" => SubphaseMode::Fractional,
            "ceiling" => SubphaseMode::Ceiling,
            other => bail!("unknown subphase_mode {other:?} (expected \"fractional\" or \"ceiling\")"),
        })
    }
}

impl ExperimentConfig {
    /// Reads and validates a TOML file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Parses and validates TOML text.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).context("parsing experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serializes to TOML.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).context("serializing experiment config")
    }

    /// Checks every documented invariant with actionable messages.
    pub fn validate(&self) -> Result<()> {
        ensure!(!self.methods.is_empty(), "methods: at least one method is required");
        ensure!(!self.sweep.values.is_empty(), "sweep.values: at least one value is required");
        ensure!(self.sweep.values.windows(2).all(|w| w[0] < w[1]), "sweep.values must be strictly increasing");
        ensure!(self.sweep.values.iter().all(|v| v.is_finite()), "sweep.values must be finite");
        let var = self.sweep.parse_variable()?;
        if matches!(var, SweepVariable::N | SweepVariable::L) {
            ensure!(
                self.sweep.values.iter().all(|v| *v >= 1.0 && v.fract() == 0.0),
                "sweep.values for {:?} must be positive integers",
                self.sweep.variable
            );
        }
        if let Some(total) = self.sweep.fixed_total_elements {
            ensure!(var == SweepVariable::L, "sweep.fixed_total_elements requires variable = \"l\"");
            for v in &self.sweep.values {
                ensure!(total % (*v as usize) == 0, "fixed_total_elements = {total} is not divisible by L = {v}");
            }
        }
        if var == SweepVariable::PMaxW {
            ensure!(self.sweep.values.iter().all(|v| *v > 0.0), "sweep.values for p_max_w must be positive");
        }
        ensure!(self.trials >= 2, "trials must be at least 2");
        ensure!(self.scenario.m >= 1 && self.scenario.k >= 1, "scenario.m and scenario.k must be at least 1");
        ensure!(self.scenario.n >= 1, "scenario.n must be at least 1");
        self.scenario.fading()?;
        self.scenario.path_loss()?.validate()?;
        self.scenario.geometry().validate()?;
        self.training.subphase_mode()?;
        ensure!(self.training.pilot_power_w > 0.0, "training.pilot_power_w must be positive");
        ensure!(self.training.tau_c > 0.0, "training.tau_c must be positive");
        if let Some(t) = self.training.tau_s {
            ensure!(t >= self.scenario.k as f64, "training.tau_s must be at least K");
        }
        ensure!(self.powers.p_max_w > 0.0, "powers.p_max_w must be positive");
        self.pga.to_pga(0).validate()?;
        self.ga.to_ga(0).validate()?;
        for m in &self.methods {
            let p = m.parse()?;
            if p.evaluation == Evaluation::SpecialCase {
                ensure!(
                    self.scenario.semi_unitary.is_some(),
                    "method {:?}: special_case evaluation needs a [scenario.semi_unitary] section",
                    m.label
                );
            }
        }
        if let Some(su) = &self.scenario.semi_unitary {
            ensure!(su.beta_d > 0.0 && su.c > 0.0 && su.beta1 > 0.0, "semi_unitary gains must be positive");
            ensure!(self.scenario.fading()? == Fading::Rayleigh, "semi_unitary scenarios use fading = \"rayleigh\"");
        }
        let mut labels: Vec<&str> = self.methods.iter().map(|m| m.label.as_str()).collect();
        labels.sort_unstable();
        ensure!(labels.windows(2).all(|w| w[0] != w[1]), "method labels must be unique");
        Ok(())
    }

    /// Parsed methods in declaration order.
    pub fn parsed_methods(&self) -> Result<Vec<ParsedMethod>> {
        self.methods.iter().map(MethodConfig::parse).collect()
    }

    /// Pilot SNR `ρ_p`.
    pub fn rho_p(&self) -> f64 {
        self.training.pilot_power_w / self.powers.sigma2_w()
    }
}

/// `ρ` in linear scale from dB.
pub fn rho_from_db(db: f64) -> f64 {
    db_to_linear(db)
}
