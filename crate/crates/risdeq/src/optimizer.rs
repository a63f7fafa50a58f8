//! RIS phase design: projected gradient ascent on the statistical-CSI
//! deterministic equivalents and a genetic-algorithm benchmark on the
//! instantaneous net rate.

use crate::channels::{nlos_covariance, PhaseProfile};
use crate::detequiv::{DetEqModel, PowerConfig};
use crate::error::{Result, RisError};
use crate::estimation::{
    combine_links, dft_estimate_covariance, training_overhead, DftLinkEstimates, Protocol, TrainingConfig,
};
use crate::geometry::{ChannelStatistics, Fading};
use crate::montecarlo::instantaneous_net_rate;
use crate::scalar::{abs2, cast, cre, to_f64, CMat, CVec, Real};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Starting point of the gradient ascent.
#[derive(Debug, Clone, PartialEq)]
pub enum PgaInit {
    /// Uniform random phases from a seed.
    Random(u64),
    /// `φ = 1`.
    AllOnes,
    /// Explicit phase angles in radians.
    Provided(Vec<f64>),
}

/// Projected-gradient-ascent settings.
#[derive(Debug, Clone, PartialEq)]
pub struct PgaConfig {
    /// Stop when the squared objective change falls below this value.
    pub epsilon: f64,
    /// Iteration cap.
    pub max_iters: usize,
    /// Initial line-search step.
    pub mu0: f64,
    /// Step shrink factor in `(0, 1)`.
    pub shrink: f64,
    /// Armijo sufficient-increase constant.
    pub armijo_c: f64,
    /// Shrinks before a merely non-decreasing step is accepted.
    pub max_shrinks: usize,
    /// Scale the ascent direction so its largest entry has modulus 1
    /// (makes `mu0` a phase-scale step independent of the rate units).
    pub normalize_direction: bool,
    /// Starting point.
    pub init: PgaInit,
}

impl Default for PgaConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            max_iters: 500,
            mu0: 1.0,
            shrink: 0.5,
            armijo_c: 1e-4,
            max_shrinks: 30,
            normalize_direction: true,
            init: PgaInit::Random(0),
        }
    }
}

impl PgaConfig {
    /// Checks the documented invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(RisError::InvalidConfig("epsilon must be positive".into()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(RisError::InvalidConfig("shrink must lie in (0, 1)".into()));
        }
        if !(self.mu0 > 0.0) {
            return Err(RisError::InvalidConfig("mu0 must be positive".into()));
        }
        Ok(())
    }

    fn initial<T: Real>(&self, len: usize) -> Result<PhaseProfile<T>> {
        match &self.init {
            PgaInit::Random(seed) => Ok(PhaseProfile::random(len, *seed)),
            PgaInit::AllOnes => Ok(PhaseProfile::ones(len)),
            PgaInit::Provided(a) if a.len() == len => {
                Ok(PhaseProfile::from_angles(&a.iter().map(|x| cast::<T>(*x)).collect::<Vec<_>>()))
            }
            PgaInit::Provided(a) => {
                Err(RisError::DimensionMismatch(format!("provided start has {} phases, expected {len}", a.len())))
            }
        }
    }
}

/// One accepted PGA iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgaStep {
    /// Iteration index (0 is the starting point).
    pub iteration: usize,
    /// Objective after the step.
    pub objective: f64,
    /// Accepted step size (0 for the starting point).
    pub step: f64,
    /// Norm of the gradient at the previous iterate.
    pub grad_norm: f64,
}

/// Result of a PGA run.
#[derive(Debug, Clone, PartialEq)]
pub struct PgaResult<T: Real> {
    /// Final phases.
    pub phi: PhaseProfile<T>,
    /// Final objective.
    pub objective: T,
    /// Accepted iterates, starting with the initial point.
    pub trace: Vec<PgaStep>,
}

/// Entrywise projection `exp(j·arg(φ̃))`. Exact zeros have no argument and
/// take the corresponding entry of `previous` (or 1 without one).
pub fn project_unit_modulus<T: Real>(phi_tilde: &CVec<T>, previous: Option<&PhaseProfile<T>>) -> PhaseProfile<T> {
    let out = CVec::<T>::from_iterator(
        phi_tilde.len(),
        phi_tilde.iter().enumerate().map(|(i, z)| {
            let r = abs2(*z).sqrt();
            if r > T::zero() {
                z / cre(r)
            } else {
                log::warn!("projection of an exact zero at index {i}; keeping the previous entry");
                previous.map_or(cre(T::one()), |p| p.as_vector()[i])
            }
        }),
    );
    PhaseProfile::new(out).expect("projection yields unit-modulus entries")
}

/// Projected gradient ascent with backtracking on the post-projection
/// objective. `grad` returns the objective together with the gradient in
/// the `∂/∂Re + j·∂/∂Im` convention; `objective` evaluates trial points.
pub fn projected_gradient_ascent<T, F, G>(objective: F, grad: G, len: usize, cfg: &PgaConfig) -> Result<PgaResult<T>>
where
    T: Real,
    F: Fn(&PhaseProfile<T>) -> Result<T>,
    G: Fn(&PhaseProfile<T>) -> Result<(T, CVec<T>)>,
{
    cfg.validate()?;
    let mut phi = cfg.initial::<T>(len)?;
    let mut f = objective(&phi)?;
    if !f.is_finite() {
        return Err(RisError::NonFinite("initial objective".into()));
    }
    let mut trace = vec![PgaStep { iteration: 0, objective: to_f64(f), step: 0.0, grad_norm: 0.0 }];
    let c = cast::<T>(cfg.armijo_c);
    for iter in 1..=cfg.max_iters {
        let (_, g) = grad(&phi)?;
        if g.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(RisError::NonFinite("gradient".into()));
        }
        let grad_norm = g.iter().fold(T::zero(), |a, z| a + abs2(*z)).sqrt();
        let scale =
            if cfg.normalize_direction { g.iter().fold(T::zero(), |a, z| a.max(abs2(*z).sqrt())) } else { T::one() };
        if !(scale > T::zero()) {
            break;
        }
        let dir = &g / cre(scale);
        let mut mu = cast::<T>(cfg.mu0);
        let mut accepted = None;
        let mut last = None;
        for _ in 0..=cfg.max_shrinks {
            let cand = project_unit_modulus(&(phi.as_vector() + &dir * cre(mu)), Some(&phi));
            let fc = objective(&cand)?;
            let predicted = g.dotc(&(cand.as_vector() - phi.as_vector())).re;
            if fc.is_finite() && fc >= f + c * predicted && fc >= f {
                accepted = Some((cand, fc, mu));
                break;
            }
            last = Some((cand, fc, mu));
            mu *= cast::<T>(cfg.shrink);
        }
        let (cand, fc, step) = match accepted {
            Some(a) => a,
            None => match last {
                Some((cand, fc, mu)) if fc.is_finite() && fc >= f => (cand, fc, mu),
                _ => break,
            },
        };
        let delta = fc - f;
        phi = cand;
        f = fc;
        trace.push(PgaStep { iteration: iter, objective: to_f64(f), step: to_f64(step), grad_norm: to_f64(grad_norm) });
        if to_f64(delta * delta) < cfg.epsilon {
            break;
        }
    }
    Ok(PgaResult { phi, objective: f, trace })
}

fn scsi_gradient<T: Real>(
    stats: &ChannelStatistics<T>,
    phases: &PhaseProfile<T>,
    powers: &PowerConfig,
    cfg: &TrainingConfig,
    protocol: Protocol,
) -> Result<CVec<T>> {
    if stats.fading() == Fading::Rayleigh {
        log::warn!("phase gradient requested under Rayleigh fading; it is identically zero");
        return Ok(CVec::<T>::zeros(stats.dims().nl()));
    }
    Ok(DetEqModel::new(stats, &cfg.with_protocol(protocol), powers)?.objective_and_gradient(phases)?.1)
}

/// Gradient of the MMSE-DFT deterministic-equivalent net sum-rate with
/// respect to the phases (`∂R/∂Re φ + j·∂R/∂Im φ`, RIS-major order).
pub fn grad_dft<T: Real>(
    stats: &ChannelStatistics<T>,
    phases: &PhaseProfile<T>,
    powers: &PowerConfig,
    cfg: &TrainingConfig,
) -> Result<CVec<T>> {
    scsi_gradient(stats, phases, powers, cfg, Protocol::MmseDft)
}

/// Gradient of the DE deterministic-equivalent net sum-rate.
pub fn grad_de<T: Real>(
    stats: &ChannelStatistics<T>,
    phases: &PhaseProfile<T>,
    powers: &PowerConfig,
    cfg: &TrainingConfig,
) -> Result<CVec<T>> {
    scsi_gradient(stats, phases, powers, cfg, Protocol::DirectEstimate)
}

/// Outcome of a multi-start S-CSI optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct ScsiOutcome<T: Real> {
    /// Best run.
    pub best: PgaResult<T>,
    /// Final objective of every start, in start order.
    pub start_objectives: Vec<f64>,
}

/// Optimizes the phases for `cfg.protocol` by PGA from `starts` starting
/// points. With a random init of seed `s`, start `i` uses seed `s + i`;
/// other inits run once. Starts run in parallel; the best is returned.
pub fn optimize_phases_scsi<T: Real>(
    stats: &ChannelStatistics<T>,
    powers: &PowerConfig,
    cfg: &TrainingConfig,
    pga: &PgaConfig,
    starts: usize,
) -> Result<ScsiOutcome<T>> {
    let model = DetEqModel::new(stats, cfg, powers)?;
    let len = stats.dims().nl();
    let configs: Vec<PgaConfig> = match pga.init {
        PgaInit::Random(seed) => (0..starts.max(1) as u64)
            .map(|i| PgaConfig { init: PgaInit::Random(seed.wrapping_add(i)), ..pga.clone() })
            .collect(),
        _ => vec![pga.clone()],
    };
    let runs: Vec<PgaResult<T>> = configs
        .par_iter()
        .map(|c| projected_gradient_ascent(|p| model.objective(p), |p| model.objective_and_gradient(p), len, c))
        .collect::<Result<_>>()?;
    let start_objectives = runs.iter().map(|r| to_f64(r.objective)).collect();
    let best =
        runs.into_iter().reduce(|a, b| if b.objective > a.objective { b } else { a }).expect("at least one start");
    Ok(ScsiOutcome { best, start_objectives })
}

/// Best of `count` seeded random profiles under `score` (ties keep the
/// earlier draw). Returns the profile and its index.
pub fn best_of_random<T: Real, F>(len: usize, count: usize, seed: u64, score: F) -> Result<(PhaseProfile<T>, usize)>
where
    F: Fn(&PhaseProfile<T>) -> Result<f64> + Sync,
{
    if count == 0 {
        return Err(RisError::InvalidConfig("need at least one candidate profile".into()));
    }
    let candidates: Vec<PhaseProfile<T>> =
        (0..count as u64).map(|i| PhaseProfile::random(len, seed.wrapping_add(i))).collect();
    let scores: Vec<f64> = candidates.par_iter().map(&score).collect::<Result<_>>()?;
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    Ok((candidates.into_iter().nth(best).expect("index in range"), best))
}

/// Genetic-algorithm settings.
#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    /// Population size (≥ 2).
    pub population: usize,
    /// Number of generations.
    pub generations: usize,
    /// Initial Gaussian mutation standard deviation in radians.
    pub mutation_std_rad: f64,
    /// Per-generation multiplicative decay of the mutation deviation.
    pub mutation_decay: f64,
    /// Probability that a gene is mutated; `None` means `1/len`.
    pub gene_mutation_prob: Option<f64>,
    /// Probability of blend crossover for each offspring pair.
    pub crossover_rate: f64,
    /// Individuals copied unchanged into the next generation.
    pub elite_count: usize,
    /// Tournament size for parent selection.
    pub tournament_size: usize,
    /// Seed of all GA randomness.
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 50,
            generations: 100,
            mutation_std_rad: 0.3,
            mutation_decay: 0.97,
            gene_mutation_prob: None,
            crossover_rate: 0.9,
            elite_count: 2,
            tournament_size: 3,
            seed: 0,
        }
    }
}

impl GaConfig {
    /// Checks the documented invariants.
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(RisError::InvalidConfig("GA population must be at least 2".into()));
        }
        if self.elite_count >= self.population {
            return Err(RisError::InvalidConfig("elite count must be below the population size".into()));
        }
        if self.tournament_size == 0 {
            return Err(RisError::InvalidConfig("tournament size must be positive".into()));
        }
        Ok(())
    }

    /// Fitness evaluations spent by [`ga_maximize`].
    pub fn evaluation_budget(&self) -> usize {
        self.population + self.generations * (self.population - self.elite_count)
    }
}

/// Best point found by a search over phase angles.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Best angles in radians.
    pub angles: Vec<f64>,
    /// Fitness of the best angles.
    pub fitness: f64,
    /// Fitness evaluations used.
    pub evaluations: usize,
    /// Best fitness after each generation (GA only).
    pub history: Vec<f64>,
}

fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        PI
    } else {
        y
    }
}

fn tournament<R: Rng>(rng: &mut R, fitness: &[f64], size: usize) -> usize {
    let mut best = rng.random_range(0..fitness.len());
    for _ in 1..size {
        let c = rng.random_range(0..fitness.len());
        if fitness[c] > fitness[best] {
            best = c;
        }
    }
    best
}

fn evaluate_all<F>(pop: &[Vec<f64>], fitness: &F) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pop.par_iter()
        .map(|a| {
            let v = fitness(a);
            if v.is_finite() {
                v
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect()
}

/// Real-angle-encoded GA maximizing `fitness` over `len` phases:
/// tournament selection, blend crossover on wrapped angle differences,
/// Gaussian angle mutation with decaying deviation, and elitism.
/// Deterministic given `cfg.seed` (fitness values are computed in parallel
/// but consumed in a fixed order).
pub fn ga_maximize<F>(len: usize, cfg: &GaConfig, fitness: F) -> Result<SearchResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let gene_prob = cfg.gene_mutation_prob.unwrap_or(1.0 / len.max(1) as f64);
    let mut pop: Vec<Vec<f64>> =
        (0..cfg.population).map(|_| (0..len).map(|_| rng.random_range(-PI..PI)).collect()).collect();
    let mut fit = evaluate_all(&pop, &fitness);
    let mut evaluations = pop.len();
    let mut sigma = cfg.mutation_std_rad;
    let normal = rand_distr::Normal::new(0.0, 1.0).expect("unit normal");
    let mut history = Vec::with_capacity(cfg.generations);
    for _ in 0..cfg.generations {
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|a, b| fit[*b].total_cmp(&fit[*a]));
        let mut next: Vec<Vec<f64>> = order[..cfg.elite_count].iter().map(|i| pop[*i].clone()).collect();
        let next_fit_elite: Vec<f64> = order[..cfg.elite_count].iter().map(|i| fit[*i]).collect();
        let mut children = Vec::with_capacity(cfg.population - cfg.elite_count);
        while children.len() < cfg.population - cfg.elite_count {
            let a = &pop[tournament(&mut rng, &fit, cfg.tournament_size)];
            let b = &pop[tournament(&mut rng, &fit, cfg.tournament_size)];
            let (mut c1, mut c2) = (a.clone(), b.clone());
            if rng.random::<f64>() < cfg.crossover_rate {
                for i in 0..len {
                    let d = wrap_angle(b[i] - a[i]);
                    let u1: f64 = rng.random_range(-0.5..1.5);
                    let u2: f64 = rng.random_range(-0.5..1.5);
                    c1[i] = wrap_angle(a[i] + u1 * d);
                    c2[i] = wrap_angle(a[i] + u2 * d);
                }
            }
            for child in [&mut c1, &mut c2] {
                for g in child.iter_mut() {
                    if rng.random::<f64>() < gene_prob {
                        let z: f64 = rand_distr::Distribution::sample(&normal, &mut rng);
                        *g = wrap_angle(*g + sigma * z);
                    }
                }
            }
            children.push(c1);
            if children.len() < cfg.population - cfg.elite_count {
                children.push(c2);
            }
        }
        let child_fit = evaluate_all(&children, &fitness);
        evaluations += children.len();
        next.extend(children);
        fit = next_fit_elite.into_iter().chain(child_fit).collect();
        pop = next;
        sigma *= cfg.mutation_decay;
        history.push(fit.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
    let best = (0..pop.len()).fold(0, |b, i| if fit[i] > fit[b] { i } else { b });
    Ok(SearchResult { angles: pop[best].clone(), fitness: fit[best], evaluations, history })
}

/// Uniform random search with `budget` evaluations.
pub fn random_search<F>(len: usize, budget: usize, seed: u64, fitness: F) -> Result<SearchResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if budget == 0 {
        return Err(RisError::InvalidConfig("random search needs a positive budget".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pop: Vec<Vec<f64>> = (0..budget).map(|_| (0..len).map(|_| rng.random_range(-PI..PI)).collect()).collect();
    let fit = evaluate_all(&pop, &fitness);
    let best = (0..pop.len()).fold(0, |b, i| if fit[i] > fit[b] { i } else { b });
    Ok(SearchResult { angles: pop[best].clone(), fitness: fit[best], evaluations: budget, history: Vec::new() })
}

/// Instantaneous net sum-rate of one coherence block as a function of the
/// phases, given full per-link MMSE-DFT estimates.
#[derive(Debug, Clone)]
pub struct IcsiObjective<'a, T: Real> {
    stats: &'a ChannelStatistics<T>,
    links: &'a DftLinkEstimates<T>,
    c_tilde: Vec<CMat<T>>,
    powers: PowerConfig,
    prefactor: T,
}

impl<'a, T: Real> IcsiObjective<'a, T> {
    /// Builds the objective with error covariances `C̃_k = A_k − C_k`.
    pub fn new(
        stats: &'a ChannelStatistics<T>,
        links: &'a DftLinkEstimates<T>,
        powers: &PowerConfig,
        cfg: &TrainingConfig,
    ) -> Result<Self> {
        let k = stats.dims().k;
        powers.validate(k)?;
        let c_tilde = (0..k).map(|ki| nlos_covariance(stats, ki) - dft_estimate_covariance(stats, cfg, ki)).collect();
        let prefactor = cast::<T>(training_overhead(Protocol::MmseDft, stats.dims(), cfg)?.prefactor);
        Ok(Self { stats, links, c_tilde, powers: powers.clone(), prefactor })
    }

    /// Instantaneous net sum-rate at `phases`.
    pub fn evaluate(&self, phases: &PhaseProfile<T>) -> Result<T> {
        let h_hat = combine_links(self.links, self.stats, phases);
        instantaneous_net_rate(&h_hat, &self.c_tilde, &self.powers, self.prefactor)
    }

    /// Same objective on phase angles (`-inf` on failure).
    pub fn evaluate_angles(&self, angles: &[f64]) -> f64 {
        let theta: Vec<T> = angles.iter().map(|a| cast::<T>(*a)).collect();
        self.evaluate(&PhaseProfile::from_angles(&theta)).map_or(f64::NEG_INFINITY, to_f64)
    }
}

/// GA maximization of the instantaneous net sum-rate for one coherence
/// block. Returns the best phases and their rate.
pub fn ga_optimize_icsi<T: Real>(
    links: &DftLinkEstimates<T>,
    stats: &ChannelStatistics<T>,
    powers: &PowerConfig,
    cfg: &TrainingConfig,
    ga: &GaConfig,
) -> Result<(PhaseProfile<T>, T)> {
    let obj = IcsiObjective::new(stats, links, powers, cfg)?;
    let res = ga_maximize(stats.dims().nl(), ga, |a| obj.evaluate_angles(a))?;
    let theta: Vec<T> = res.angles.iter().map(|a| cast::<T>(*a)).collect();
    let phi = PhaseProfile::from_angles(&theta);
    let rate = obj.evaluate(&phi)?;
    Ok((phi, rate))
}
