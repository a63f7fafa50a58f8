//! Monte-Carlo oracle for the MRT downlink.
//!
//! Each trial draws a channel realization and training noise, forms the
//! channel estimates of the chosen protocol and records the effective-gain
//! moments `h_k^H ĥ_f` and the precoder power `Σ_j p_j‖ĥ_j‖²`. The SINR is then
//! assembled from the moment estimates (users are never simulated as
//! receivers):
//!
//! ```text
//! γ_k = p_k·|E[h_k^H ĥ_k]|² / (Σ_{f≠k} p_f·E|h_k^H ĥ_f|² + p_k·Var[h_k^H ĥ_k] + Ψ/ρ)
//! ```
//!
//! with `Ψ = E[Σ_j p_j‖ĥ_j‖²]`, i.e. MRT with `ζ² = P_max/Ψ` fixed after the
//! power has been estimated over all trials.
//!
//! Trials use counter-based substreams and are reduced in a fixed order, so
//! results do not depend on the number of worker threads.

use crate::channels::{aggregate_channel, sample_realization_trial, ChannelRealization, PhaseProfile};
use crate::detequiv::PowerConfig;
use crate::error::{Result, RisError};
use crate::estimation::{
    combine_links, estimate_dft_links, simulate_de_observation_trial, simulate_dft_observations_trial,
    training_overhead, DeMatrices, Protocol, TrainingConfig,
};
use crate::geometry::ChannelStatistics;
use crate::linalg::{norm2, quad_form};
use crate::scalar::{abs2, cast, cre, CMat, CVec, Cx, Real};
use rayon::prelude::*;

/// Monte-Carlo settings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McConfig {
    /// Number of trials (≥ 2).
    pub trials: usize,
    /// Master seed of the counter-based substreams.
    pub seed: u64,
    /// Whether the report carries per-user variance estimates.
    pub report_variance: bool,
    /// Number of contiguous batches behind the standard errors (jackknife
    /// for the SINR statistics, batch means for [`mc_average`]).
    pub batches: usize,
}

impl McConfig {
    /// `trials` trials, 20 batches, variance reporting on.
    pub fn new(trials: usize, seed: u64) -> Self {
        Self { trials, seed, report_variance: true, batches: 20 }
    }

    /// Checks `trials ≥ 2` and `batches ≥ 1`.
    pub fn validate(&self) -> Result<()> {
        if self.trials < 2 {
            return Err(RisError::InvalidConfig(format!(
                "at least 2 Monte-Carlo trials are needed for variance estimation, got {}",
                self.trials
            )));
        }
        if self.batches == 0 {
            return Err(RisError::InvalidConfig("batches must be positive".into()));
        }
        Ok(())
    }

    fn batch_count(&self) -> usize {
        self.batches.min(self.trials).max(1)
    }
}

/// Monte-Carlo estimate of the ergodic SINR and its ingredients.
#[derive(Debug, Clone, PartialEq)]
pub struct McSinrReport<T: Real> {
    /// Assembled SINR per user.
    pub gamma_hat: Vec<T>,
    /// Estimates of `E[h_k^H ĥ_k]`.
    pub mean_eff: Vec<Cx<T>>,
    /// Estimates of `Var[h_k^H ĥ_k]` (empty when variance reporting is off).
    pub var_eff: Vec<T>,
    /// Estimates of `E|h_k^H ĥ_f|²`, indexed `[k][f]`.
    pub cross: Vec<Vec<T>>,
    /// Estimate of `Ψ = E[Σ_j p_j‖ĥ_j‖²]`.
    pub psi_hat: T,
    /// Jackknife standard error of `psi_hat`.
    pub psi_stderr: T,
    /// Jackknife standard error of each `gamma_hat`.
    pub gamma_stderr: Vec<T>,
    /// Mean SINR over users.
    pub mean_sinr: T,
    /// Jackknife standard error of `mean_sinr`.
    pub mean_sinr_stderr: T,
    /// Training-loss prefactor of the protocol.
    pub prefactor: T,
    /// `prefactor·Σ_k log2(1 + γ̂_k)`.
    pub net_sum_rate: T,
    /// Jackknife standard error of `net_sum_rate`.
    pub net_sum_rate_stderr: T,
    /// Trials used.
    pub trials: usize,
}

/// MRT precoders for one set of estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct MrtPrecoders<T: Real> {
    /// Columns `g_k = ζ·ĥ_k`.
    pub g: CMat<T>,
    /// Normalization `ζ = √(P_max/Ψ)`.
    pub zeta: T,
    /// This draw's `Σ_k p_k‖ĥ_k‖²`.
    pub psi_sample: T,
}

/// Builds MRT precoders. With `psi = None` the normalization uses this
/// draw's `Σ_k p_k‖ĥ_k‖²`; inside Monte-Carlo the pre-estimated expectation
/// is passed instead.
pub fn mrt_precoders<T: Real>(h_hat: &[CVec<T>], powers: &PowerConfig, psi: Option<T>) -> Result<MrtPrecoders<T>> {
    powers.validate(h_hat.len())?;
    if let Some(k) = h_hat.iter().position(|h| norm2(h) == T::zero()) {
        return Err(RisError::InvalidConfig(format!("estimate of user {k} is the zero vector")));
    }
    let psi_sample = h_hat.iter().zip(&powers.p).fold(T::zero(), |a, (h, p)| a + cast::<T>(*p) * norm2(h));
    let psi_used = psi.unwrap_or(psi_sample);
    if !(psi_used > T::zero()) {
        return Err(RisError::InvalidConfig("precoder power normalization must be positive".into()));
    }
    let zeta = (cast::<T>(powers.p_max_w) / psi_used).sqrt();
    let m = h_hat.first().map_or(0, |h| h.len());
    let g = CMat::<T>::from_fn(m, h_hat.len(), |i, k| h_hat[k][i] * cre(zeta));
    Ok(MrtPrecoders { g, zeta, psi_sample })
}

/// Per-trial channel state needed by the oracle: true aggregate channels and
/// their estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialChannels<T: Real> {
    /// True aggregate channels `h_k`.
    pub h: Vec<CVec<T>>,
    /// Estimates `ĥ_k`.
    pub h_hat: Vec<CVec<T>>,
}

/// Reusable per-protocol state (DE matrices are built once).
#[derive(Debug, Clone)]
pub struct TrialSampler<'a, T: Real> {
    stats: &'a ChannelStatistics<T>,
    phases: &'a PhaseProfile<T>,
    cfg: TrainingConfig,
    de: Option<DeMatrices<T>>,
    mu: Vec<CVec<T>>,
}

impl<'a, T: Real> TrialSampler<'a, T> {
    /// Prepares sampling for `cfg.protocol`.
    pub fn new(stats: &'a ChannelStatistics<T>, phases: &'a PhaseProfile<T>, cfg: &TrainingConfig) -> Result<Self> {
        if phases.len() != stats.dims().nl() {
            return Err(RisError::DimensionMismatch(format!(
                "phase profile has {} entries, expected {}",
                phases.len(),
                stats.dims().nl()
            )));
        }
        let de = match cfg.protocol {
            Protocol::DirectEstimate => Some(DeMatrices::build(stats, cfg)?),
            _ => None,
        };
        let mu = (0..stats.dims().k).map(|k| crate::channels::los_mean(stats, phases, k)).collect();
        Ok(Self { stats, phases, cfg: cfg.clone(), de, mu })
    }

    /// Realization of trial `trial`.
    pub fn realization(&self, seed: u64, trial: u64) -> ChannelRealization<T> {
        sample_realization_trial(self.stats, seed, trial)
    }

    /// True and estimated aggregate channels of trial `trial`.
    pub fn sample(&self, seed: u64, trial: u64) -> Result<TrialChannels<T>> {
        let real = self.realization(seed, trial);
        let k = self.stats.dims().k;
        let h: Vec<CVec<T>> =
            (0..k).map(|ki| aggregate_channel(&real, self.stats, self.phases, ki)).collect::<Result<_>>()?;
        let h_hat = match self.cfg.protocol {
            Protocol::PerfectCsi => h.clone(),
            Protocol::MmseDft => {
                let obs = simulate_dft_observations_trial(&real, self.stats, &self.cfg, seed, trial);
                let links = estimate_dft_links(&obs, self.stats, &self.cfg);
                combine_links(&links, self.stats, self.phases)
            }
            Protocol::DirectEstimate => {
                let de = self.de.as_ref().expect("DE matrices are built for the DE protocol");
                let y = simulate_de_observation_trial(&real, self.stats, self.phases, &self.cfg, seed, trial)?;
                (0..k).map(|ki| &self.mu[ki] + &de.r[ki] * (&de.q[ki] * (&y[ki] - &self.mu[ki]))).collect()
            }
        };
        Ok(TrialChannels { h, h_hat })
    }
}

/// Moments recorded by one trial.
#[derive(Debug, Clone)]
struct TrialMoments<T: Real> {
    eff: Vec<Cx<T>>,
    /// `|h_k^H ĥ_f|²`, row-major `[k][f]`.
    cross: Vec<T>,
    psi: T,
}

impl<T: Real> TrialMoments<T> {
    fn from_channels(ch: &TrialChannels<T>, p: &[T]) -> Self {
        let k = ch.h.len();
        let mut eff = Vec::with_capacity(k);
        let mut cross = Vec::with_capacity(k * k);
        for kk in 0..k {
            for f in 0..k {
                let z = ch.h[kk].dotc(&ch.h_hat[f]);
                if f == kk {
                    eff.push(z);
                }
                cross.push(abs2(z));
            }
        }
        let psi = ch.h_hat.iter().zip(p).fold(T::zero(), |a, (h, pk)| a + *pk * norm2(h));
        Self { eff, cross, psi }
    }

    fn zero(k: usize) -> Self {
        Self { eff: vec![Cx::new(T::zero(), T::zero()); k], cross: vec![T::zero(); k * k], psi: T::zero() }
    }

    fn add(mut self, o: &Self) -> Self {
        for (a, b) in self.eff.iter_mut().zip(&o.eff) {
            *a += *b;
        }
        for (a, b) in self.cross.iter_mut().zip(&o.cross) {
            *a += *b;
        }
        self.psi += o.psi;
        self
    }

    fn sub(mut self, o: &Self) -> Self {
        for (a, b) in self.eff.iter_mut().zip(&o.eff) {
            *a -= *b;
        }
        for (a, b) in self.cross.iter_mut().zip(&o.cross) {
            *a -= *b;
        }
        self.psi -= o.psi;
        self
    }
}

/// Deterministic pairwise (tree) sum of a slice.
fn pairwise_sum<T: Real>(items: &[TrialMoments<T>], k: usize) -> TrialMoments<T> {
    match items.len() {
        0 => TrialMoments::zero(k),
        1 => items[0].clone(),
        n => {
            let (a, b) = items.split_at(n / 2);
            pairwise_sum(a, k).add(&pairwise_sum(b, k))
        }
    }
}

/// Averages of the moments over a set of trials and the assembled SINR.
struct Assembled<T: Real> {
    gamma: Vec<T>,
    mean_eff: Vec<Cx<T>>,
    var_eff: Vec<T>,
    cross: Vec<Vec<T>>,
    psi: T,
}

fn assemble<T: Real>(sum: &TrialMoments<T>, count: usize, p: &[T], rho: T) -> Assembled<T> {
    let k = p.len();
    let n = cast::<T>(count as f64);
    let mean_eff: Vec<Cx<T>> = sum.eff.iter().map(|z| z / n).collect();
    let cross: Vec<Vec<T>> = (0..k).map(|kk| (0..k).map(|f| sum.cross[kk * k + f] / n).collect()).collect();
    let bessel = if count > 1 { n / (n - T::one()) } else { T::one() };
    let var_eff: Vec<T> = (0..k).map(|kk| ((cross[kk][kk] - abs2(mean_eff[kk])) * bessel).max(T::zero())).collect();
    let psi = sum.psi / n;
    let gamma = (0..k)
        .map(|kk| {
            let interf = (0..k).filter(|f| *f != kk).fold(T::zero(), |a, f| a + p[f] * cross[kk][f]);
            p[kk] * abs2(mean_eff[kk]) / (interf + p[kk] * var_eff[kk] + psi / rho)
        })
        .collect();
    Assembled { gamma, mean_eff, var_eff, cross, psi }
}

fn batch_stderr<T: Real>(values: &[T]) -> T {
    let b = values.len();
    if b < 2 {
        return T::zero();
    }
    let bt = cast::<T>(b as f64);
    let mean = values.iter().fold(T::zero(), |a, v| a + *v) / bt;
    let var = values.iter().fold(T::zero(), |a, v| a + (*v - mean) * (*v - mean)) / (bt - T::one());
    (var / bt).sqrt()
}

/// Jackknife standard error from leave-one-batch-out estimates:
/// `√((B−1)/B·Σ_b (θ_(b) − θ̄)²)`.
fn jackknife_stderr<T: Real>(values: &[T]) -> T {
    let b = values.len();
    if b < 2 {
        return T::zero();
    }
    let bt = cast::<T>(b as f64);
    let mean = values.iter().fold(T::zero(), |a, v| a + *v) / bt;
    let ss = values.iter().fold(T::zero(), |a, v| a + (*v - mean) * (*v - mean));
    ((bt - T::one()) / bt * ss).sqrt()
}

fn mean_of<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, x| a + *x) / cast::<T>(v.len() as f64)
}

fn log_rate<T: Real>(gamma: &[T], prefactor: T) -> T {
    prefactor * gamma.iter().fold(T::zero(), |a, g| a + (T::one() + *g).log2())
}

/// Monte-Carlo estimate of the channel-hardening-bound SINR for
/// `cfg.protocol` at fixed phases.
pub fn mc_sinr<T: Real>(
    stats: &ChannelStatistics<T>,
    phases: &PhaseProfile<T>,
    cfg: &TrainingConfig,
    powers: &PowerConfig,
    mc: &McConfig,
) -> Result<McSinrReport<T>> {
    mc.validate()?;
    let k = stats.dims().k;
    powers.validate(k)?;
    let p: Vec<T> = powers.p.iter().map(|x| cast::<T>(*x)).collect();
    let rho = cast::<T>(powers.rho());
    let prefactor = cast::<T>(training_overhead(cfg.protocol, stats.dims(), cfg)?.prefactor);
    let sampler = TrialSampler::new(stats, phases, cfg)?;
    let samples: Vec<TrialMoments<T>> = (0..mc.trials as u64)
        .into_par_iter()
        .map(|t| sampler.sample(mc.seed, t).map(|ch| TrialMoments::from_channels(&ch, &p)))
        .collect::<Result<_>>()?;

    let total = pairwise_sum(&samples, k);
    let all = assemble(&total, mc.trials, &p, rho);

    // Delete-one-batch jackknife: the SINR is a ratio of sample moments,
    // so re-assembling it on each leave-one-batch-out remainder gives far
    // more reliable errors than per-batch ratios of small samples.
    let nb = mc.batch_count();
    let mut jack_gamma: Vec<Vec<T>> = vec![Vec::with_capacity(nb); k];
    let mut jack_mean = Vec::with_capacity(nb);
    let mut jack_rate = Vec::with_capacity(nb);
    let mut jack_psi = Vec::with_capacity(nb);
    for b in 0..nb {
        let lo = b * mc.trials / nb;
        let hi = (b + 1) * mc.trials / nb;
        let rest = total.clone().sub(&pairwise_sum(&samples[lo..hi], k));
        let part = assemble(&rest, mc.trials - (hi - lo), &p, rho);
        for (kk, g) in part.gamma.iter().enumerate() {
            jack_gamma[kk].push(*g);
        }
        jack_mean.push(mean_of(&part.gamma));
        jack_rate.push(log_rate(&part.gamma, prefactor));
        jack_psi.push(part.psi);
    }

    let net_sum_rate = log_rate(&all.gamma, prefactor);
    if !net_sum_rate.is_finite() {
        return Err(RisError::NonFinite("Monte-Carlo net sum-rate".into()));
    }
    Ok(McSinrReport {
        mean_sinr: mean_of(&all.gamma),
        mean_sinr_stderr: jackknife_stderr(&jack_mean),
        gamma_stderr: jack_gamma.iter().map(|v| jackknife_stderr(v)).collect(),
        gamma_hat: all.gamma,
        mean_eff: all.mean_eff,
        var_eff: if mc.report_variance { all.var_eff } else { Vec::new() },
        cross: all.cross,
        psi_hat: all.psi,
        psi_stderr: jackknife_stderr(&jack_psi),
        prefactor,
        net_sum_rate,
        net_sum_rate_stderr: jackknife_stderr(&jack_rate),
        trials: mc.trials,
    })
}

/// `prefactor·Σ_k log2(1 + γ̂_k)` of a Monte-Carlo report.
pub fn mc_net_sum_rate<T: Real>(report: &McSinrReport<T>, prefactor: T) -> T {
    log_rate(&report.gamma_hat, prefactor)
}

/// Achievable instantaneous SINR given the estimates and error covariances
/// `C̃_k`:
/// `p_k|ĥ_k^H ĥ_k|² / (Σ_{f≠k} p_f|ĥ_k^H ĥ_f|² + Σ_f p_f ĥ_f^H C̃_k ĥ_f + Ψ^inst/ρ)`,
/// `Ψ^inst = Σ_f p_f‖ĥ_f‖²`.
pub fn instantaneous_sinr<T: Real>(h_hat: &[CVec<T>], c_tilde: &[CMat<T>], powers: &PowerConfig) -> Result<Vec<T>> {
    let k = h_hat.len();
    powers.validate(k)?;
    if c_tilde.len() != k {
        return Err(RisError::DimensionMismatch(format!("{} error covariances for K = {k}", c_tilde.len())));
    }
    let p: Vec<T> = powers.p.iter().map(|x| cast::<T>(*x)).collect();
    let rho = cast::<T>(powers.rho());
    let norms: Vec<T> = h_hat.iter().map(norm2).collect();
    let psi = norms.iter().zip(&p).fold(T::zero(), |a, (n, pk)| a + *pk * *n);
    Ok((0..k)
        .map(|kk| {
            let mut denom = psi / rho;
            for f in 0..k {
                if f != kk {
                    denom += p[f] * abs2(h_hat[kk].dotc(&h_hat[f]));
                }
                denom += p[f] * quad_form(&c_tilde[kk], &h_hat[f]);
            }
            p[kk] * norms[kk] * norms[kk] / denom
        })
        .collect())
}

/// Instantaneous net sum-rate `prefactor·Σ_k log2(1 + γ_k^inst)`.
pub fn instantaneous_net_rate<T: Real>(
    h_hat: &[CVec<T>],
    c_tilde: &[CMat<T>],
    powers: &PowerConfig,
    prefactor: T,
) -> Result<T> {
    Ok(log_rate(&instantaneous_sinr(h_hat, c_tilde, powers)?, prefactor))
}

/// Mean and batch-means standard error of a per-trial quantity computed in
/// parallel; deterministic in `seed` regardless of thread count.
pub fn mc_average<T: Real, F>(mc: &McConfig, per_trial: F) -> Result<(T, T)>
where
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    mc.validate()?;
    let values: Vec<T> = (0..mc.trials as u64).into_par_iter().map(&per_trial).collect::<Result<_>>()?;
    let nb = mc.batch_count();
    let batches: Vec<T> = (0..nb).map(|b| mean_of(&values[b * mc.trials / nb..(b + 1) * mc.trials / nb])).collect();
    Ok((mean_of(&values), batch_stderr(&batches)))
}
