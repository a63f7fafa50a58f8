//! Channel estimation: the multi-subphase MMSE-DFT protocol, the
//! single-subphase direct-estimation (DE) protocol, estimate covariances and
//! training-overhead accounting.

use crate::channels::{reflect, ChannelRealization, PhaseProfile, StreamTag};
use crate::error::{Result, RisError};
use crate::geometry::{ChannelStatistics, SystemDims};
use crate::linalg::hermitian_inverse;
use crate::scalar::{cast, cis, complex_normal_vec, cre, CMat, CVec, Real};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// How the BS acquires the instantaneous channel used for precoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// Per-link MMSE estimation over `S = NL/M + 1` DFT training sub-phases.
    MmseDft,
    /// MMSE estimation of the aggregate channel in one sub-phase.
    DirectEstimate,
    /// Genie-aided perfect CSI.
    PerfectCsi,
}

/// Treatment of the sub-phase count `S = NL/M + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SubphaseMode {
    /// Keep `S` fractional.
    #[default]
    Fractional,
    /// Round `S` up to an integer.
    Ceiling,
}

/// Training parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    /// Linear training SNR `ρ_p`.
    pub rho_p: f64,
    /// Symbols per training sub-phase `τ_S`.
    pub tau_s: f64,
    /// Coherence block length `τ_C` in symbols.
    pub tau_c: f64,
    /// Estimation protocol.
    pub protocol: Protocol,
    /// Fractional or integer sub-phase count.
    pub subphase_mode: SubphaseMode,
    /// Whether perfect CSI pays one sub-phase of training (`1 − τ_S/τ_C`);
    /// when false its prefactor is 1.
    pub perfect_csi_pays_training: bool,
}

impl TrainingConfig {
    /// Configuration with `τ_S = K`, `τ_C = 2000`, fractional `S`.
    pub fn new(protocol: Protocol, rho_p: f64, k: usize) -> Self {
        Self {
            rho_p,
            tau_s: k as f64,
            tau_c: 2000.0,
            protocol,
            subphase_mode: SubphaseMode::Fractional,
            perfect_csi_pays_training: true,
        }
    }

    /// Same parameters with another protocol.
    pub fn with_protocol(&self, protocol: Protocol) -> Self {
        Self { protocol, ..self.clone() }
    }

    /// Checks the documented invariants against the dimensions.
    pub fn validate(&self, dims: &SystemDims) -> Result<()> {
        if !(self.rho_p > 0.0) {
            return Err(RisError::InvalidConfig(format!("rho_p must be positive, got {}", self.rho_p)));
        }
        if !(self.tau_s >= dims.k as f64) {
            return Err(RisError::InvalidConfig(format!("tau_s = {} must be at least K = {}", self.tau_s, dims.k)));
        }
        training_overhead(self.protocol, dims, self).map(|_| ())
    }

    /// `1/(ρ_p·τ_S)`.
    pub fn inverse_training_snr(&self) -> f64 {
        1.0 / (self.rho_p * self.tau_s)
    }
}

/// Training cost of one coherence block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overhead {
    /// Sub-phase count `S` (possibly fractional).
    pub s: f64,
    /// Training symbols `S·τ_S`.
    pub symbols: f64,
    /// Net-rate prefactor `1 − S·τ_S/τ_C`.
    pub prefactor: f64,
}

/// Sub-phase count of the protocol.
pub fn subphases(protocol: Protocol, dims: &SystemDims, mode: SubphaseMode) -> f64 {
    match protocol {
        Protocol::MmseDft => {
            let s = dims.nl() as f64 / dims.m as f64 + 1.0;
            match mode {
                SubphaseMode::Fractional => s,
                SubphaseMode::Ceiling => s.ceil(),
            }
        }
        Protocol::DirectEstimate | Protocol::PerfectCsi => 1.0,
    }
}

/// Training overhead and the resulting net-rate prefactor.
pub fn training_overhead(protocol: Protocol, dims: &SystemDims, cfg: &TrainingConfig) -> Result<Overhead> {
    let s = subphases(protocol, dims, cfg.subphase_mode);
    let symbols = s * cfg.tau_s;
    let prefactor = match protocol {
        Protocol::PerfectCsi if !cfg.perfect_csi_pays_training => 1.0,
        _ => 1.0 - symbols / cfg.tau_c,
    };
    if !(prefactor > 0.0) {
        return Err(RisError::InfeasibleOverhead { overhead: symbols, tau_c: cfg.tau_c });
    }
    Ok(Overhead { s, symbols, prefactor })
}

/// DFT training matrix `[V]_{s,n} = exp(−j·2π·n·s/S)` (0-based `s`, `n`) of
/// size `S × cols`.
pub fn dft_training_matrix<T: Real>(s: usize, cols: usize) -> Result<CMat<T>> {
    if s < 1 {
        return Err(RisError::InvalidConfig("DFT training needs S >= 1".into()));
    }
    Ok(CMat::<T>::from_fn(s, cols, |si, ni| {
        let e = ((ni * si) % s) as f64;
        cis(cast::<T>(-2.0 * PI * e / s as f64))
    }))
}

/// Post-processed MMSE-DFT training observations.
#[derive(Debug, Clone, PartialEq)]
pub struct DftObservations<T: Real> {
    /// `r_0k`: noisy observation of `h_dk`.
    pub r0: Vec<CVec<T>>,
    /// `r_lk`: noisy observation of `h_2lk`, indexed `[l][k]`.
    pub rl: Vec<Vec<CVec<T>>>,
}

/// Effective observation-noise variances `(1/(S·ρ_p·τ_S), [1/(S·ρ_p·τ_S·M·β_1l)])`.
pub fn dft_noise_variances<T: Real>(stats: &ChannelStatistics<T>, cfg: &TrainingConfig) -> (T, Vec<T>) {
    let dims = stats.dims();
    let s = subphases(Protocol::MmseDft, dims, cfg.subphase_mode);
    let base = cast::<T>(1.0 / (s * cfg.rho_p * cfg.tau_s));
    let m = cast::<T>(dims.m as f64);
    let ris = stats.beta1().iter().map(|b1| base / (m * *b1)).collect();
    (base, ris)
}

fn simulate_dft_with<T: Real>(
    real: &ChannelRealization<T>,
    stats: &ChannelStatistics<T>,
    cfg: &TrainingConfig,
    mut rng_for: impl FnMut(usize, StreamTag) -> ChaCha8Rng,
) -> DftObservations<T> {
    let d = stats.dims();
    let (var0, var_l) = dft_noise_variances(stats, cfg);
    let r0 = (0..d.k)
        .map(|k| {
            let mut rng = rng_for(k, StreamTag::DirectTrainingNoise);
            &real.h_d[k] + complex_normal_vec(&mut rng, d.m, var0)
        })
        .collect();
    let rl = (0..d.l)
        .map(|l| {
            (0..d.k)
                .map(|k| {
                    let mut rng = rng_for(k, StreamTag::RisTrainingNoise(l));
                    &real.h2[l][k] + complex_normal_vec(&mut rng, d.n(), var_l[l])
                })
                .collect()
        })
        .collect();
    DftObservations { r0, rl }
}

/// Simulates the post-processed MMSE-DFT observations
/// `r_0k = h_dk + n_0k`, `r_lk = h_2lk + n_lk` with effective noise variances
/// from [`dft_noise_variances`].
pub fn simulate_dft_observations<T: Real, R: Rng + ?Sized>(
    real: &ChannelRealization<T>,
    stats: &ChannelStatistics<T>,
    cfg: &TrainingConfig,
    rng: &mut R,
) -> DftObservations<T> {
    let base: u64 = rng.random();
    simulate_dft_with(real, stats, cfg, |k, tag| crate::channels::substream(base, 0, k, tag))
}

/// Observation simulation on the per-(trial, user, link) substreams.
pub fn simulate_dft_observations_trial<T: Real>(
    real: &ChannelRealization<T>,
    stats: &ChannelStatistics<T>,
    cfg: &TrainingConfig,
    seed: u64,
    trial: u64,
) -> DftObservations<T> {
    simulate_dft_with(real, stats, cfg, |k, tag| crate::channels::substream(seed, trial, k, tag))
}

/// Full training pipeline for an integer number of sub-phases `s ≥ NL+1`:
/// draws the raw `M·S` received noise `CN(0, I/(ρ_p·τ_S))`, projects it with
/// the DFT training matrix and the block-diagonal LoS matrix `H̄_1l`, and
/// returns the resulting observations. Used to validate the effective-noise
/// shortcut of [`simulate_dft_observations`].
pub fn simulate_dft_observations_full<T: Real, R: Rng + ?Sized>(
    real: &ChannelRealization<T>,
    stats: &ChannelStatistics<T>,
    cfg: &TrainingConfig,
    s: usize,
    rng: &mut R,
) -> Result<DftObservations<T>> {
    let d = stats.dims();
    let (m, n) = (d.m, d.n());
    if s < d.nl() + 1 {
        return Err(RisError::InvalidConfig(format!(
            "full pipeline needs S >= NL+1 = {} orthogonal training columns, got {s}",
            d.nl() + 1
        )));
    }
    let v = dft_training_matrix::<T>(s, d.nl() + 1)?;
    let var = cast::<T>(cfg.inverse_training_snr());
    let s_t = cast::<T>(s as f64);
    let mut r0 = Vec::with_capacity(d.k);
    let mut rl = vec![Vec::with_capacity(d.k); d.l];
    for k in 0..d.k {
        // Noise blocks n_s ∈ C^M for s = 0..S.
        let noise: Vec<CVec<T>> = (0..s).map(|_| complex_normal_vec(rng, m, var)).collect();
        // Column-wise despreading: block_c = Σ_s conj(V[s,c])·n_s.
        let despread = |c: usize| -> CVec<T> {
            let mut acc = CVec::<T>::zeros(m);
            for (si, ns) in noise.iter().enumerate() {
                acc.axpy(v[(si, c)].conj(), ns, cre(T::one()));
            }
            acc
        };
        r0.push(&real.h_d[k] + despread(0) * cre(T::one() / s_t));
        for l in 0..d.l {
            let h1 = &stats.h1()[l];
            let denom = s_t * cast::<T>(m as f64) * stats.beta1()[l];
            let proj = CVec::<T>::from_iterator(
                n,
                (0..n).map(|ni| h1.column(ni).dotc(&despread(1 + l * n + ni)) / cre(denom)),
            );
            rl[l].push(&real.h2[l][k] + proj);
        }
    }
    Ok(DftObservations { r0, rl })
}

/// Channel estimate of every user plus its covariance description.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate<T: Real> {
    /// Aggregate estimates `ĥ_k`.
    pub h_hat: Vec<CVec<T>>,
    /// Estimate covariances `C_k` (covariance of `ĥ_k − μ̂_k`).
    pub c: Vec<CMat<T>>,
    /// Deterministic mean part `μ̂_k` (equals the LoS mean).
    pub mu_hat: Vec<CVec<T>>,
    /// Protocol that produced the estimate.
    pub protocol: Protocol,
}

/// Per-link MMSE-DFT estimates `ĥ_dk`, `ĥ_2lk` (full instantaneous CSI of
/// every link, before combining through the RIS phases).
#[derive(Debug, Clone, PartialEq)]
pub struct DftLinkEstimates<T: Real> {
    /// `ĥ_dk = h̄_dk + ĥ^n_dk`.
    pub h_d: Vec<CVec<T>>,
    /// `ĥ_2lk = h̄_2lk + ĥ^n_2lk`, indexed `[l][k]`.
    pub h2: Vec<Vec<CVec<T>>>,
}

/// Scalar MMSE shrinkage factors `(β^n_dk/(β^n_dk + σ²_0), [β^n_2lk/(β^n_2lk + σ²_l)])` of user `k`.
pub fn dft_shrinkage<T: Real>(stats: &ChannelStatistics<T>, cfg: &TrainingConfig, k: usize) -> (T, Vec<T>) {
    let (var0, var_l) = dft_noise_variances(stats, cfg);
    let bd = stats.beta_n_d(k);
    let ris = (0..stats.dims().l)
        .map(|l| {
            let b = stats.beta_n_2(l, k);
            b / (b + var_l[l])
        })
        .collect();
    (bd / (bd + var0), ris)
}

/// Per-link MMSE estimates from DFT observations.
pub fn estimate_dft_links<T: Real>(
    obs: &DftObservations<T>,
    stats: &ChannelStatistics<T>,
    cfg: &TrainingConfig,
) -> DftLinkEstimates<T> {
    let d = stats.dims();
    let mut h_d = Vec::with_capacity(d.k);
    let mut h2 = vec![Vec::with_capacity(d.k); d.l];
    for k in 0..d.k {
        let (wd, wl) = dft_shrinkage(stats, cfg, k);
        let hbar = &stats.h_bar_d()[k];
        h_d.push(hbar + (&obs.r0[k] - hbar) * cre(wd));
        for l in 0..d.l {
            let hb2 = &stats.h_bar2()[l][k];
            h2[l].push(hb2 + (&obs.rl[l][k] - hb2) * cre(wl[l]));
        }
    }
    DftLinkEstimates { h_d, h2 }
}

/// MMSE-DFT estimate covariance
/// `C_k = β^n_dk²/(β^n_dk + σ²_0)·I + Σ_l β^n_2lk²/(β^n_2lk + σ²_l)·H_1l·H_1l^H`.
pub fn dft_estimate_covariance<T: Real>(stats: &ChannelStatistics<T>, cfg: &TrainingConfig, k: usize) -> CMat<T> {
    let (wd, wl) = dft_shrinkage(stats, cfg, k);
    let m = stats.dims().m;
    let mut c = CMat::<T>::identity(m, m) * cre(wd * stats.beta_n_d(k));
    for (l, g) in stats.gram().iter().enumerate() {
        c += g * cre(wl[l] * stats.beta_n_2(l, k));
    }
    c
}

/// Combines per-link estimates through the RIS phases:
/// `ĥ_k = ĥ_dk + Σ_l H_1l·Θ_l·ĥ_2lk`.
pub fn combine_links<T: Real>(
    links: &DftLinkEstimates<T>,
    stats: &ChannelStatistics<T>,
    phases: &PhaseProfile<T>,
) -> Vec<CVec<T>> {
    (0..stats.dims().k)
        .map(|k| {
            let per_ris: Vec<&CVec<T>> = links.h2.iter().map(|row| &row[k]).collect();
            &links.h_d[k] + reflect(stats, phases, &per_ris)
        })
        .collect()
}

/// Full MMSE-DFT estimate of the aggregate channels.
pub fn mmse_dft_estimate<T: Real>(
    obs: &DftObservations<T>,
    stats: &ChannelStatistics<T>,
    phases: &PhaseProfile<T>,
    cfg: &TrainingConfig,
) -> Result<ChannelEstimate<T>> {
    check_len(stats, phases)?;
    let links = estimate_dft_links(obs, stats, cfg);
    let k = stats.dims().k;
    Ok(ChannelEstimate {
        h_hat: combine_links(&links, stats, phases),
        c: (0..k).map(|ki| dft_estimate_covariance(stats, cfg, ki)).collect(),
        mu_hat: (0..k).map(|ki| crate::channels::los_mean(stats, phases, ki)).collect(),
        protocol: Protocol::MmseDft,
    })
}

/// Matrices of the direct-estimation MMSE estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct DeMatrices<T: Real> {
    /// `R_k = β^n_dk·I + Σ_l β^n_2lk·H_1l·H_1l^H`.
    pub r: Vec<CMat<T>>,
    /// `Q_k = (R_k + I/(ρ_p·τ_S))^{-1}`.
    pub q: Vec<CMat<T>>,
}

impl<T: Real> DeMatrices<T> {
    /// Builds `R_k` and `Q_k` for every user.
    pub fn build(stats: &ChannelStatistics<T>, cfg: &TrainingConfig) -> Result<Self> {
        let m = stats.dims().m;
        let noise = cre(cast::<T>(cfg.inverse_training_snr()));
        let mut r = Vec::with_capacity(stats.dims().k);
        let mut q = Vec::with_capacity(stats.dims().k);
        for k in 0..stats.dims().k {
            let rk = crate::channels::nlos_covariance(stats, k);
            let qk = hermitian_inverse(&(&rk + CMat::<T>::identity(m, m) * noise))?;
            r.push(rk);
            q.push(qk);
        }
        Ok(Self { r, q })
    }

    /// Estimate covariance `R_k·Q_k·R_k`.
    pub fn covariance(&self, k: usize) -> CMat<T> {
        &self.r[k] * &self.q[k] * &self.r[k]
    }
}

/// Simulates `y_k = h_k(φ) + n`, `n ~ CN(0, I/(ρ_p·τ_S))`.
pub fn simulate_de_observation<T: Real, R: Rng + ?Sized>(
    real: &ChannelRealization<T>,
    stats: &ChannelStatistics<T>,
    phases: &PhaseProfile<T>,
    cfg: &TrainingConfig,
    rng: &mut R,
) -> Result<Vec<CVec<T>>> {
    let base: u64 = rng.random();
    simulate_de_observation_trial(real, stats, phases, cfg, base, 0)
}

/// DE observations on the per-(trial, user) substreams.
pub fn simulate_de_observation_trial<T: Real>(
    real: &ChannelRealization<T>,
    stats: &ChannelStatistics<T>,
    phases: &PhaseProfile<T>,
    cfg: &TrainingConfig,
    seed: u64,
    trial: u64,
) -> Result<Vec<CVec<T>>> {
    let d = stats.dims();
    let var = cast::<T>(cfg.inverse_training_snr());
    (0..d.k)
        .map(|k| {
            let h = crate::channels::aggregate_channel(real, stats, phases, k)?;
            let mut rng = crate::channels::substream(seed, trial, k, StreamTag::AggregateTrainingNoise);
            Ok(h + complex_normal_vec(&mut rng, d.m, var))
        })
        .collect()
}

/// DE MMSE estimate `ĥ_k = μ_k + R_k·Q_k·(y_k − μ_k)`, covariance `R_k·Q_k·R_k`.
pub fn mmse_de_estimate<T: Real>(
    y: &[CVec<T>],
    stats: &ChannelStatistics<T>,
    phases: &PhaseProfile<T>,
    de: &DeMatrices<T>,
) -> Result<ChannelEstimate<T>> {
    check_len(stats, phases)?;
    let k = stats.dims().k;
    if y.len() != k {
        return Err(RisError::DimensionMismatch(format!("{} observations for K = {k}", y.len())));
    }
    let mu: Vec<CVec<T>> = (0..k).map(|ki| crate::channels::los_mean(stats, phases, ki)).collect();
    let h_hat = (0..k).map(|ki| &mu[ki] + &de.r[ki] * (&de.q[ki] * (&y[ki] - &mu[ki]))).collect();
    Ok(ChannelEstimate {
        h_hat,
        c: (0..k).map(|ki| de.covariance(ki)).collect(),
        mu_hat: mu,
        protocol: Protocol::DirectEstimate,
    })
}

/// Estimate covariance of every user under `cfg.protocol`: the MMSE-DFT
/// `C_k`, the DE `R_k·Q_k·R_k`, or `A_k` for perfect CSI.
pub fn estimate_covariances<T: Real>(stats: &ChannelStatistics<T>, cfg: &TrainingConfig) -> Result<Vec<CMat<T>>> {
    let k = stats.dims().k;
    match cfg.protocol {
        Protocol::MmseDft => Ok((0..k).map(|ki| dft_estimate_covariance(stats, cfg, ki)).collect()),
        Protocol::DirectEstimate => {
            let de = DeMatrices::build(stats, cfg)?;
            Ok((0..k).map(|ki| de.covariance(ki)).collect())
        }
        Protocol::PerfectCsi => Ok((0..k).map(|ki| crate::channels::nlos_covariance(stats, ki)).collect()),
    }
}

fn check_len<T: Real>(stats: &ChannelStatistics<T>, phases: &PhaseProfile<T>) -> Result<()> {
    if phases.len() != stats.dims().nl() {
        return Err(RisError::DimensionMismatch(format!(
            "phase profile has {} entries, expected {}",
            phases.len(),
            stats.dims().nl()
        )));
    }
    Ok(())
}
