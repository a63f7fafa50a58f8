//! Random channel realizations, RIS phase profiles and the statistically
//! equivalent (mean, covariance) description of the aggregate channel.

use crate::error::{Result, RisError};
use crate::geometry::{ChannelStatistics, Fading};
use crate::scalar::{abs2, cast, cis, complex_normal_vec, cre, CMat, CVec, Cx, Real};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Tolerance on `|φ_ln| = 1` for the scalar type `T`.
pub fn unit_modulus_tol<T: Real>() -> T {
    cast::<T>(1e-12).max(T::eps() * cast::<T>(64.0))
}

/// Stacked unit-modulus RIS phase vector `[φ_11 … φ_1N, φ_21 … φ_LN]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile<T: Real> {
    phi: CVec<T>,
}

impl<T: Real> PhaseProfile<T> {
    /// Validates unit modulus of every entry.
    pub fn new(phi: CVec<T>) -> Result<Self> {
        let tol = unit_modulus_tol::<T>();
        if let Some((i, z)) = phi.iter().enumerate().find(|(_, z)| (abs2(**z).sqrt() - T::one()).abs() > tol) {
            return Err(RisError::InvalidConfig(format!(
                "phase entry {i} has modulus {} (must be 1)",
                abs2(*z).sqrt()
            )));
        }
        Ok(Self { phi })
    }

    /// Profile `exp(j·θ)` from angles.
    pub fn from_angles(theta: &[T]) -> Self {
        Self { phi: CVec::<T>::from_iterator(theta.len(), theta.iter().map(|t| cis(*t))) }
    }

    /// All-ones profile of length `len`.
    pub fn ones(len: usize) -> Self {
        Self { phi: CVec::<T>::from_element(len, cre(T::one())) }
    }

    /// Uniformly random phases from a seed.
    pub fn random(len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(len, &mut rng)
    }

    /// Uniformly random phases from an RNG.
    pub fn random_with<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let two_pi = cast::<T>(2.0 * PI);
        let theta: Vec<T> = (0..len).map(|_| T::unit_uniform(rng) * two_pi).collect();
        Self::from_angles(&theta)
    }

    /// Stacked vector.
    pub fn as_vector(&self) -> &CVec<T> {
        &self.phi
    }

    /// Length `N·L`.
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    /// True for the empty (no-RIS) profile.
    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// Phase angles in `(-π, π]`.
    pub fn angles(&self) -> Vec<T> {
        self.phi.iter().map(|z| crate::scalar::arg(*z)).collect()
    }

    /// Entry `φ_ln` of RIS `l` (0-based), element `n`, with `N` per RIS.
    pub fn entry(&self, l: usize, n: usize, per_ris: usize) -> Cx<T> {
        self.phi[l * per_ris + n]
    }

    /// Largest deviation from unit modulus.
    pub fn max_modulus_error(&self) -> T {
        self.phi.iter().fold(T::zero(), |m, z| m.max((abs2(*z).sqrt() - T::one()).abs()))
    }
}

/// One random draw of all user-side channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T: Real> {
    /// Direct BS–user channels `h_dk`.
    pub h_d: Vec<CVec<T>>,
    /// RIS–user channels `h_2lk`, indexed `[l][k]`.
    pub h2: Vec<Vec<CVec<T>>>,
    /// Fading model the draw came from.
    pub fading: Fading,
}

/// Identifies an independent random substream within one Monte-Carlo trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamTag {
    /// NLoS part of the direct link.
    DirectLink,
    /// Effective training noise on the direct-link observation.
    DirectTrainingNoise,
    /// Training noise of the aggregate-channel (direct estimation) observation.
    AggregateTrainingNoise,
    /// NLoS part of the link from RIS `l`.
    RisLink(usize),
    /// Effective training noise on the RIS-`l` observation.
    RisTrainingNoise(usize),
    /// Free-form auxiliary stream (e.g. per-trial optimizer seeds).
    Auxiliary(usize),
}

impl StreamTag {
    fn code(self) -> u64 {
        match self {
            StreamTag::DirectLink => 0,
            StreamTag::DirectTrainingNoise => 1,
            StreamTag::AggregateTrainingNoise => 2,
            StreamTag::RisLink(l) => 16 + 2 * l as u64,
            StreamTag::RisTrainingNoise(l) => 17 + 2 * l as u64,
            StreamTag::Auxiliary(i) => 8 + i as u64 % 8,
        }
    }
}

/// Counter-based RNG for `(trial, user, tag)`: a ChaCha8 generator keyed by
/// `seed` whose 64-bit stream id encodes the triple. Draws in different
/// substreams never overlap, so any schedule of trials across threads
/// reproduces the same numbers.
pub fn substream(seed: u64, trial: u64, user: usize, tag: StreamTag) -> ChaCha8Rng {
    let code = tag.code();
    assert!(trial < (1 << 32), "trial index exceeds 2^32");
    assert!(user < (1 << 16), "user index exceeds 2^16");
    assert!(code < (1 << 16), "RIS index exceeds substream capacity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((trial << 32) | ((user as u64) << 16) | code);
    rng
}

fn draw_realization<T: Real>(
    stats: &ChannelStatistics<T>,
    mut rng_for: impl FnMut(usize, StreamTag) -> ChaCha8Rng,
) -> ChannelRealization<T> {
    let d = stats.dims();
    let mut h_d = Vec::with_capacity(d.k);
    for k in 0..d.k {
        let mut rng = rng_for(k, StreamTag::DirectLink);
        h_d.push(&stats.h_bar_d()[k] + complex_normal_vec(&mut rng, d.m, stats.beta_n_d(k)));
    }
    let h2 = (0..d.l)
        .map(|l| {
            (0..d.k)
                .map(|k| {
                    let mut rng = rng_for(k, StreamTag::RisLink(l));
                    &stats.h_bar2()[l][k] + complex_normal_vec(&mut rng, d.n(), stats.beta_n_2(l, k))
                })
                .collect()
        })
        .collect();
    ChannelRealization { h_d, h2, fading: stats.fading() }
}

/// Draws one realization: `h_dk ~ CN(h̄_dk, β^n_dk·I)`,
/// `h_2lk ~ CN(h̄_2lk, β^n_2lk·I)`, all independent. Sub-generators for each
/// link are split off `rng` in a fixed order.
pub fn sample_realization<T: Real, R: Rng + ?Sized>(
    stats: &ChannelStatistics<T>,
    rng: &mut R,
) -> ChannelRealization<T> {
    let base: u64 = rng.random();
    draw_realization(stats, |k, tag| substream(base, 0, k, tag))
}

/// Realization of Monte-Carlo trial `trial` under master seed `seed`, drawn
/// from the per-(trial, user, link) substreams.
pub fn sample_realization_trial<T: Real>(stats: &ChannelStatistics<T>, seed: u64, trial: u64) -> ChannelRealization<T> {
    draw_realization(stats, |k, tag| substream(seed, trial, k, tag))
}

fn check_phases<T: Real>(stats: &ChannelStatistics<T>, phases: &PhaseProfile<T>) -> Result<()> {
    let nl = stats.dims().nl();
    if phases.len() != nl {
        return Err(RisError::DimensionMismatch(format!(
            "phase profile has {} entries, expected N·L = {nl}",
            phases.len()
        )));
    }
    Ok(())
}

/// `Σ_l H_1l·diag(φ_l)·v_l` for per-RIS vectors `v_l`.
pub fn reflect<T: Real>(stats: &ChannelStatistics<T>, phases: &PhaseProfile<T>, per_ris: &[&CVec<T>]) -> CVec<T> {
    let d = stats.dims();
    let n = d.n();
    let mut out = CVec::<T>::zeros(d.m);
    for (l, v) in per_ris.iter().enumerate() {
        let scaled = CVec::<T>::from_fn(n, |i, _| phases.as_vector()[l * n + i] * v[i]);
        out.gemv(cre(T::one()), &stats.h1()[l], &scaled, cre(T::one()));
    }
    out
}

/// Aggregate channel `h_k = h_dk + Σ_l H_1l·diag(φ_l)·h_2lk`.
pub fn aggregate_channel<T: Real>(
    real: &ChannelRealization<T>,
    stats: &ChannelStatistics<T>,
    phases: &PhaseProfile<T>,
    k: usize,
) -> Result<CVec<T>> {
    check_phases(stats, phases)?;
    let d = stats.dims();
    if k >= d.k || real.h_d.len() != d.k || real.h2.len() != d.l {
        return Err(RisError::DimensionMismatch("realization does not match statistics".into()));
    }
    let per_ris: Vec<&CVec<T>> = real.h2.iter().map(|row| &row[k]).collect();
    Ok(&real.h_d[k] + reflect(stats, phases, &per_ris))
}

/// Mean and covariance of the aggregate channel for fixed phases.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentStats<T: Real> {
    /// `μ_k = h̄_dk + Σ_l H_1l·Θ_l·h̄_2lk`.
    pub mu: Vec<CVec<T>>,
    /// `A_k = β^n_dk·I + Σ_l β^n_2lk·H_1l·H_1l^H` (phase independent).
    pub a: Vec<CMat<T>>,
}

/// LoS mean `μ_k` of user `k`.
pub fn los_mean<T: Real>(stats: &ChannelStatistics<T>, phases: &PhaseProfile<T>, k: usize) -> CVec<T> {
    let per_ris: Vec<&CVec<T>> = stats.h_bar2().iter().map(|row| &row[k]).collect();
    &stats.h_bar_d()[k] + reflect(stats, phases, &per_ris)
}

/// NLoS covariance `A_k` of user `k`.
pub fn nlos_covariance<T: Real>(stats: &ChannelStatistics<T>, k: usize) -> CMat<T> {
    let m = stats.dims().m;
    let mut a = CMat::<T>::identity(m, m) * cre(stats.beta_n_d(k));
    for (l, g) in stats.gram().iter().enumerate() {
        a += g * cre(stats.beta_n_2(l, k));
    }
    a
}

/// Statistically equivalent description of every user's aggregate channel.
pub fn equivalent_stats<T: Real>(stats: &ChannelStatistics<T>, phases: &PhaseProfile<T>) -> Result<EquivalentStats<T>> {
    check_phases(stats, phases)?;
    let k = stats.dims().k;
    Ok(EquivalentStats {
        mu: (0..k).map(|ki| los_mean(stats, phases, ki)).collect(),
        a: (0..k).map(|ki| nlos_covariance(stats, ki)).collect(),
    })
}
