//! Closed-form deterministic equivalents of the per-user SINR and the net
//! sum-rate under MRT precoding.
//!
//! Every evaluator returns a [`SinrReport`] that keeps the signal,
//! interference and noise terms separately:
//!
//! ```text
//! signal_k       = p_k·|tr(D_k + C_k)/M|²
//! interference_k = (1/M²)·Σ_{f≠k} p_f·tr((D_f + C_f)(D_k + X_k))
//! noise_k        = (1/M²)·Σ_j p_j·tr(D_j + C_j)/ρ
//! ```
//!
//! with `D_k = μ_k·μ_k^H`, `C_k` the estimate covariance of the protocol and
//! `X_k` the covariance of the true channel (`A_k`, which coincides with the
//! direct-estimation `R_k`). The noise term is `Ψ/(M²·ρ)` where `Ψ` is the
//! expected precoder power `E[Σ_j p_j‖ĥ_j‖²]`; with equal powers it equals the
//! `p_k·(1/M)·Σ_j tr(D_j + C_j)/(M·ρ)` form.
//!
//! The general Rician evaluator ([`DetEqModel`]) uses the rank-one structure
//! of `D_k`. The Rayleigh, no-RIS and semi-unitary evaluators are written
//! independently from their own closed forms so the reduction identities
//! between them are genuine cross-checks.

use crate::channels::{nlos_covariance, PhaseProfile};
use crate::error::{Result, RisError};
use crate::estimation::{estimate_covariances, training_overhead, DeMatrices, Protocol, TrainingConfig};
use crate::geometry::{ChannelStatistics, Fading};
use crate::linalg::{hermitian_inverse, norm2, trace_product, trace_re};
use crate::scalar::{abs2, cast, cre, CMat, CVec, Real};

/// Converts dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts dB to a linear ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear ratio to dB.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Transmit power budget, noise level and per-user power fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerConfig {
    /// Power budget `P_max` in watts.
    pub p_max_w: f64,
    /// Noise power `σ²` in watts.
    pub sigma2_w: f64,
    /// Power fractions `p_k`.
    pub p: Vec<f64>,
}

impl PowerConfig {
    /// Equal fractions `p_k = 1/K`.
    pub fn equal(p_max_w: f64, sigma2_w: f64, k: usize) -> Self {
        Self { p_max_w, sigma2_w, p: vec![1.0 / k as f64; k] }
    }

    /// Configuration defined directly by `ρ = P_max/σ²` (σ² = 1 W).
    pub fn from_rho(rho: f64, p: Vec<f64>) -> Self {
        Self { p_max_w: rho, sigma2_w: 1.0, p }
    }

    /// `ρ = P_max/σ²`.
    pub fn rho(&self) -> f64 {
        self.p_max_w / self.sigma2_w
    }

    /// Checks positivity and the user count.
    pub fn validate(&self, k: usize) -> Result<()> {
        if !(self.p_max_w > 0.0) || !(self.sigma2_w > 0.0) {
            return Err(RisError::InvalidConfig("P_max and sigma^2 must be positive".into()));
        }
        if self.p.len() != k {
            return Err(RisError::DimensionMismatch(format!("{} power fractions for K = {k}", self.p.len())));
        }
        if self.p.iter().any(|x| !(*x > 0.0)) {
            return Err(RisError::InvalidConfig("power fractions must be positive".into()));
        }
        Ok(())
    }
}

/// Deterministic-equivalent SINR terms and net sum-rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrReport<T: Real> {
    /// Per-user SINR `signal/(interference + noise)`.
    pub gamma: Vec<T>,
    /// Numerator terms.
    pub signal: Vec<T>,
    /// Multi-user interference terms.
    pub interference: Vec<T>,
    /// Normalized noise terms.
    pub noise: Vec<T>,
    /// Training-loss prefactor `1 − S·τ_S/τ_C`.
    pub prefactor: T,
    /// `prefactor·Σ_k log2(1 + γ_k)` in bit/s/Hz.
    pub net_sum_rate: T,
}

impl<T: Real> SinrReport<T> {
    fn assemble(signal: Vec<T>, interference: Vec<T>, noise: Vec<T>, prefactor: T) -> Result<Self> {
        let gamma: Vec<T> = (0..signal.len()).map(|k| signal[k] / (interference[k] + noise[k])).collect();
        let net_sum_rate = net_sum_rate(&gamma, prefactor)?;
        Ok(Self { gamma, signal, interference, noise, prefactor, net_sum_rate })
    }

    /// Mean SINR over users.
    pub fn mean_sinr(&self) -> T {
        self.gamma.iter().fold(T::zero(), |a, g| a + *g) / cast::<T>(self.gamma.len() as f64)
    }
}

/// `prefactor·Σ_k log2(1 + γ_k)`.
pub fn net_sum_rate<T: Real>(gamma: &[T], prefactor: T) -> Result<T> {
    if !(prefactor > T::zero()) {
        return Err(RisError::InfeasibleOverhead { overhead: f64::NAN, tau_c: f64::NAN });
    }
    let mut sum = T::zero();
    for g in gamma {
        if !g.is_finite() {
            return Err(RisError::NonFinite("SINR".into()));
        }
        sum += (T::one() + *g).log2();
    }
    Ok(prefactor * sum)
}

/// `D_k` via the four-term expansion
/// `h̄_d h̄_d^H + h̄_d (Σ_l H_1l Θ_l h̄_2lk)^H + (Σ_l H_1l Θ_l h̄_2lk) h̄_d^H + Σ_l Σ_l' H_1l Θ_l h̄_2lk h̄_2l'k^H Θ_l'^H H_1l'^H`.
pub fn build_d<T: Real>(stats: &ChannelStatistics<T>, phases: &PhaseProfile<T>, k: usize) -> CMat<T> {
    let d = stats.dims();
    let n = d.n();
    let hd = &stats.h_bar_d()[k];
    let refl: Vec<CVec<T>> = (0..d.l)
        .map(|l| {
            let v = CVec::<T>::from_fn(n, |i, _| phases.as_vector()[l * n + i] * stats.h_bar2()[l][k][i]);
            &stats.h1()[l] * v
        })
        .collect();
    let mut out = hd * hd.adjoint();
    for r in &refl {
        out += hd * r.adjoint();
        out += r * hd.adjoint();
    }
    for r in &refl {
        for r2 in &refl {
            out += r * r2.adjoint();
        }
    }
    out
}

fn prefactor_for<T: Real>(stats: &ChannelStatistics<T>, cfg: &TrainingConfig, protocol: Protocol) -> Result<T> {
    Ok(cast::<T>(training_overhead(protocol, stats.dims(), &cfg.with_protocol(protocol))?.prefactor))
}

fn powers_t<T: Real>(powers: &PowerConfig, k: usize) -> Result<(Vec<T>, T)> {
    powers.validate(k)?;
    Ok((powers.p.iter().map(|x| cast::<T>(*x)).collect(), cast::<T>(powers.rho())))
}

/// Phase-independent ingredients of the general (Rician) deterministic
/// equivalent for one protocol, reusable across phase profiles.
#[derive(Debug, Clone)]
pub struct DetEqModel<T: Real> {
    m: usize,
    protocol: Protocol,
    h_bar_d: Vec<CVec<T>>,
    cascaded: Vec<CMat<T>>,
    c: Vec<CMat<T>>,
    x: Vec<CMat<T>>,
    tr_c: Vec<T>,
    tr_cx: Vec<Vec<T>>,
    p: Vec<T>,
    rho: T,
    prefactor: T,
}

/// Intermediate quantities shared between the objective and its gradient.
struct Evaluation<T: Real> {
    mu: Vec<CVec<T>>,
    /// `C_f·μ_k` indexed `[f][k]`.
    c_mu: Vec<Vec<CVec<T>>>,
    /// `X_k·μ_f` indexed `[k][f]`.
    x_mu: Vec<Vec<CVec<T>>>,
    /// `μ_f^H·μ_k` indexed `[f][k]`.
    gram: Vec<Vec<crate::scalar::Cx<T>>>,
    s: Vec<T>,
    report: SinrReport<T>,
}

impl<T: Real> DetEqModel<T> {
    /// Builds the model for `cfg.protocol`.
    pub fn new(stats: &ChannelStatistics<T>, cfg: &TrainingConfig, powers: &PowerConfig) -> Result<Self> {
        let d = stats.dims();
        let (p, rho) = powers_t::<T>(powers, d.k)?;
        let prefactor = prefactor_for(stats, cfg, cfg.protocol)?;
        let c = estimate_covariances(stats, cfg)?;
        let x: Vec<CMat<T>> = (0..d.k).map(|k| nlos_covariance(stats, k)).collect();
        let tr_c = c.iter().map(trace_re).collect();
        let tr_cx = (0..d.k).map(|f| (0..d.k).map(|k| trace_product(&c[f], &x[k]).re).collect()).collect();
        Ok(Self {
            m: d.m,
            protocol: cfg.protocol,
            h_bar_d: stats.h_bar_d().to_vec(),
            cascaded: (0..d.k).map(|k| stats.cascaded_los(k)).collect(),
            c,
            x,
            tr_c,
            tr_cx,
            p,
            rho,
            prefactor,
        })
    }

    /// Protocol of the model.
    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    /// Training-loss prefactor.
    pub fn prefactor(&self) -> T {
        self.prefactor
    }

    /// Phase-vector length `N·L`.
    pub fn phase_len(&self) -> usize {
        self.cascaded.first().map_or(0, |b| b.ncols())
    }

    /// LoS means `μ_k = h̄_dk + B_k·φ`.
    pub fn means(&self, phases: &PhaseProfile<T>) -> Result<Vec<CVec<T>>> {
        if phases.len() != self.phase_len() {
            return Err(RisError::DimensionMismatch(format!(
                "phase profile has {} entries, expected {}",
                phases.len(),
                self.phase_len()
            )));
        }
        Ok(self
            .h_bar_d
            .iter()
            .zip(&self.cascaded)
            .map(|(h, b)| if b.ncols() == 0 { h.clone() } else { h + b * phases.as_vector() })
            .collect())
    }

    fn run(&self, phases: &PhaseProfile<T>) -> Result<Evaluation<T>> {
        let mu = self.means(phases)?;
        let k = mu.len();
        let m = cast::<T>(self.m as f64);
        let m2 = m * m;
        let c_mu: Vec<Vec<CVec<T>>> = (0..k).map(|f| (0..k).map(|kk| &self.c[f] * &mu[kk]).collect()).collect();
        let x_mu: Vec<Vec<CVec<T>>> = (0..k).map(|kk| (0..k).map(|f| &self.x[kk] * &mu[f]).collect()).collect();
        let gram: Vec<Vec<_>> = (0..k).map(|f| (0..k).map(|kk| mu[f].dotc(&mu[kk])).collect()).collect();
        let s: Vec<T> = (0..k).map(|kk| (gram[kk][kk].re + self.tr_c[kk]) / m).collect();
        let psi = (0..k).fold(T::zero(), |a, j| a + self.p[j] * s[j] * m);
        let noise_val = psi / (m2 * self.rho);
        let mut signal = Vec::with_capacity(k);
        let mut interference = Vec::with_capacity(k);
        for kk in 0..k {
            signal.push(self.p[kk] * s[kk] * s[kk]);
            let mut acc = T::zero();
            for f in (0..k).filter(|f| *f != kk) {
                let t =
                    abs2(gram[f][kk]) + mu[f].dotc(&x_mu[kk][f]).re + mu[kk].dotc(&c_mu[f][kk]).re + self.tr_cx[f][kk];
                acc += self.p[f] * t;
            }
            interference.push(acc / m2);
        }
        let report = SinrReport::assemble(signal, interference, vec![noise_val; k], self.prefactor)?;
        Ok(Evaluation { mu, c_mu, x_mu, gram, s, report })
    }

    /// Deterministic-equivalent report for a phase profile.
    pub fn evaluate(&self, phases: &PhaseProfile<T>) -> Result<SinrReport<T>> {
        Ok(self.run(phases)?.report)
    }

    /// Net sum-rate only.
    pub fn objective(&self, phases: &PhaseProfile<T>) -> Result<T> {
        let r = self.evaluate(phases)?;
        if !r.net_sum_rate.is_finite() {
            return Err(RisError::NonFinite("net sum-rate".into()));
        }
        Ok(r.net_sum_rate)
    }

    /// Objective and its gradient with respect to the phase vector, returned
    /// as `∂R/∂Re φ + j·∂R/∂Im φ` (so the first-order change along a complex
    /// direction `v` is `Re(∇^H v)`).
    pub fn objective_and_gradient(&self, phases: &PhaseProfile<T>) -> Result<(T, CVec<T>)> {
        let ev = self.run(phases)?;
        let k = ev.mu.len();
        let m = cast::<T>(self.m as f64);
        let m2 = m * m;
        let two = cast::<T>(2.0);
        let ln2 = cast::<T>(std::f64::consts::LN_2);
        let r = &ev.report;
        let mut a = Vec::with_capacity(k);
        let mut b = Vec::with_capacity(k);
        for kk in 0..k {
            let d = r.interference[kk] + r.noise[kk];
            let w = self.prefactor / (ln2 * (T::one() + r.gamma[kk]));
            a.push(w / d);
            b.push(w * r.signal[kk] / (d * d));
        }
        let b_sum = b.iter().fold(T::zero(), |acc, v| acc + *v);
        let mut grad = CVec::<T>::zeros(self.phase_len());
        for j in 0..k {
            let mut g = &ev.mu[j] * cre(two * a[j] * self.p[j] * ev.s[j] / m);
            // User j as the victim: Σ_{f≠j} p_f (μ_f μ_f^H + C_f) μ_j.
            let mut victim = CVec::<T>::zeros(self.m);
            for f in (0..k).filter(|f| *f != j) {
                victim.axpy(cre(self.p[f]) * ev.gram[f][j], &ev.mu[f], cre(T::one()));
                victim.axpy(cre(self.p[f]), &ev.c_mu[f][j], cre(T::one()));
            }
            g.axpy(cre(-b[j] / m2), &victim, cre(T::one()));
            // User j as the interferer: Σ_{k≠j} b_k (μ_k μ_k^H + X_k) μ_j.
            let mut interferer = CVec::<T>::zeros(self.m);
            for kk in (0..k).filter(|kk| *kk != j) {
                interferer.axpy(cre(b[kk]) * ev.gram[kk][j], &ev.mu[kk], cre(T::one()));
                interferer.axpy(cre(b[kk]), &ev.x_mu[kk][j], cre(T::one()));
            }
            g.axpy(cre(-self.p[j] / m2), &interferer, cre(T::one()));
            g.axpy(cre(-b_sum * self.p[j] / (m2 * self.rho)), &ev.mu[j], cre(T::one()));
            if self.cascaded[j].ncols() > 0 {
                grad.gemv_ad(cre(two), &self.cascaded[j], &g, cre(T::one()));
            }
        }
        Ok((r.net_sum_rate, grad))
    }
}

fn rician_report<T: Real>(
    stats: &ChannelStatistics<T>,
    phases: &PhaseProfile<T>,
    powers: &PowerConfig,
    cfg: &TrainingConfig,
    protocol: Protocol,
) -> Result<SinrReport<T>> {
    DetEqModel::new(stats, &cfg.with_protocol(protocol), powers)?.evaluate(phases)
}

/// Deterministic equivalent under the MMSE-DFT protocol (general fading;
/// with zero Rician factors it reduces to [`sinr_det_dft_rayleigh`]).
pub fn sinr_det_dft_rician<T: Real>(
    stats: &ChannelStatistics<T>,
    phases: &PhaseProfile<T>,
    powers: &PowerConfig,
    cfg: &TrainingConfig,
) -> Result<SinrReport<T>> {
    rician_report(stats, phases, powers, cfg, Protocol::MmseDft)
}

/// Deterministic equivalent under the DE protocol (`C_k = R_k Q_k R_k`,
/// interference second factor `D_k + R_k`).
pub fn sinr_det_de_rician<T: Real>(
    stats: &ChannelStatistics<T>,
    phases: &PhaseProfile<T>,
    powers: &PowerConfig,
    cfg: &TrainingConfig,
) -> Result<SinrReport<T>> {
    rician_report(stats, phases, powers, cfg, Protocol::DirectEstimate)
}

/// Deterministic equivalent under perfect CSI (`C_k = A_k`).
pub fn sinr_det_perfect_rician<T: Real>(
    stats: &ChannelStatistics<T>,
    phases: &PhaseProfile<T>,
    powers: &PowerConfig,
    cfg: &TrainingConfig,
) -> Result<SinrReport<T>> {
    rician_report(stats, phases, powers, cfg, Protocol::PerfectCsi)
}

/// No-RIS deterministic equivalent under DE training, evaluated from the
/// direct links only with the scalar closed form
/// `tr((h̄_f h̄_f^H + c_f I)(h̄_k h̄_k^H + β^n_dk I)) = |h̄_f^H h̄_k|² + β^n_dk‖h̄_f‖² + c_f‖h̄_k‖² + M c_f β^n_dk`,
/// `c_k = β^n_dk²/(β^n_dk + 1/(ρ_p τ_S))`. RIS fields of `stats` are ignored.
pub fn sinr_det_noris<T: Real>(
    stats: &ChannelStatistics<T>,
    powers: &PowerConfig,
    cfg: &TrainingConfig,
) -> Result<SinrReport<T>> {
    let d = stats.dims();
    let (p, rho) = powers_t::<T>(powers, d.k)?;
    let base = stats.without_ris();
    let prefactor = prefactor_for(&base, cfg, Protocol::DirectEstimate)?;
    let m = cast::<T>(d.m as f64);
    let inv = cast::<T>(cfg.inverse_training_snr());
    let bn: Vec<T> = (0..d.k).map(|k| stats.beta_n_d(k)).collect();
    let c: Vec<T> = bn.iter().map(|b| *b * *b / (*b + inv)).collect();
    let hb = stats.h_bar_d();
    let los: Vec<T> = hb.iter().map(norm2).collect();
    let sig_tr: Vec<T> = (0..d.k).map(|k| los[k] + c[k] * m).collect();
    let noise_val = (0..d.k).fold(T::zero(), |a, j| a + p[j] * sig_tr[j]) / (m * m * rho);
    let mut signal = Vec::with_capacity(d.k);
    let mut interference = Vec::with_capacity(d.k);
    for k in 0..d.k {
        signal.push(p[k] * (sig_tr[k] / m) * (sig_tr[k] / m));
        let mut acc = T::zero();
        for f in (0..d.k).filter(|f| *f != k) {
            let t = abs2(hb[f].dotc(&hb[k])) + bn[k] * los[f] + c[f] * los[k] + m * c[f] * bn[k];
            acc += p[f] * t;
        }
        interference.push(acc / (m * m));
    }
    SinrReport::assemble(signal, interference, vec![noise_val; d.k], prefactor)
}

fn require_rayleigh<T: Real>(stats: &ChannelStatistics<T>) -> Result<()> {
    if stats.fading() != Fading::Rayleigh {
        return Err(RisError::FadingMismatch("Rayleigh evaluator called on Rician statistics".into()));
    }
    Ok(())
}

/// Gram traces `tr(G_l)` and `tr(G_l G_l')` of `G_l = H_1l H_1l^H`.
fn gram_traces<T: Real>(stats: &ChannelStatistics<T>) -> (Vec<T>, Vec<Vec<T>>) {
    let g = stats.gram();
    let t1 = g.iter().map(trace_re).collect();
    let t2 = g.iter().map(|a| g.iter().map(|b| trace_product(a, b).re).collect()).collect();
    (t1, t2)
}

/// Coefficients of a matrix `w_d·I + Σ_l w_l·G_l`.
struct GramCombo<T: Real> {
    wd: T,
    wl: Vec<T>,
}

impl<T: Real> GramCombo<T> {
    fn trace(&self, m: T, t1: &[T]) -> T {
        self.wd * m + self.wl.iter().zip(t1).fold(T::zero(), |a, (w, t)| a + *w * *t)
    }

    fn trace_product(&self, other: &Self, m: T, t1: &[T], t2: &[Vec<T>]) -> T {
        let mut acc = self.wd * other.wd * m;
        for (l, t) in t1.iter().enumerate() {
            acc += self.wd * other.wl[l] * *t + other.wd * self.wl[l] * *t;
        }
        for (l, row) in t2.iter().enumerate() {
            for (l2, t) in row.iter().enumerate() {
                acc += self.wl[l] * other.wl[l2] * *t;
            }
        }
        acc
    }
}

fn rayleigh_scalar_report<T: Real>(
    stats: &ChannelStatistics<T>,
    powers: &PowerConfig,
    est: &[GramCombo<T>],
    cov: &[GramCombo<T>],
    prefactor: T,
) -> Result<SinrReport<T>> {
    let d = stats.dims();
    let (p, rho) = powers_t::<T>(powers, d.k)?;
    let m = cast::<T>(d.m as f64);
    let (t1, t2) = gram_traces(stats);
    let tr_c: Vec<T> = est.iter().map(|c| c.trace(m, &t1)).collect();
    let noise_val = (0..d.k).fold(T::zero(), |a, j| a + p[j] * tr_c[j]) / (m * m * rho);
    let mut signal = Vec::with_capacity(d.k);
    let mut interference = Vec::with_capacity(d.k);
    for k in 0..d.k {
        signal.push(p[k] * (tr_c[k] / m) * (tr_c[k] / m));
        let acc =
            (0..d.k).filter(|f| *f != k).fold(T::zero(), |a, f| a + p[f] * est[f].trace_product(&cov[k], m, &t1, &t2));
        interference.push(acc / (m * m));
    }
    SinrReport::assemble(signal, interference, vec![noise_val; d.k], prefactor)
}

fn rayleigh_cov<T: Real>(stats: &ChannelStatistics<T>, k: usize) -> GramCombo<T> {
    GramCombo { wd: stats.beta_d()[k], wl: (0..stats.dims().l).map(|l| stats.beta2()[l][k]).collect() }
}

/// MMSE-DFT deterministic equivalent under Rayleigh fading; phases do not
/// enter (only their length is checked).
pub fn sinr_det_dft_rayleigh<T: Real>(
    stats: &ChannelStatistics<T>,
    phases: &PhaseProfile<T>,
    powers: &PowerConfig,
    cfg: &TrainingConfig,
) -> Result<SinrReport<T>> {
    require_rayleigh(stats)?;
    if phases.len() != stats.dims().nl() {
        return Err(RisError::DimensionMismatch("phase profile length differs from N·L".into()));
    }
    let d = stats.dims();
    let s = crate::estimation::subphases(Protocol::MmseDft, d, cfg.subphase_mode);
    let base = cast::<T>(1.0 / (s * cfg.rho_p * cfg.tau_s));
    let m = cast::<T>(d.m as f64);
    let est: Vec<GramCombo<T>> = (0..d.k)
        .map(|k| {
            let bd = stats.beta_d()[k];
            GramCombo {
                wd: bd * bd / (bd + base),
                wl: (0..d.l)
                    .map(|l| {
                        let b = stats.beta2()[l][k];
                        b * b / (b + base / (m * stats.beta1()[l]))
                    })
                    .collect(),
            }
        })
        .collect();
    let cov: Vec<GramCombo<T>> = (0..d.k).map(|k| rayleigh_cov(stats, k)).collect();
    rayleigh_scalar_report(stats, powers, &est, &cov, prefactor_for(stats, cfg, Protocol::MmseDft)?)
}

/// Perfect-CSI deterministic equivalent under Rayleigh fading.
pub fn sinr_det_perfect_rayleigh<T: Real>(
    stats: &ChannelStatistics<T>,
    powers: &PowerConfig,
    cfg: &TrainingConfig,
) -> Result<SinrReport<T>> {
    require_rayleigh(stats)?;
    let cov: Vec<GramCombo<T>> = (0..stats.dims().k).map(|k| rayleigh_cov(stats, k)).collect();
    let est: Vec<GramCombo<T>> = (0..stats.dims().k).map(|k| rayleigh_cov(stats, k)).collect();
    rayleigh_scalar_report(stats, powers, &est, &cov, prefactor_for(stats, cfg, Protocol::PerfectCsi)?)
}

/// DE deterministic equivalent under Rayleigh fading, evaluated through
/// `tr(R_k R_k Q_k)` and `tr(R_k R_f Q_f R_f)`.
pub fn sinr_det_de_rayleigh<T: Real>(
    stats: &ChannelStatistics<T>,
    powers: &PowerConfig,
    cfg: &TrainingConfig,
) -> Result<SinrReport<T>> {
    require_rayleigh(stats)?;
    let d = stats.dims();
    let (p, rho) = powers_t::<T>(powers, d.k)?;
    let prefactor = prefactor_for(stats, cfg, Protocol::DirectEstimate)?;
    let m = cast::<T>(d.m as f64);
    let noise_i = cre(cast::<T>(cfg.inverse_training_snr()));
    let mut r = Vec::with_capacity(d.k);
    let mut q = Vec::with_capacity(d.k);
    for k in 0..d.k {
        let mut rk = CMat::<T>::identity(d.m, d.m) * cre(stats.beta_d()[k]);
        for (l, g) in stats.gram().iter().enumerate() {
            rk += g * cre(stats.beta2()[l][k]);
        }
        q.push(hermitian_inverse(&(&rk + CMat::<T>::identity(d.m, d.m) * noise_i))?);
        r.push(rk);
    }
    let rrq: Vec<T> = (0..d.k).map(|k| trace_product(&(&r[k] * &r[k]), &q[k]).re).collect();
    let rqr: Vec<CMat<T>> = (0..d.k).map(|f| &r[f] * &q[f] * &r[f]).collect();
    let noise_val = (0..d.k).fold(T::zero(), |a, j| a + p[j] * rrq[j]) / (m * m * rho);
    let mut signal = Vec::with_capacity(d.k);
    let mut interference = Vec::with_capacity(d.k);
    for k in 0..d.k {
        signal.push(p[k] * (rrq[k] / m) * (rrq[k] / m));
        let acc = (0..d.k).filter(|f| *f != k).fold(T::zero(), |a, f| a + p[f] * trace_product(&r[k], &rqr[f]).re);
        interference.push(acc / (m * m));
    }
    SinrReport::assemble(signal, interference, vec![noise_val; d.k], prefactor)
}

/// Closed-form SINR of the semi-unitary special case with unit power
/// fractions:
/// `γ_k = 1/((1/M)·Σ_{f≠k} β_df/β_dk + Σ_k' β_dk'/(M·β_dk²·ρ·(c̄·N + 1)))`.
pub fn sinr_special_case(beta_d: &[f64], c_bar: f64, n: usize, m: usize, rho: f64) -> Vec<f64> {
    let total: f64 = beta_d.iter().sum();
    let mf = m as f64;
    beta_d
        .iter()
        .enumerate()
        .map(|(k, bk)| {
            let interf: f64 =
                beta_d.iter().enumerate().filter(|(f, _)| *f != k).map(|(_, bf)| bf / bk).sum::<f64>() / mf;
            let noise = total / (mf * bk * bk * rho * (c_bar * n as f64 + 1.0));
            1.0 / (interf + noise)
        })
        .collect()
}

/// Cached DE matrices re-exported for callers that evaluate many profiles.
pub fn de_matrices<T: Real>(stats: &ChannelStatistics<T>, cfg: &TrainingConfig) -> Result<DeMatrices<T>> {
    DeMatrices::build(stats, cfg)
}
