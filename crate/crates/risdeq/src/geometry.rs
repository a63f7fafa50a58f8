//! Physical scenario: node placement, large-scale gains, Rician factors and
//! the deterministic line-of-sight channel objects.
//!
//! Coordinate conventions:
//! - the BS is a uniform linear array along the z-axis starting at
//!   `bs_origin`, antenna `m` at `bs_origin + (0, 0, m·d_BS·λ)`;
//! - users lie on an arc of radius `user_arc_radius` and RISs on an arc of
//!   radius `ris_arc_radius`, both centred on `bs_origin` in the x-y plane and
//!   spanning `[-arc_span, +arc_span]` about the y-axis with equal angular
//!   spacing (both endpoints included; a single node sits on the y-axis);
//! - each RIS is an `N1 × N2` planar array in the x-z plane, element
//!   `(n1, n2)` offset by `((n2 − (N2−1)/2)·d2·λ, 0, (n1 − (N1−1)/2)·d1·λ)`
//!   from the array centre and stacked as `n = n1·N2 + n2`.

use crate::error::{Result, RisError};
use crate::linalg::{norm2, numerical_rank};
use crate::scalar::{cast, cis, CMat, CVec, Real};
use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// System dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemDims {
    /// BS antennas `M`.
    pub m: usize,
    /// Users `K`.
    pub k: usize,
    /// RIS count `L` (0 for the no-RIS baseline).
    pub l: usize,
    /// RIS grid rows `N1`.
    pub n1: usize,
    /// RIS grid columns `N2`.
    pub n2: usize,
}

impl SystemDims {
    /// Validated dimensions with an explicit `N1 × N2` grid.
    pub fn new(m: usize, k: usize, l: usize, n1: usize, n2: usize) -> Result<Self> {
        if m == 0 || k == 0 || n1 == 0 || n2 == 0 {
            return Err(RisError::InvalidConfig(format!(
                "M, K, N1, N2 must be >= 1 (got M={m}, K={k}, N1={n1}, N2={n2})"
            )));
        }
        Ok(Self { m, k, l, n1, n2 })
    }

    /// Dimensions with `N` elements per RIS arranged on the most square grid
    /// `N1 ≤ N2`, `N1·N2 = N`.
    pub fn with_elements(m: usize, k: usize, l: usize, n: usize) -> Result<Self> {
        let (n1, n2) = square_factor(n)?;
        Self::new(m, k, l, n1, n2)
    }

    /// Dimensions with an explicit grid that must multiply to `n`.
    pub fn with_grid(m: usize, k: usize, l: usize, n: usize, n1: usize, n2: usize) -> Result<Self> {
        if n1 * n2 != n {
            return Err(RisError::InvalidConfig(format!("N1·N2 = {}·{} = {} differs from N = {n}", n1, n2, n1 * n2)));
        }
        Self::new(m, k, l, n1, n2)
    }

    /// Elements per RIS `N`.
    pub fn n(&self) -> usize {
        self.n1 * self.n2
    }

    /// Total reflecting elements `N·L` (the phase-vector length).
    pub fn nl(&self) -> usize {
        self.n() * self.l
    }
}

/// Most square factorization `N = N1·N2` with `N1 ≤ N2`.
pub fn square_factor(n: usize) -> Result<(usize, usize)> {
    if n == 0 {
        return Err(RisError::InvalidConfig("N must be >= 1".into()));
    }
    let mut best = (1, n);
    let mut a = 1;
    while a * a <= n {
        if n % a == 0 {
            best = (a, n / a);
        }
        a += 1;
    }
    Ok(best)
}

/// Placement and array parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryConfig {
    /// BS reference point (first antenna and arc centre), metres.
    pub bs_origin: [f64; 3],
    /// Radius of the user arc, metres.
    pub user_arc_radius: f64,
    /// Radius of the RIS arc, metres.
    pub ris_arc_radius: f64,
    /// Half-span of both arcs about the y-axis, degrees.
    pub arc_span_deg: f64,
    /// BS antenna spacing in wavelengths.
    pub d_bs: f64,
    /// RIS element spacing along z (rows) in wavelengths.
    pub d_ris1: f64,
    /// RIS element spacing along x (columns) in wavelengths.
    pub d_ris2: f64,
    /// Carrier wavelength, metres.
    pub wavelength: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            bs_origin: [0.0, 0.0, 0.0],
            user_arc_radius: 400.0,
            ris_arc_radius: 250.0,
            arc_span_deg: 30.0,
            d_bs: 0.5,
            d_ris1: 0.5,
            d_ris2: 0.5,
            wavelength: 0.125,
        }
    }
}

impl GeometryConfig {
    /// Checks the documented invariants.
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("user_arc_radius", self.user_arc_radius),
            ("ris_arc_radius", self.ris_arc_radius),
            ("d_bs", self.d_bs),
            ("d_ris1", self.d_ris1),
            ("d_ris2", self.d_ris2),
            ("wavelength", self.wavelength),
        ];
        for (name, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(RisError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.arc_span_deg > 0.0 && self.arc_span_deg <= 90.0) {
            return Err(RisError::InvalidConfig(format!(
                "arc_span_deg must lie in (0, 90], got {}",
                self.arc_span_deg
            )));
        }
        Ok(())
    }

    fn origin(&self) -> Vector3<f64> {
        Vector3::from(self.bs_origin)
    }

    /// Angle (radians, from the y-axis) of node `i` of `count` on an arc.
    pub fn arc_angle(&self, i: usize, count: usize) -> f64 {
        if count <= 1 {
            return 0.0;
        }
        let span = self.arc_span_deg.to_radians();
        -span + 2.0 * span * (i as f64) / ((count - 1) as f64)
    }

    fn arc_point(&self, radius: f64, angle: f64) -> Vector3<f64> {
        self.origin() + Vector3::new(radius * angle.sin(), radius * angle.cos(), 0.0)
    }

    /// Position of user `k` of `count`.
    pub fn user_position(&self, k: usize, count: usize) -> Vector3<f64> {
        self.arc_point(self.user_arc_radius, self.arc_angle(k, count))
    }

    /// Centre of RIS `l` of `count`.
    pub fn ris_center(&self, l: usize, count: usize) -> Vector3<f64> {
        self.arc_point(self.ris_arc_radius, self.arc_angle(l, count))
    }

    /// Position of BS antenna `m`.
    pub fn bs_antenna(&self, m: usize) -> Vector3<f64> {
        self.origin() + Vector3::new(0.0, 0.0, m as f64 * self.d_bs * self.wavelength)
    }

    /// Position of element `(n1, n2)` of an `N1 × N2` RIS centred at `center`.
    pub fn ris_element(&self, center: &Vector3<f64>, dims: &SystemDims, n1: usize, n2: usize) -> Vector3<f64> {
        let dx = (n2 as f64 - (dims.n2 as f64 - 1.0) / 2.0) * self.d_ris2 * self.wavelength;
        let dz = (n1 as f64 - (dims.n1 as f64 - 1.0) / 2.0) * self.d_ris1 * self.wavelength;
        center + Vector3::new(dx, 0.0, dz)
    }
}

/// Interpretation of the Rician-factor formula `13 − 0.03·d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KappaUnits {
    /// `κ = 10^((13 − 0.03·d)/10)`.
    #[default]
    Db,
    /// `κ = max(13 − 0.03·d, 0)`, for sensitivity studies.
    Linear,
}

/// Distance-dependent path-loss model.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLossConfig {
    /// Gain at the 1 m reference distance, dB (−30 dB by default).
    pub c0_db: f64,
    /// BS–RIS exponent.
    pub alpha_bs_ris: f64,
    /// RIS–user exponent.
    pub alpha_ris_user: f64,
    /// BS–user exponent.
    pub alpha_bs_user: f64,
    /// Units of the Rician-factor formula.
    pub kappa_units: KappaUnits,
}

impl Default for PathLossConfig {
    fn default() -> Self {
        Self { c0_db: -30.0, alpha_bs_ris: 2.0, alpha_ris_user: 2.8, alpha_bs_user: 3.5, kappa_units: KappaUnits::Db }
    }
}

impl PathLossConfig {
    /// Checks the documented invariants.
    pub fn validate(&self) -> Result<()> {
        for (name, a) in [
            ("alpha_bs_ris", self.alpha_bs_ris),
            ("alpha_ris_user", self.alpha_ris_user),
            ("alpha_bs_user", self.alpha_bs_user),
        ] {
            if !(a >= 2.0) {
                return Err(RisError::InvalidConfig(format!("{name} must be >= 2, got {a}")));
            }
        }
        if !self.c0_db.is_finite() {
            return Err(RisError::InvalidConfig("c0_db must be finite".into()));
        }
        Ok(())
    }
}

/// Small-scale fading model of the user-side links.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fading {
    /// LoS plus NLoS components with distance-dependent Rician factors.
    Rician,
    /// Zero-mean fading (all Rician factors zero).
    Rayleigh,
}

/// Linear gain `10^(c0_db/10)·d^(−alpha)`.
pub fn path_loss(c0_db: f64, d: f64, alpha: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(RisError::NonPositiveDistance(d));
    }
    Ok(10f64.powf(c0_db / 10.0) * d.powf(-alpha))
}

/// Rician factor for a link of length `d` metres (dB interpretation).
pub fn rician_factor(d: f64) -> f64 {
    rician_factor_with(d, KappaUnits::Db)
}

/// Rician factor under an explicit interpretation of the formula.
pub fn rician_factor_with(d: f64, units: KappaUnits) -> f64 {
    let v = 13.0 - 0.03 * d;
    match units {
        KappaUnits::Db => 10f64.powf(v / 10.0),
        KappaUnits::Linear => v.max(0.0),
    }
}

/// Large-scale statistics and LoS channel objects of one scenario.
///
/// Invariants (checked by [`ChannelStatistics::from_parts`]): every gain is
/// positive, every Rician factor non-negative, Rayleigh mode has all factors
/// and all LoS user vectors equal to zero, and all dimensions agree with
/// `dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStatistics<T: Real> {
    dims: SystemDims,
    fading: Fading,
    beta_d: Vec<T>,
    beta2: Vec<Vec<T>>,
    beta1: Vec<T>,
    kappa_d: Vec<T>,
    kappa2: Vec<Vec<T>>,
    h_bar_d: Vec<CVec<T>>,
    h_bar2: Vec<Vec<CVec<T>>>,
    h1: Vec<CMat<T>>,
    gram: Vec<CMat<T>>,
}

/// Raw components accepted by [`ChannelStatistics::from_parts`].
#[derive(Debug, Clone)]
pub struct StatisticsParts<T: Real> {
    /// Dimensions.
    pub dims: SystemDims,
    /// Fading model.
    pub fading: Fading,
    /// BS–user gains `β_dk`.
    pub beta_d: Vec<T>,
    /// RIS–user gains `β_2lk`, indexed `[l][k]`.
    pub beta2: Vec<Vec<T>>,
    /// BS–RIS gains `β_1l`.
    pub beta1: Vec<T>,
    /// BS–user Rician factors.
    pub kappa_d: Vec<T>,
    /// RIS–user Rician factors, `[l][k]`.
    pub kappa2: Vec<Vec<T>>,
    /// LoS BS–user vectors (already scaled by the LoS amplitude).
    pub h_bar_d: Vec<CVec<T>>,
    /// LoS RIS–user vectors, `[l][k]`.
    pub h_bar2: Vec<Vec<CVec<T>>>,
    /// BS–RIS channels `H_1l`.
    pub h1: Vec<CMat<T>>,
}

impl<T: Real> ChannelStatistics<T> {
    /// Assembles statistics from raw parts after checking every invariant.
    pub fn from_parts(parts: StatisticsParts<T>) -> Result<Self> {
        let StatisticsParts { dims, fading, beta_d, beta2, beta1, kappa_d, kappa2, h_bar_d, h_bar2, h1 } = parts;
        let (m, k, l, n) = (dims.m, dims.k, dims.l, dims.n());
        let mism = |what: &str| Err(RisError::DimensionMismatch(what.to_string()));
        if beta_d.len() != k || kappa_d.len() != k || h_bar_d.len() != k {
            return mism("direct-link arrays must have K entries");
        }
        if beta1.len() != l || beta2.len() != l || kappa2.len() != l || h_bar2.len() != l || h1.len() != l {
            return mism("RIS arrays must have L entries");
        }
        for li in 0..l {
            if beta2[li].len() != k || kappa2[li].len() != k || h_bar2[li].len() != k {
                return mism("RIS-user arrays must have K entries per RIS");
            }
            if h1[li].nrows() != m || h1[li].ncols() != n {
                return mism("H1 must be M x N");
            }
            if h_bar2[li].iter().any(|v| v.len() != n) {
                return mism("RIS-user LoS vectors must have N entries");
            }
        }
        if h_bar_d.iter().any(|v| v.len() != m) {
            return mism("BS-user LoS vectors must have M entries");
        }
        let all_beta = beta_d.iter().chain(beta1.iter()).chain(beta2.iter().flatten());
        for b in all_beta {
            if !(*b > T::zero()) || !b.is_finite() {
                return Err(RisError::InvalidConfig(format!("path gains must be positive, got {b}")));
            }
        }
        let all_kappa: Vec<T> = kappa_d.iter().chain(kappa2.iter().flatten()).copied().collect();
        if all_kappa.iter().any(|x| !(*x >= T::zero())) {
            return Err(RisError::InvalidConfig("Rician factors must be non-negative".into()));
        }
        if fading == Fading::Rayleigh {
            let los_zero = h_bar_d.iter().chain(h_bar2.iter().flatten()).all(|v| norm2(v) == T::zero());
            if all_kappa.iter().any(|x| *x != T::zero()) || !los_zero {
                return Err(RisError::InvalidConfig(
                    "Rayleigh mode requires zero Rician factors and zero LoS user vectors".into(),
                ));
            }
        } else {
            for (kd, hd) in kappa_d.iter().zip(h_bar_d.iter()) {
                if *kd > T::zero() && norm2(hd) == T::zero() {
                    return Err(RisError::InvalidConfig("positive Rician factor with a zero LoS vector".into()));
                }
            }
            for (kr, hr) in kappa2.iter().flatten().zip(h_bar2.iter().flatten()) {
                if *kr > T::zero() && norm2(hr) == T::zero() {
                    return Err(RisError::InvalidConfig("positive Rician factor with a zero LoS vector".into()));
                }
            }
        }
        let gram = h1.iter().map(|h| h * h.adjoint()).collect();
        Ok(Self { dims, fading, beta_d, beta2, beta1, kappa_d, kappa2, h_bar_d, h_bar2, h1, gram })
    }

    /// Dimensions.
    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }
    /// Fading model.
    pub fn fading(&self) -> Fading {
        self.fading
    }
    /// `β_dk`.
    pub fn beta_d(&self) -> &[T] {
        &self.beta_d
    }
    /// `β_2lk` indexed `[l][k]`.
    pub fn beta2(&self) -> &[Vec<T>] {
        &self.beta2
    }
    /// `β_1l`.
    pub fn beta1(&self) -> &[T] {
        &self.beta1
    }
    /// `κ_dk`.
    pub fn kappa_d(&self) -> &[T] {
        &self.kappa_d
    }
    /// `κ_2lk` indexed `[l][k]`.
    pub fn kappa2(&self) -> &[Vec<T>] {
        &self.kappa2
    }
    /// LoS BS–user vectors.
    pub fn h_bar_d(&self) -> &[CVec<T>] {
        &self.h_bar_d
    }
    /// LoS RIS–user vectors `[l][k]`.
    pub fn h_bar2(&self) -> &[Vec<CVec<T>>] {
        &self.h_bar2
    }
    /// BS–RIS channels.
    pub fn h1(&self) -> &[CMat<T>] {
        &self.h1
    }
    /// Cached `H_1l·H_1l^H`.
    pub fn gram(&self) -> &[CMat<T>] {
        &self.gram
    }

    /// NLoS variance `β_dk/(κ_dk+1)` of the direct link of user `k`.
    pub fn beta_n_d(&self, k: usize) -> T {
        self.beta_d[k] / (self.kappa_d[k] + T::one())
    }

    /// NLoS variance `β_2lk/(κ_2lk+1)` of the RIS link `(l, k)`.
    pub fn beta_n_2(&self, l: usize, k: usize) -> T {
        self.beta2[l][k] / (self.kappa2[l][k] + T::one())
    }

    /// Cascaded LoS matrix `B_k = [H_1l[:, n]·h̄_2lk[n]]` of size `M × NL`, so
    /// that the LoS mean is `μ_k = h̄_dk + B_k·φ`.
    pub fn cascaded_los(&self, k: usize) -> CMat<T> {
        let (m, n, l) = (self.dims.m, self.dims.n(), self.dims.l);
        let mut b = CMat::<T>::zeros(m, n * l);
        for li in 0..l {
            let hb = &self.h_bar2[li][k];
            for ni in 0..n {
                let col = self.h1[li].column(ni) * hb[ni];
                b.set_column(li * n + ni, &col);
            }
        }
        b
    }

    /// Copy with the Rician factors and LoS user vectors removed, keeping the
    /// total gains (the Rayleigh counterpart of the same geometry).
    pub fn to_rayleigh(&self) -> Self {
        let zero_k = vec![T::zero(); self.dims.k];
        let parts = StatisticsParts {
            dims: self.dims,
            fading: Fading::Rayleigh,
            beta_d: self.beta_d.clone(),
            beta2: self.beta2.clone(),
            beta1: self.beta1.clone(),
            kappa_d: zero_k.clone(),
            kappa2: vec![zero_k; self.dims.l],
            h_bar_d: vec![CVec::<T>::zeros(self.dims.m); self.dims.k],
            h_bar2: vec![vec![CVec::<T>::zeros(self.dims.n()); self.dims.k]; self.dims.l],
            h1: self.h1.clone(),
        };
        Self::from_parts(parts).expect("Rayleigh copy preserves invariants")
    }

    /// Copy restricted to the direct links (no RIS).
    pub fn without_ris(&self) -> Self {
        let dims = SystemDims { l: 0, ..self.dims };
        let parts = StatisticsParts {
            dims,
            fading: self.fading,
            beta_d: self.beta_d.clone(),
            beta2: vec![],
            beta1: vec![],
            kappa_d: self.kappa_d.clone(),
            kappa2: vec![],
            h_bar_d: self.h_bar_d.clone(),
            h_bar2: vec![],
            h1: vec![],
        };
        Self::from_parts(parts).expect("no-RIS copy preserves invariants")
    }
}

fn distance(a: &Vector3<f64>, b: &Vector3<f64>, what: impl FnOnce() -> String) -> Result<f64> {
    let d = (a - b).norm();
    if d > 0.0 {
        Ok(d)
    } else {
        Err(RisError::ZeroDistance(what()))
    }
}

/// ULA-style steering entries `exp(j·2π·d·i·cos φ)`, `i = 0..len`.
fn steering(len: usize, spacing: f64, phi: f64) -> Vec<f64> {
    (0..len).map(|i| 2.0 * PI * spacing * i as f64 * phi.cos()).collect()
}

/// Builds the full statistics of the §-style geometric scenario.
pub fn build_scenario<T: Real>(
    dims: SystemDims,
    geo: &GeometryConfig,
    pl: &PathLossConfig,
    fading: Fading,
) -> Result<ChannelStatistics<T>> {
    geo.validate()?;
    pl.validate()?;
    let (m, k, l, n) = (dims.m, dims.k, dims.l, dims.n());
    let bs = geo.origin();
    let kappa = |d: f64| match fading {
        Fading::Rician => rician_factor_with(d, pl.kappa_units),
        Fading::Rayleigh => 0.0,
    };
    let los = |beta: f64, kap: f64, phases: Vec<f64>| -> CVec<T> {
        let amp = cast::<T>((beta * kap / (kap + 1.0)).sqrt());
        CVec::<T>::from_iterator(phases.len(), phases.into_iter().map(|p| cis(cast::<T>(p)) * amp))
    };

    let mut beta_d = Vec::with_capacity(k);
    let mut kappa_d = Vec::with_capacity(k);
    let mut h_bar_d = Vec::with_capacity(k);
    let users: Vec<Vector3<f64>> = (0..k).map(|ki| geo.user_position(ki, k)).collect();
    for (ki, u) in users.iter().enumerate() {
        let d = distance(u, &bs, || format!("BS and user {ki}"))?;
        let b = path_loss(pl.c0_db, d, pl.alpha_bs_user)?;
        let kap = kappa(d);
        let rel = u - bs;
        let aod = rel.y.atan2(rel.x);
        beta_d.push(cast::<T>(b));
        kappa_d.push(cast::<T>(kap));
        h_bar_d.push(los(b, kap, steering(m, geo.d_bs, aod)));
    }

    let mut beta1 = Vec::with_capacity(l);
    let mut beta2 = Vec::with_capacity(l);
    let mut kappa2 = Vec::with_capacity(l);
    let mut h_bar2 = Vec::with_capacity(l);
    let mut h1 = Vec::with_capacity(l);
    for li in 0..l {
        let c = geo.ris_center(li, l);
        distance(&c, &bs, || format!("BS and RIS {li}"))?;
        h1.push(los_bs_ris_channel::<T>(geo, pl, &dims, li)?);
        beta1.push(cast::<T>(path_loss(pl.c0_db, (c - bs).norm(), pl.alpha_bs_ris)?));
        let mut b_row = Vec::with_capacity(k);
        let mut k_row = Vec::with_capacity(k);
        let mut h_row = Vec::with_capacity(k);
        for (ki, u) in users.iter().enumerate() {
            let d = distance(u, &c, || format!("RIS {li} and user {ki}"))?;
            let b = path_loss(pl.c0_db, d, pl.alpha_ris_user)?;
            let kap = kappa(d);
            let rel = u - c;
            let aod = rel.y.atan2(rel.x);
            let bz = steering(dims.n1, geo.d_ris1, aod);
            let bx = steering(dims.n2, geo.d_ris2, aod);
            let mut phases = Vec::with_capacity(n);
            for pz in &bz {
                for px in &bx {
                    phases.push(pz + px);
                }
            }
            b_row.push(cast::<T>(b));
            k_row.push(cast::<T>(kap));
            h_row.push(los(b, kap, phases));
        }
        beta2.push(b_row);
        kappa2.push(k_row);
        h_bar2.push(h_row);
    }
    ChannelStatistics::from_parts(StatisticsParts {
        dims,
        fading,
        beta_d,
        beta2,
        beta1,
        kappa_d,
        kappa2,
        h_bar_d,
        h_bar2,
        h1,
    })
}

/// Spherical-wave LoS channel between the BS array and RIS `ris_index`:
/// entry `(m, n) = √β_1l·exp(j·2π/λ·‖p_m − q_n‖)`.
pub fn los_bs_ris_channel<T: Real>(
    geo: &GeometryConfig,
    pl: &PathLossConfig,
    dims: &SystemDims,
    ris_index: usize,
) -> Result<CMat<T>> {
    if ris_index >= dims.l {
        return Err(RisError::DimensionMismatch(format!("RIS index {ris_index} out of range for L = {}", dims.l)));
    }
    let c = geo.ris_center(ris_index, dims.l);
    let d = distance(&c, &geo.origin(), || format!("BS and RIS {ris_index}"))?;
    let amp = cast::<T>(path_loss(pl.c0_db, d, pl.alpha_bs_ris)?.sqrt());
    let elements: Vec<Vector3<f64>> = (0..dims.n1)
        .flat_map(|n1| (0..dims.n2).map(move |n2| (n1, n2)))
        .map(|(n1, n2)| geo.ris_element(&c, dims, n1, n2))
        .collect();
    let k0 = 2.0 * PI / geo.wavelength;
    Ok(CMat::<T>::from_fn(dims.m, dims.n(), |mi, ni| {
        let dist = (geo.bs_antenna(mi) - elements[ni]).norm();
        // Reduce the phase modulo 2π in f64 before casting so that f32
        // builds keep full phase accuracy at long ranges.
        let phase = (k0 * dist).rem_euclid(2.0 * PI);
        cis(cast::<T>(phase)) * amp
    }))
}

/// Semi-unitary BS–RIS channel `√(β·N)·U`, with `U` the first `M` rows of a
/// seeded random `N × N` unitary matrix, so that `H·H^H = β·N·I_M`.
pub fn semi_unitary_bs_ris<T: Real>(m: usize, n: usize, beta1: f64, seed: u64) -> Result<CMat<T>> {
    if m > n {
        return Err(RisError::InvalidConfig(format!("semi-unitary model needs M <= N (M={m}, N={n})")));
    }
    if !(beta1 > 0.0) {
        return Err(RisError::InvalidConfig(format!("beta1 must be positive, got {beta1}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Orthonormalize in f64 for accuracy, then cast.
    let g = nalgebra::DMatrix::<num_complex::Complex<f64>>::from_fn(n, n, |_, _| {
        crate::scalar::complex_normal::<f64, _>(&mut rng, 1.0)
    });
    let q = g.qr().q();
    let scale = (beta1 * n as f64).sqrt();
    Ok(CMat::<T>::from_fn(m, n, |i, j| {
        let z = q[(i, j)] * scale;
        num_complex::Complex::new(cast::<T>(z.re), cast::<T>(z.im))
    }))
}

/// Parameters of the semi-unitary Rayleigh scenario with
/// `β_1l·β_2lk = c_l·β_dk`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiUnitaryConfig {
    /// Direct-link gains `β_dk`.
    pub beta_d: Vec<f64>,
    /// Ratios `c_l` (one per RIS).
    pub c: Vec<f64>,
    /// BS–RIS gains `β_1l` (one per RIS).
    pub beta1: Vec<f64>,
    /// Seed of the unitary draw (RIS `l` uses `seed + l`).
    pub seed: u64,
}

/// Rayleigh statistics on semi-unitary BS–RIS channels with
/// `β_2lk = c_l·β_dk/β_1l`.
pub fn build_semi_unitary_scenario<T: Real>(
    m: usize,
    n: usize,
    cfg: &SemiUnitaryConfig,
) -> Result<ChannelStatistics<T>> {
    let k = cfg.beta_d.len();
    let l = cfg.c.len();
    if cfg.beta1.len() != l {
        return Err(RisError::DimensionMismatch("beta1 and c must have one entry per RIS".into()));
    }
    if cfg.c.iter().any(|c| !(*c > 0.0)) {
        return Err(RisError::InvalidConfig("c_l must be positive".into()));
    }
    let dims = SystemDims::with_elements(m, k, l, n)?;
    let h1 = (0..l)
        .map(|li| semi_unitary_bs_ris::<T>(m, n, cfg.beta1[li], cfg.seed.wrapping_add(li as u64)))
        .collect::<Result<Vec<_>>>()?;
    let beta2 =
        (0..l).map(|li| cfg.beta_d.iter().map(|bd| cast::<T>(cfg.c[li] * bd / cfg.beta1[li])).collect()).collect();
    ChannelStatistics::from_parts(StatisticsParts {
        dims,
        fading: Fading::Rayleigh,
        beta_d: cfg.beta_d.iter().map(|b| cast::<T>(*b)).collect(),
        beta2,
        beta1: cfg.beta1.iter().map(|b| cast::<T>(*b)).collect(),
        kappa_d: vec![T::zero(); k],
        kappa2: vec![vec![T::zero(); k]; l],
        h_bar_d: vec![CVec::<T>::zeros(m); k],
        h_bar2: vec![vec![CVec::<T>::zeros(n); k]; l],
        h1,
    })
}

/// Numerical rank of `H_1l` (singular values above `1e-6·σ_max`).
pub fn bs_ris_rank<T: Real>(h1: &CMat<T>) -> usize {
    numerical_rank(h1, cast::<T>(1e-6))
}
