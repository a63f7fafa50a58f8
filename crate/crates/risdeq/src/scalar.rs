//! Scalar abstraction shared by every numerical kernel.
//!
//! All channel, estimator and SINR computations are generic over a real
//! floating-point type `T: Real` (implemented for `f32` and `f64`). Complex
//! quantities are `num_complex::Complex<T>` stored in `nalgebra` dense
//! containers. Configuration structs stay in `f64`; values enter the generic
//! kernels through [`cast`].

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::fmt::{Debug, Display, LowerExp};

/// Real floating-point scalar usable by every kernel in this crate.
///
/// Only `RealField` (from `nalgebra`/`simba`) supplies the elementary
/// functions, so generic code never hits method ambiguity with
/// `num_traits::Float`.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Machine epsilon of the type.
    fn eps() -> Self;
    /// One standard-normal draw.
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
    /// One uniform draw in `[0, 1)`.
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f32>()
    }
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f64>()
    }
}

/// Complex scalar.
pub type Cx<T> = Complex<T>;
/// Dense complex column vector.
pub type CVec<T> = DVector<Complex<T>>;
/// Dense complex matrix.
pub type CMat<T> = DMatrix<Complex<T>>;

/// Converts an `f64` constant or configuration value into `T`.
#[inline]
pub fn cast<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 value representable in target scalar")
}

/// Converts a count into `T`.
#[inline]
pub fn cast_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in target scalar")
}

/// Converts a scalar back to `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().expect("finite scalar convertible to f64")
}

/// `exp(j·theta)`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Cx<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Purely real complex number.
#[inline]
pub fn cre<T: Real>(x: T) -> Cx<T> {
    Complex::new(x, T::zero())
}

/// Squared modulus `|z|²`.
#[inline]
pub fn abs2<T: Real>(z: Cx<T>) -> T {
    z.re * z.re + z.im * z.im
}

/// Modulus `|z|`.
#[inline]
pub fn modulus<T: Real>(z: Cx<T>) -> T {
    abs2(z).sqrt()
}

/// Argument of `z` in `(-π, π]`.
#[inline]
pub fn arg<T: Real>(z: Cx<T>) -> T {
    z.im.atan2(z.re)
}

/// Circularly-symmetric complex Gaussian draw with total variance `var`
/// (variance split equally between real and imaginary parts).
#[inline]
pub fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R, var: T) -> Cx<T> {
    let s = (var / cast::<T>(2.0)).sqrt();
    let re = T::std_normal(rng);
    let im = T::std_normal(rng);
    Complex::new(re * s, im * s)
}

/// Vector of i.i.d. `CN(0, var)` entries.
pub fn complex_normal_vec<T: Real, R: Rng + ?Sized>(rng: &mut R, len: usize, var: T) -> CVec<T> {
    CVec::from_fn(len, |_, _| complex_normal(rng, var))
}
