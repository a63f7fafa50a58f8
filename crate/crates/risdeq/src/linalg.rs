//! Small complex linear-algebra helpers on top of `nalgebra`.

use crate::error::{Result, RisError};
use crate::scalar::{abs2, cast, cre, to_f64, CMat, CVec, Cx, Real};
use nalgebra::SymmetricEigen;

/// Largest condition number accepted by [`hermitian_inverse`].
pub const MAX_CONDITION: f64 = 1e14;

/// `tr(X·Y)` without forming the product.
pub fn trace_product<T: Real>(x: &CMat<T>, y: &CMat<T>) -> Cx<T> {
    debug_assert_eq!(x.ncols(), y.nrows());
    debug_assert_eq!(x.nrows(), y.ncols());
    let mut acc = Cx::new(T::zero(), T::zero());
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            acc += x[(i, j)] * y[(j, i)];
        }
    }
    acc
}

/// Real part of the trace.
pub fn trace_re<T: Real>(x: &CMat<T>) -> T {
    (0..x.nrows().min(x.ncols())).fold(T::zero(), |acc, i| acc + x[(i, i)].re)
}

/// Frobenius norm.
pub fn frobenius<T: Real>(x: &CMat<T>) -> T {
    x.iter().fold(T::zero(), |acc, z| acc + abs2(*z)).sqrt()
}

/// `‖v‖²`.
pub fn norm2<T: Real>(v: &CVec<T>) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + abs2(*z))
}

/// Inner product `a^H·b`.
pub fn inner<T: Real>(a: &CVec<T>, b: &CVec<T>) -> Cx<T> {
    a.dotc(b)
}

/// Quadratic form `v^H·X·v` (real part; `X` assumed Hermitian).
pub fn quad_form<T: Real>(x: &CMat<T>, v: &CVec<T>) -> T {
    v.dotc(&(x * v)).re
}

/// Hermitian part `(X + X^H)/2`.
pub fn hermitian_part<T: Real>(x: &CMat<T>) -> CMat<T> {
    (x + x.adjoint()) * cre(cast::<T>(0.5))
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues<T: Real>(x: &CMat<T>) -> Vec<T> {
    let eig = SymmetricEigen::new(hermitian_part(x));
    let mut vals: Vec<T> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    vals
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue<T: Real>(x: &CMat<T>) -> T {
    hermitian_eigenvalues(x)[0]
}

/// Inverse of a Hermitian positive-definite matrix via its eigendecomposition,
/// rejecting condition numbers above [`MAX_CONDITION`].
pub fn hermitian_inverse<T: Real>(x: &CMat<T>) -> Result<CMat<T>> {
    if x.nrows() != x.ncols() {
        return Err(RisError::DimensionMismatch(format!("cannot invert a {}x{} matrix", x.nrows(), x.ncols())));
    }
    let eig = SymmetricEigen::new(hermitian_part(x));
    let max = eig.eigenvalues.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let min = eig.eigenvalues.iter().fold(T::max_value().expect("bounded"), |m, v| m.min(*v));
    if !(min > T::zero()) {
        return Err(RisError::IllConditioned(f64::INFINITY));
    }
    let cond = to_f64(max / min);
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(RisError::IllConditioned(cond));
    }
    let u = &eig.eigenvectors;
    let inv_vals = CVec::<T>::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|v| cre(T::one() / *v)));
    let scaled = CMat::<T>::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * inv_vals[j]);
    Ok(scaled * u.adjoint())
}

/// Relative Frobenius distance `‖X − Y‖_F / ‖Y‖_F`.
pub fn rel_frobenius<T: Real>(x: &CMat<T>, y: &CMat<T>) -> T {
    frobenius(&(x - y)) / frobenius(y)
}

/// Numerical rank: singular values above `rel_tol·σ_max`.
pub fn numerical_rank<T: Real>(x: &CMat<T>, rel_tol: T) -> usize {
    let sv = x.clone().svd(false, false).singular_values;
    let max = sv.iter().fold(T::zero(), |m, v| m.max(*v));
    sv.iter().filter(|v| **v > rel_tol * max).count()
}
