//! Dense complex linear algebra helpers shared by the archimedean modules.

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::Real;

pub type CMat<T> = DMatrix<Complex<T>>;
pub type RMat<T> = DMatrix<T>;

/// Convert an f64 literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("representable constant")
}

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub fn ci<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

pub fn identity<T: Real>(n: usize) -> CMat<T> {
    CMat::identity(n, n)
}

pub fn adjoint<T: Real>(m: &CMat<T>) -> CMat<T> {
    m.adjoint()
}

/// Largest |entry| of a complex matrix.
pub fn max_abs<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

pub fn max_abs_real<T: Real>(m: &RMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.abs()))
}

/// Eigenvalues of the Hermitian part (M + M*)/2, ascending.
pub fn hermitian_eigenvalues<T: Real>(m: &CMat<T>) -> Vec<T> {
    let h = (m + m.adjoint()).map(|z| z * lit::<T>(0.5));
    let mut ev: Vec<T> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    ev
}

pub fn min_hermitian_eigenvalue<T: Real>(m: &CMat<T>) -> T {
    hermitian_eigenvalues(m).first().copied().unwrap_or_else(T::zero)
}

/// 2-norm condition number; infinite when singular.
pub fn condition_number<T: Real>(m: &CMat<T>) -> T {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let min = sv.iter().copied().fold(max, |a, b| a.min(b));
    if min <= T::zero() {
        T::max_value().unwrap_or_else(|| lit(f64::MAX))
    } else {
        max / min
    }
}

pub fn condition_number_real<T: Real>(m: &RMat<T>) -> T {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let min = sv.iter().copied().fold(max, |a, b| a.min(b));
    if min <= T::zero() {
        T::max_value().unwrap_or_else(|| lit(f64::MAX))
    } else {
        max / min
    }
}

/// (Re v, Im v) stacked.
pub fn realify<T: Real>(v: &[Complex<T>]) -> Vec<T> {
    v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)).collect()
}

pub fn complexify<T: Real>(x: &[T]) -> Vec<Complex<T>> {
    let n = x.len() / 2;
    (0..n).map(|k| Complex::new(x[k], x[n + k])).collect()
}

/// Y = (Z − Z*)/(2i).
pub fn imaginary_part_hermitian<T: Real>(z: &CMat<T>) -> CMat<T> {
    let two_i = ci::<T>() * lit::<T>(2.0);
    (z - z.adjoint()).map(|w| w / two_i)
}

/// Random complex Gaussian matrix.
pub fn gaussian<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat<T> {
    CMat::from_fn(rows, cols, |_, _| {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        Complex::new(lit(a), lit(b))
    })
}

pub fn gaussian_real<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat<T> {
    CMat::from_fn(rows, cols, |_, _| {
        let a: f64 = rng.sample(StandardNormal);
        Complex::new(lit(a), T::zero())
    })
}

/// Haar-ish random unitary via QR of a Gaussian matrix.
pub fn random_unitary<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat<T> {
    let qr = gaussian::<T, R>(n, n, rng).qr();
    qr.q()
}

/// Random real orthogonal matrix.
pub fn random_orthogonal<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat<T> {
    let g = RMat::<T>::from_fn(n, n, |_, _| lit(rng.sample::<f64, _>(StandardNormal)));
    g.qr().q().map(|x| Complex::new(x, T::zero()))
}

pub fn to_complex<T: Real>(m: &RMat<T>) -> CMat<T> {
    m.map(|x| Complex::new(x, T::zero()))
}

pub fn column<T: Real>(v: Vec<T>) -> DVector<T> {
    DVector::from_vec(v)
}
