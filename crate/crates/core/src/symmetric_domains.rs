//! Siegel upper half-space, Hermitian upper half-space, the bounded domain
//! {U : 1 − U*U > 0}, their Möbius actions, the Cayley transform and Petersson norms.

use num_complex::Complex;
use rand::Rng;

use crate::numeric::{
    ci, condition_number, gaussian, gaussian_real, identity, imaginary_part_hermitian, lit, max_abs,
    min_hermitian_eigenvalue, random_orthogonal, random_unitary, CMat,
};
use crate::Real;

/// Eigenvalue floor for domain membership.
pub const MEMBERSHIP_FLOOR: f64 = 1e-10;
/// Relative tolerance for structural identities (symmetry, group relations).
pub const IDENTITY_TOL: f64 = 1e-10;
/// Largest condition number of CZ + D accepted by the Möbius action.
pub const DENOMINATOR_COND_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DomainError {
    #[error("point is outside the domain: {0}")]
    DomainViolation(String),
    #[error("CZ + D is near-singular (condition number {0:.3e})")]
    NearSingularDenominator(f64),
    #[error("U is at or near the boundary (min eigenvalue of 1 − U*U is {0:.3e})")]
    BoundaryPoint(f64),
    #[error("group element does not satisfy its defining identity (defect {0:.3e})")]
    NotInGroup(f64),
    #[error("group element and point belong to different domains")]
    TagMismatch,
    #[error("shape mismatch: {0}")]
    Shape(String),
}

fn to_f64<T: Real>(x: T) -> f64 {
    x.to_subset().unwrap_or(f64::NAN)
}

fn rel_defect<T: Real>(a: &CMat<T>, b: &CMat<T>) -> T {
    max_abs(&(a - b)) / (T::one() + max_abs(b))
}

/// Z = X + iY symmetric with Y > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SiegelPoint<T: Real = f64> {
    z: CMat<T>,
}

impl<T: Real> SiegelPoint<T> {
    pub fn new(z: CMat<T>) -> Result<Self, DomainError> {
        if !z.is_square() {
            return Err(DomainError::Shape("Siegel point must be square".into()));
        }
        let asym = rel_defect(&z, &z.transpose());
        if asym > lit(IDENTITY_TOL) {
            return Err(DomainError::DomainViolation(format!("Z is not symmetric (defect {:.3e})", to_f64(asym))));
        }
        let m = min_hermitian_eigenvalue(&imaginary_part_hermitian(&z));
        if m <= lit(MEMBERSHIP_FLOOR) {
            return Err(DomainError::DomainViolation(format!("Im Z has eigenvalue {:.3e}", to_f64(m))));
        }
        Ok(Self { z })
    }
    pub fn matrix(&self) -> &CMat<T> {
        &self.z
    }
    pub fn size(&self) -> usize {
        self.z.nrows()
    }
    /// Y = Im Z.
    pub fn y(&self) -> CMat<T> {
        imaginary_part_hermitian(&self.z)
    }
    pub fn i_identity(r: usize) -> Self {
        Self { z: identity::<T>(r) * ci::<T>() }
    }
}

/// Z with (Z − Z*)/(2i) > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianPoint<T: Real = f64> {
    z: CMat<T>,
}

impl<T: Real> HermitianPoint<T> {
    pub fn new(z: CMat<T>) -> Result<Self, DomainError> {
        if !z.is_square() {
            return Err(DomainError::Shape("Hermitian-domain point must be square".into()));
        }
        let m = min_hermitian_eigenvalue(&imaginary_part_hermitian(&z));
        if m <= lit(MEMBERSHIP_FLOOR) {
            return Err(DomainError::DomainViolation(format!("Imh Z has eigenvalue {:.3e}", to_f64(m))));
        }
        Ok(Self { z })
    }
    pub fn matrix(&self) -> &CMat<T> {
        &self.z
    }
    pub fn size(&self) -> usize {
        self.z.nrows()
    }
    pub fn y(&self) -> CMat<T> {
        imaginary_part_hermitian(&self.z)
    }
    pub fn i_identity(b: usize) -> Self {
        Self { z: identity::<T>(b) * ci::<T>() }
    }
}

/// U (a×b) with 1_b − U*U > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedPoint<T: Real = f64> {
    u: CMat<T>,
}

impl<T: Real> BoundedPoint<T> {
    pub fn new(u: CMat<T>) -> Result<Self, DomainError> {
        let b = u.ncols();
        let m = min_hermitian_eigenvalue(&(identity::<T>(b) - u.adjoint() * &u));
        if m <= lit(MEMBERSHIP_FLOOR) {
            return Err(DomainError::BoundaryPoint(to_f64(m)));
        }
        Ok(Self { u })
    }
    pub fn matrix(&self) -> &CMat<T> {
        &self.u
    }
    pub fn shape(&self) -> (usize, usize) {
        (self.u.nrows(), self.u.ncols())
    }
    pub fn origin(a: usize, b: usize) -> Self {
        Self { u: CMat::zeros(a, b) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainPoint<T: Real = f64> {
    Siegel(SiegelPoint<T>),
    Hermitian(HermitianPoint<T>),
    Bounded(BoundedPoint<T>),
}

/// Which group a block matrix belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainTag {
    /// gᵗ J g = J, g real.
    Symplectic,
    /// g* J g = J.
    UnitaryJ,
    /// g* 1_{a,b} g = 1_{a,b}.
    UnitaryAB { a: usize, b: usize },
}

/// J = (0, 1; −1, 0) in blocks of size h.
pub fn standard_j<T: Real>(h: usize) -> CMat<T> {
    let mut j = CMat::zeros(2 * h, 2 * h);
    for k in 0..h {
        j[(k, h + k)] = Complex::new(T::one(), T::zero());
        j[(h + k, k)] = Complex::new(-T::one(), T::zero());
    }
    j
}

pub fn signature_form<T: Real>(a: usize, b: usize) -> CMat<T> {
    let mut f = identity::<T>(a + b);
    for k in a..a + b {
        f[(k, k)] = -f[(k, k)];
    }
    f
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainGroupElement<T: Real = f64> {
    g: CMat<T>,
    tag: DomainTag,
}

impl<T: Real> DomainGroupElement<T> {
    pub fn new(g: CMat<T>, tag: DomainTag) -> Result<Self, DomainError> {
        if !g.is_square() || !g.nrows().is_multiple_of(2) && !matches!(tag, DomainTag::UnitaryAB { .. }) {
            return Err(DomainError::Shape("group element must be square of even size".into()));
        }
        let defect = match tag {
            DomainTag::Symplectic => {
                let imag = g.iter().fold(T::zero(), |a, z| a.max(z.im.abs()));
                let j = standard_j::<T>(g.nrows() / 2);
                imag.max(rel_defect(&(g.transpose() * &j * &g), &j))
            }
            DomainTag::UnitaryJ => {
                let j = standard_j::<T>(g.nrows() / 2);
                rel_defect(&(g.adjoint() * &j * &g), &j)
            }
            DomainTag::UnitaryAB { a, b } => {
                if a + b != g.nrows() {
                    return Err(DomainError::Shape(format!("expected size {}", a + b)));
                }
                let f = signature_form::<T>(a, b);
                rel_defect(&(g.adjoint() * &f * &g), &f)
            }
        };
        if defect > lit(1e-8) {
            return Err(DomainError::NotInGroup(to_f64(defect)));
        }
        Ok(Self { g, tag })
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.g
    }
    pub fn tag(&self) -> DomainTag {
        self.tag
    }

    fn split(&self) -> usize {
        match self.tag {
            DomainTag::UnitaryAB { a, .. } => a,
            _ => self.g.nrows() / 2,
        }
    }

    /// Blocks (A, B; C, D).
    pub fn blocks(&self) -> (CMat<T>, CMat<T>, CMat<T>, CMat<T>) {
        let s = self.split();
        let n = self.g.nrows();
        let g = &self.g;
        (
            g.view((0, 0), (s, s)).into_owned(),
            g.view((0, s), (s, n - s)).into_owned(),
            g.view((s, 0), (n - s, s)).into_owned(),
            g.view((s, s), (n - s, n - s)).into_owned(),
        )
    }

    pub fn compose(&self, o: &Self) -> Result<Self, DomainError> {
        if self.tag != o.tag {
            return Err(DomainError::TagMismatch);
        }
        Ok(Self { g: &self.g * &o.g, tag: self.tag })
    }

    pub fn identity(size: usize, tag: DomainTag) -> Self {
        Self { g: identity::<T>(size), tag }
    }
}

/// gZ = (AZ + B)(CZ + D)⁻¹.
pub fn moebius_act<T: Real>(g: &DomainGroupElement<T>, z: &DomainPoint<T>) -> Result<DomainPoint<T>, DomainError> {
    let m = match (g.tag, z) {
        (DomainTag::Symplectic, DomainPoint::Siegel(p)) => p.matrix(),
        (DomainTag::UnitaryJ, DomainPoint::Hermitian(p)) => p.matrix(),
        (DomainTag::UnitaryAB { a, b }, DomainPoint::Bounded(p)) => {
            if p.shape() != (a, b) {
                return Err(DomainError::Shape("bounded point shape differs from group signature".into()));
            }
            p.matrix()
        }
        _ => return Err(DomainError::TagMismatch),
    };
    let (a, b, c, d) = g.blocks();
    if a.ncols() != m.nrows() || d.nrows() != m.ncols() {
        return Err(DomainError::Shape("group element and point sizes differ".into()));
    }
    let den = c * m + d;
    let cond = condition_number(&den);
    if cond > lit(DENOMINATOR_COND_LIMIT) {
        return Err(DomainError::NearSingularDenominator(to_f64(cond)));
    }
    let inv = den.try_inverse().ok_or(DomainError::NearSingularDenominator(f64::INFINITY))?;
    let out = (a * m + b) * inv;
    match z {
        DomainPoint::Siegel(_) => {
            // re-symmetrise rounding noise
            let sym = (&out + out.transpose()).map(|w| w * lit::<T>(0.5));
            Ok(DomainPoint::Siegel(SiegelPoint::new(sym)?))
        }
        DomainPoint::Hermitian(_) => Ok(DomainPoint::Hermitian(HermitianPoint::new(out)?)),
        DomainPoint::Bounded(_) => Ok(DomainPoint::Bounded(BoundedPoint::new(out)?)),
    }
}

/// Z = i(1 + U)(1 − U)⁻¹.
pub fn cayley<T: Real>(u: &BoundedPoint<T>) -> Result<HermitianPoint<T>, DomainError> {
    let (a, b) = u.shape();
    if a != b {
        return Err(DomainError::Shape("Cayley transform needs a square U".into()));
    }
    let id = identity::<T>(a);
    let m = u.matrix();
    let den = &id - m;
    let inv = den.try_inverse().ok_or(DomainError::BoundaryPoint(0.0))?;
    HermitianPoint::new((&id + m) * inv * ci::<T>())
}

/// U = (Z − i)(Z + i)⁻¹.
pub fn cayley_inverse<T: Real>(z: &HermitianPoint<T>) -> Result<BoundedPoint<T>, DomainError> {
    let id = identity::<T>(z.size()) * ci::<T>();
    let m = z.matrix();
    let inv = (m + &id).try_inverse().ok_or(DomainError::DomainViolation("Z + i is singular".into()))?;
    BoundedPoint::new((m - &id) * inv)
}

/// The Cayley matrix C with C·U = cayley(U) as a Möbius map.
pub fn cayley_matrix<T: Real>(b: usize) -> CMat<T> {
    let i = ci::<T>();
    let one = Complex::new(T::one(), T::zero());
    let mut c = CMat::zeros(2 * b, 2 * b);
    for k in 0..b {
        c[(k, k)] = i;
        c[(k, b + k)] = i;
        c[(b + k, k)] = -one;
        c[(b + k, b + k)] = one;
    }
    c
}

/// diag(A + iB) in Sp: (A, B; −B, A) with A + iB unitary; fixes i·1.
pub fn siegel_stabilizer<T: Real>(k: &CMat<T>) -> Result<DomainGroupElement<T>, DomainError> {
    let n = k.nrows();
    let a = k.map(|z| Complex::new(z.re, T::zero()));
    let b = k.map(|z| Complex::new(z.im, T::zero()));
    let mut g = CMat::zeros(2 * n, 2 * n);
    g.view_mut((0, 0), (n, n)).copy_from(&a);
    g.view_mut((0, n), (n, n)).copy_from(&b);
    g.view_mut((n, 0), (n, n)).copy_from(&(-&b));
    g.view_mut((n, n), (n, n)).copy_from(&a);
    DomainGroupElement::new(g, DomainTag::Symplectic)
}

/// C·diag(k1, k2)·C⁻¹ for unitary k1, k2; fixes i·1_b.
pub fn hermitian_stabilizer<T: Real>(k1: &CMat<T>, k2: &CMat<T>) -> Result<DomainGroupElement<T>, DomainError> {
    let b = k1.nrows();
    let c = cayley_matrix::<T>(b);
    let mut d = CMat::zeros(2 * b, 2 * b);
    d.view_mut((0, 0), (b, b)).copy_from(k1);
    d.view_mut((b, b), (b, b)).copy_from(k2);
    let cinv = c.clone().try_inverse().expect("Cayley matrix is invertible");
    DomainGroupElement::new(c * d * cinv, DomainTag::UnitaryJ)
}

/// diag(k1, k2) in U(a, b); fixes U = 0.
pub fn bounded_stabilizer<T: Real>(k1: &CMat<T>, k2: &CMat<T>) -> Result<DomainGroupElement<T>, DomainError> {
    let (a, b) = (k1.nrows(), k2.nrows());
    let mut d = CMat::zeros(a + b, a + b);
    d.view_mut((0, 0), (a, a)).copy_from(k1);
    d.view_mut((a, a), (b, b)).copy_from(k2);
    DomainGroupElement::new(d, DomainTag::UnitaryAB { a, b })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeterssonType {
    A,
    C,
}

/// 2^{g r(r+1)/2} Π det(Y_i)^{(r+1)/2} (type C) or 2^{g r²/4} Π det(Y_i)^{r/2} (type A).
pub fn petersson_norm<T: Real>(kind: PeterssonType, points: &[CMat<T>], r: usize) -> Result<T, DomainError> {
    let g = points.len() as f64;
    let rf = r as f64;
    let (two_pow, exp) = match kind {
        PeterssonType::C => (g * rf * (rf + 1.0) / 2.0, (rf + 1.0) / 2.0),
        PeterssonType::A => (g * rf * rf / 4.0, rf / 2.0),
    };
    let mut out = lit::<T>(2.0).powf(lit(two_pow));
    for z in points {
        let expected = match kind {
            PeterssonType::C => r,
            PeterssonType::A => r / 2,
        };
        if z.nrows() != expected || z.ncols() != expected {
            return Err(DomainError::Shape(format!("expected {expected}x{expected} point")));
        }
        let y = imaginary_part_hermitian(z);
        if min_hermitian_eigenvalue(&y) <= lit(MEMBERSHIP_FLOOR) {
            return Err(DomainError::DomainViolation("Im Z is not positive definite".into()));
        }
        let det = y.determinant().re;
        out *= det.powf(lit(exp));
    }
    Ok(out)
}

/// Y = I + G G*, X random Hermitian; X + iY.
pub fn random_hermitian_point<T: Real, R: Rng + ?Sized>(b: usize, rng: &mut R) -> HermitianPoint<T> {
    let g = gaussian::<T, R>(b, b, rng);
    let y = identity::<T>(b) + &g * g.adjoint();
    let x = gaussian::<T, R>(b, b, rng);
    let x = (&x + x.adjoint()).map(|w| w * lit::<T>(0.5));
    HermitianPoint::new(x + y * ci::<T>()).expect("Y ≥ 1 by construction")
}

/// Y = I + G Gᵗ (G real), X random real symmetric.
pub fn random_siegel_point<T: Real, R: Rng + ?Sized>(r: usize, rng: &mut R) -> SiegelPoint<T> {
    let g = gaussian_real::<T, R>(r, r, rng);
    let y = identity::<T>(r) + &g * g.transpose();
    let x = gaussian_real::<T, R>(r, r, rng);
    let x = (&x + x.transpose()).map(|w| w * lit::<T>(0.5));
    SiegelPoint::new(x + y * ci::<T>()).expect("Y ≥ 1 by construction")
}

/// G scaled to operator norm `radius` < 1.
pub fn random_bounded_point<T: Real, R: Rng + ?Sized>(a: usize, b: usize, radius: f64, rng: &mut R) -> BoundedPoint<T> {
    let g = gaussian::<T, R>(a, b, rng);
    let norm = g.clone().svd(false, false).singular_values.iter().copied().fold(T::zero(), |x, y| x.max(y));
    let s = lit::<T>(radius * rng.random::<f64>()) / (norm + lit(1e-300));
    BoundedPoint::new(g.map(|w| w * s)).expect("norm below one")
}

/// Product of translations, dilations and the inversion J in Sp_{2r}(ℝ).
pub fn random_symplectic<T: Real, R: Rng + ?Sized>(r: usize, rng: &mut R) -> DomainGroupElement<T> {
    let mut g = identity::<T>(2 * r);
    let scale = lit::<T>(0.5);
    for _ in 0..2 {
        let s = gaussian_real::<T, R>(r, r, rng);
        let s = (&s + s.transpose()).map(|w| w * scale);
        let mut t = identity::<T>(2 * r);
        t.view_mut((0, r), (r, r)).copy_from(&s);
        let a = identity::<T>(r) + gaussian_real::<T, R>(r, r, rng).map(|w| w * lit::<T>(0.3));
        let ainv_t = a.clone().try_inverse().expect("near identity").transpose();
        let mut d = CMat::zeros(2 * r, 2 * r);
        d.view_mut((0, 0), (r, r)).copy_from(&a);
        d.view_mut((r, r), (r, r)).copy_from(&ainv_t);
        g = g * t * d * standard_j::<T>(r);
    }
    DomainGroupElement::new(g, DomainTag::Symplectic).expect("generated in the group")
}

/// Same generators with Hermitian translations and A ⊕ A^{-*}.
pub fn random_unitary_j<T: Real, R: Rng + ?Sized>(b: usize, rng: &mut R) -> DomainGroupElement<T> {
    let mut g = identity::<T>(2 * b);
    for _ in 0..2 {
        let s = gaussian::<T, R>(b, b, rng);
        let s = (&s + s.adjoint()).map(|w| w * lit::<T>(0.5));
        let mut t = identity::<T>(2 * b);
        t.view_mut((0, b), (b, b)).copy_from(&s);
        let a = identity::<T>(b) + gaussian::<T, R>(b, b, rng).map(|w| w * lit::<T>(0.3));
        let ainv_adj = a.clone().try_inverse().expect("near identity").adjoint();
        let mut d = CMat::zeros(2 * b, 2 * b);
        d.view_mut((0, 0), (b, b)).copy_from(&a);
        d.view_mut((b, b), (b, b)).copy_from(&ainv_adj);
        g = g * t * d * standard_j::<T>(b);
    }
    DomainGroupElement::new(g, DomainTag::UnitaryJ).expect("generated in the group")
}

/// Unitary blocks times hyperbolic boosts mixing one coordinate of each side.
pub fn random_unitary_ab<T: Real, R: Rng + ?Sized>(a: usize, b: usize, rng: &mut R) -> DomainGroupElement<T> {
    let n = a + b;
    let mut g = identity::<T>(n);
    for _ in 0..2 {
        let k1 = random_unitary::<T, R>(a, rng);
        let k2 = random_unitary::<T, R>(b, rng);
        let mut d = CMat::zeros(n, n);
        d.view_mut((0, 0), (a, a)).copy_from(&k1);
        d.view_mut((a, a), (b, b)).copy_from(&k2);
        let t: f64 = rng.random_range(-1.0..1.0);
        let mut h = identity::<T>(n);
        if a > 0 && b > 0 {
            let (ch, sh) = (Complex::new(lit(t.cosh()), T::zero()), Complex::new(lit(t.sinh()), T::zero()));
            h[(0, 0)] = ch;
            h[(a, a)] = ch;
            h[(0, a)] = sh;
            h[(a, 0)] = sh;
        }
        g = g * d * h;
    }
    DomainGroupElement::new(g, DomainTag::UnitaryAB { a, b }).expect("generated in the group")
}

/// Random unitary k with k real-orthogonal option, used for Siegel stabilizers.
pub fn random_unitary_matrix<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat<T> {
    random_unitary::<T, R>(n, rng)
}

pub fn random_orthogonal_matrix<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat<T> {
    random_orthogonal::<T, R>(n, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inversion_fixes_i() {
        let z = SiegelPoint::<f64>::i_identity(2);
        let g = DomainGroupElement::new(standard_j::<f64>(2).map(|w| -w), DomainTag::Symplectic).unwrap();
        let DomainPoint::Siegel(w) = moebius_act(&g, &DomainPoint::Siegel(z.clone())).unwrap() else { panic!() };
        assert!(max_abs(&(w.matrix() - z.matrix())) < 1e-12);
    }

    #[test]
    fn cayley_origin() {
        let z = cayley(&BoundedPoint::<f64>::origin(2, 2)).unwrap();
        assert!(max_abs(&(z.matrix() - HermitianPoint::<f64>::i_identity(2).matrix())) < 1e-14);
    }

    #[test]
    fn hermitian_stabilizer_in_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let k1 = random_unitary::<f64, _>(2, &mut rng);
        let k2 = random_unitary::<f64, _>(2, &mut rng);
        assert!(hermitian_stabilizer(&k1, &k2).is_ok());
    }
}
