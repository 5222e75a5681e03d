//! The local cyclic division algebra (E/F, τ, π) over the equal-characteristic model
//! F = F_q((π)), E = F_{q^n}((π)).

use std::fmt;
use std::sync::Arc;

use crate::algebra_core::{
    determinant_valuation, FieldError, FiniteField, FiniteFieldElement, LocalSeriesElement, RingMatrix,
    SnfError, Valuation,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CyclicError {
    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("elements belong to different algebras")]
    DescriptorMismatch,
    #[error("coefficient list has length {got}, expected {expected}")]
    Length { got: usize, expected: usize },
    #[error("matrix is not the image of an algebra element")]
    NotInImage,
    #[error("insufficient precision to decide the valuation at ({row}, {col})")]
    InsufficientPrecision { row: usize, col: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Snf(#[from] SnfError),
}

/// Split a prime power q = p^a.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let (mut m, mut a) = (q, 0);
    while m % p == 0 {
        m /= p;
        a += 1;
    }
    (m == 1).then_some((p, a))
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Parameters (n, q, f, s) of B_v, plus the residue field F_{q^n} and working precision.
#[derive(Clone)]
pub struct CyclicAlgebraDescriptor {
    n: u32,
    q: u32,
    f: u32,
    s: u32,
    precision: i64,
    uniformizer: String,
    field: Arc<FiniteField>,
}

impl CyclicAlgebraDescriptor {
    pub fn new(n: u32, q: u32, f: u32, s: u32, precision: i64) -> Result<Self, CyclicError> {
        if n == 0 {
            return Err(CyclicError::InvalidDescriptor("degree n must be at least 1".into()));
        }
        if !(1..=n).contains(&f) || gcd(f, n) != 1 {
            return Err(CyclicError::InvalidDescriptor(format!("invariant numerator f={f} must satisfy 1 ≤ f ≤ n and gcd(f, n) = 1")));
        }
        if !(2 * s).is_multiple_of(n) {
            return Err(CyclicError::InvalidDescriptor(format!("conjugation exponent s={s} must satisfy 2s ≡ 0 mod {n}")));
        }
        if precision < 1 {
            return Err(CyclicError::InvalidDescriptor("precision must be positive".into()));
        }
        let (p, a) = prime_power(q).ok_or_else(|| CyclicError::InvalidDescriptor(format!("q={q} is not a prime power")))?;
        let field = FiniteField::new(p, a, n)?;
        Ok(Self { n, q, f, s: s % n, precision, uniformizer: "pi".into(), field })
    }

    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn f(&self) -> u32 {
        self.f
    }
    pub fn s(&self) -> u32 {
        self.s
    }
    pub fn precision(&self) -> i64 {
        self.precision
    }
    pub fn uniformizer_label(&self) -> &str {
        &self.uniformizer
    }
    /// Residue field F_{q^n} of E.
    pub fn residue_field(&self) -> &Arc<FiniteField> {
        &self.field
    }

    /// τ^k on E: coefficientwise ζ ↦ ζ^(q^(fk)).
    pub fn tau_pow(&self, x: &LocalSeriesElement, k: u32) -> LocalSeriesElement {
        let e = (self.f as u64 * k as u64 % self.n as u64) as u32;
        if e == 0 {
            x.clone()
        } else {
            x.frobenius(e)
        }
    }
    pub fn tau(&self, x: &LocalSeriesElement) -> LocalSeriesElement {
        self.tau_pow(x, 1)
    }
    /// The bar involution τ^s on E.
    pub fn bar(&self, x: &LocalSeriesElement) -> LocalSeriesElement {
        self.tau_pow(x, self.s)
    }

    pub fn zero_series(&self) -> LocalSeriesElement {
        LocalSeriesElement::zero(&self.field, self.precision)
    }
    pub fn one_series(&self) -> LocalSeriesElement {
        LocalSeriesElement::one(&self.field, self.precision)
    }
    pub fn pi(&self) -> LocalSeriesElement {
        LocalSeriesElement::pi(&self.field, self.precision)
    }
    /// A residue-field constant as a series at working precision.
    pub fn constant(&self, c: &FiniteFieldElement) -> LocalSeriesElement {
        LocalSeriesElement::constant(c, self.precision)
    }

    fn same_as(&self, o: &Self) -> bool {
        self.n == o.n && self.q == o.q && self.f == o.f && self.s == o.s && Arc::ptr_eq(&self.field, &o.field)
    }
}

impl fmt::Debug for CyclicAlgebraDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CyclicAlgebra(n={}, q={}, f={}, s={}, prec={})", self.n, self.q, self.f, self.s, self.precision)
    }
}

/// Σ x_i u^i.
#[derive(Clone, Debug)]
pub struct CyclicAlgebraElement {
    desc: Arc<CyclicAlgebraDescriptor>,
    coeffs: Vec<LocalSeriesElement>,
}

impl CyclicAlgebraElement {
    pub fn new(desc: &Arc<CyclicAlgebraDescriptor>, coeffs: Vec<LocalSeriesElement>) -> Result<Self, CyclicError> {
        let n = desc.n as usize;
        if coeffs.len() != n {
            return Err(CyclicError::Length { got: coeffs.len(), expected: n });
        }
        if coeffs.iter().any(|c| !Arc::ptr_eq(c.field(), &desc.field)) {
            return Err(CyclicError::DescriptorMismatch);
        }
        Ok(Self { desc: desc.clone(), coeffs })
    }

    pub fn zero(desc: &Arc<CyclicAlgebraDescriptor>) -> Self {
        Self { desc: desc.clone(), coeffs: vec![desc.zero_series(); desc.n as usize] }
    }
    pub fn one(desc: &Arc<CyclicAlgebraDescriptor>) -> Self {
        Self::scalar(desc, desc.one_series())
    }
    /// x ∈ E embedded as x·u^0.
    pub fn scalar(desc: &Arc<CyclicAlgebraDescriptor>, x: LocalSeriesElement) -> Self {
        let mut out = Self::zero(desc);
        out.coeffs[0] = x;
        out
    }
    /// The generator u (equal to π when n = 1).
    pub fn u(desc: &Arc<CyclicAlgebraDescriptor>) -> Self {
        if desc.n == 1 {
            return Self::scalar(desc, desc.pi());
        }
        let mut out = Self::zero(desc);
        out.coeffs[1] = desc.one_series();
        out
    }
    /// x·u^i for 0 ≤ i < n.
    pub fn monomial(desc: &Arc<CyclicAlgebraDescriptor>, x: LocalSeriesElement, i: usize) -> Self {
        let mut out = Self::zero(desc);
        out.coeffs[i] = x;
        out
    }

    pub fn descriptor(&self) -> &Arc<CyclicAlgebraDescriptor> {
        &self.desc
    }
    pub fn coefficients(&self) -> &[LocalSeriesElement] {
        &self.coeffs
    }

    fn check(&self, o: &Self) -> Result<(), CyclicError> {
        if Arc::ptr_eq(&self.desc, &o.desc) || self.desc.same_as(&o.desc) {
            Ok(())
        } else {
            Err(CyclicError::DescriptorMismatch)
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self, CyclicError> {
        self.check(o)?;
        Ok(Self { desc: self.desc.clone(), coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.add(b)).collect() })
    }
    pub fn sub(&self, o: &Self) -> Result<Self, CyclicError> {
        self.check(o)?;
        Ok(Self { desc: self.desc.clone(), coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.sub(b)).collect() })
    }

    /// Product under u^n = π and u·x = τ(x)·u.
    pub fn multiply(&self, o: &Self) -> Result<Self, CyclicError> {
        self.check(o)?;
        let d = &self.desc;
        let n = d.n as usize;
        let mut out = vec![d.zero_series(); n];
        let pi = d.pi();
        for (i, x) in self.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in o.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                // x u^i · y u^j = x τ^i(y) u^(i+j)
                let mut t = x.mul(&d.tau_pow(y, i as u32));
                let k = i + j;
                let k = if k >= n {
                    t = t.mul(&pi);
                    k - n
                } else {
                    k
                };
                out[k] = out[k].add(&t);
            }
        }
        Ok(Self { desc: d.clone(), coeffs: out })
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one(&self.desc);
        for _ in 0..e {
            out = out.multiply(self).expect("same algebra");
        }
        out
    }

    /// Equality at working precision.
    pub fn same(&self, o: &Self) -> bool {
        self.check(o).is_ok() && self.coeffs.iter().zip(&o.coeffs).all(|(a, b)| a.eq_within(b))
    }

    /// M[k][l] = τ^k(x_{(l−k) mod n}), times π strictly below the diagonal.
    pub fn to_matrix(&self) -> RingMatrix<LocalSeriesElement> {
        let d = &self.desc;
        let n = d.n as usize;
        let pi = d.pi();
        let t = d.zero_series();
        RingMatrix::from_fn(n, n, &t, |k, l| {
            let x = &self.coeffs[(l + n - k) % n];
            let e = d.tau_pow(x, k as u32);
            if l < k {
                e.mul(&pi)
            } else {
                e
            }
        })
    }

    /// Inverse of `to_matrix`: read the first row, then confirm the rest.
    pub fn from_matrix(desc: &Arc<CyclicAlgebraDescriptor>, m: &RingMatrix<LocalSeriesElement>) -> Result<Self, CyclicError> {
        let n = desc.n as usize;
        if m.rows() != n || m.cols() != n {
            return Err(CyclicError::Length { got: m.rows(), expected: n });
        }
        let a = Self::new(desc, m.row(0).to_vec())?;
        if a.to_matrix().same(m) {
            Ok(a)
        } else {
            Err(CyclicError::NotInImage)
        }
    }

    /// a ↦ a* realised through the matrix formula; fails when the result
    /// leaves the image (which happens for n ≥ 3 once τ² ≠ 1 interferes).
    pub fn involution_star(&self) -> Result<Self, CyclicError> {
        let m = involution_star_matrix(&self.desc, &self.to_matrix());
        Self::from_matrix(&self.desc, &m)
    }

    /// Reduced trace: trace of the matrix image.
    pub fn reduced_trace(&self) -> LocalSeriesElement {
        let m = self.to_matrix();
        (0..m.rows()).fold(self.desc.zero_series(), |acc, i| acc.add(m.get(i, i)))
    }
}

/// M ↦ H⁻¹ τ(M̄ᵗ) H with H the anti-diagonal of ones (so H⁻¹ = H).
pub fn involution_star_matrix(
    desc: &CyclicAlgebraDescriptor,
    m: &RingMatrix<LocalSeriesElement>,
) -> RingMatrix<LocalSeriesElement> {
    let n = m.rows();
    // (H A H)[i][j] = A[n−1−i][n−1−j], with A = τ(bar(M))ᵗ
    RingMatrix::from_fn(n, m.cols(), m.template(), |i, j| {
        let e = m.get(n - 1 - j, n - 1 - i);
        desc.tau(&desc.bar(e))
    })
}

/// Entries on/above the diagonal integral, strictly below divisible by π.
pub fn in_maximal_order(m: &RingMatrix<LocalSeriesElement>) -> Result<bool, CyclicError> {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let bound = if i > j { 1 } else { 0 };
            let e = m.get(i, j);
            match e.valuation() {
                Valuation::Finite(v) => {
                    if v < bound {
                        return Ok(false);
                    }
                }
                Valuation::Infinite => {
                    if e.precision() < bound {
                        return Err(CyclicError::InsufficientPrecision { row: i, col: j });
                    }
                }
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscriminantReport {
    pub n: u32,
    pub q: u32,
    pub f: u32,
    pub split: bool,
    /// π-exponent of the maximal-order discriminant.
    pub discriminant_exponent: u32,
    /// Exponent n_v of the place in the reduced discriminant.
    pub reduced_exponent: u32,
}

pub fn discriminant_report(d: &CyclicAlgebraDescriptor, split: bool) -> DiscriminantReport {
    let (disc, nv) = if split || d.n == 1 { (0, 0) } else { (d.n * (d.n - 1), 1) };
    DiscriminantReport { n: d.n, q: d.q, f: d.f, split, discriminant_exponent: disc, reduced_exponent: nv }
}

/// The n² elements ζ^a u^i, an O_F-basis of the maximal order.
pub fn order_basis(desc: &Arc<CyclicAlgebraDescriptor>) -> Vec<CyclicAlgebraElement> {
    let n = desc.n as usize;
    let zeta = FiniteFieldElement::primitive(&desc.field);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for a in 0..n {
            out.push(CyclicAlgebraElement::monomial(desc, desc.constant(&zeta.pow(a as u64)), i));
        }
    }
    out
}

/// π-valuation of det(tr_red(b_i b_j)) over `order_basis`.
pub fn trace_form_discriminant(desc: &Arc<CyclicAlgebraDescriptor>) -> Result<Valuation, CyclicError> {
    let basis = order_basis(desc);
    let k = basis.len();
    let mut rows = Vec::with_capacity(k);
    for a in &basis {
        let mut row = Vec::with_capacity(k);
        for b in &basis {
            row.push(a.multiply(b)?.reduced_trace());
        }
        rows.push(row);
    }
    let m = RingMatrix::from_rows(rows, &desc.zero_series()).expect("square");
    Ok(determinant_valuation(&m)?)
}

impl PartialEq for CyclicAlgebraElement {
    fn eq(&self, o: &Self) -> bool {
        self.same(o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quat(q: u32) -> Arc<CyclicAlgebraDescriptor> {
        Arc::new(CyclicAlgebraDescriptor::new(2, q, 1, 0, 8).unwrap())
    }

    #[test]
    fn u_to_the_n_is_pi() {
        let d = quat(3);
        let u = CyclicAlgebraElement::u(&d);
        let pi = CyclicAlgebraElement::scalar(&d, d.pi());
        assert!(u.pow(2).same(&pi));
    }

    #[test]
    fn u_matrix_shape() {
        let d = quat(2);
        let m = CyclicAlgebraElement::u(&d).to_matrix();
        assert!(m.get(0, 0).is_zero() && m.get(1, 1).is_zero());
        assert!(m.get(0, 1).eq_within(&d.one_series()));
        assert!(m.get(1, 0).eq_within(&d.pi()));
    }

    #[test]
    fn rejects_bad_descriptor() {
        assert!(CyclicAlgebraDescriptor::new(4, 3, 2, 0, 8).is_err());
        assert!(CyclicAlgebraDescriptor::new(3, 6, 1, 0, 8).is_err());
        assert!(CyclicAlgebraDescriptor::new(3, 2, 1, 1, 8).is_err());
    }

    #[test]
    fn discriminant_cross_check_small() {
        for n in 1..=3 {
            let d = Arc::new(CyclicAlgebraDescriptor::new(n, 2, 1, 0, 8).unwrap());
            let v = trace_form_discriminant(&d).unwrap();
            assert_eq!(v, Valuation::Finite((n * (n - 1)) as i64));
        }
    }
}
