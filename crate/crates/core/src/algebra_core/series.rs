//! Truncated Laurent series over a finite field: the model of the local
//! rings O_F = F_q[[π]] ⊂ O_E = F_{q^n}[[π]] and their fraction fields.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::finite_field::{FiniteField, FiniteFieldElement};

/// Absolute π-adic precision used when none is given.
pub const DEFAULT_PRECISION: i64 = 16;

/// A π-adic valuation; `Infinite` is the valuation of zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinite) => Ordering::Less,
            (Valuation::Infinite, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
        }
    }
}

impl Add for Valuation {
    type Output = Valuation;
    fn add(self, o: Valuation) -> Valuation {
        match (self, o) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// Σ c_k π^k for val ≤ k < prec. Zero is the explicit sentinel
/// `val = Infinite` with empty coefficients; its `prec` still records
/// how far it is known to vanish.
#[derive(Clone)]
pub struct LocalSeriesElement {
    field: Arc<FiniteField>,
    val: Valuation,
    coeffs: Vec<u32>,
    prec: i64,
}

impl LocalSeriesElement {
    fn normalize(field: &Arc<FiniteField>, start: i64, mut coeffs: Vec<u32>, prec: i64) -> Self {
        let keep = (prec - start).max(0) as usize;
        coeffs.truncate(keep);
        let lead = coeffs.iter().position(|&c| c != 0);
        match lead {
            None => Self::zero(field, prec),
            Some(k) => {
                coeffs.drain(..k);
                while coeffs.last() == Some(&0) {
                    coeffs.pop();
                }
                Self { field: field.clone(), val: Valuation::Finite(start + k as i64), coeffs, prec }
            }
        }
    }

    /// Σ coeffs[k] π^(start+k), truncated at `prec`.
    pub fn from_coefficients(
        field: &Arc<FiniteField>,
        start: i64,
        coeffs: &[FiniteFieldElement],
        prec: i64,
    ) -> Self {
        Self::normalize(field, start, coeffs.iter().map(|c| c.raw()).collect(), prec)
    }

    pub fn zero(field: &Arc<FiniteField>, prec: i64) -> Self {
        Self { field: field.clone(), val: Valuation::Infinite, coeffs: Vec::new(), prec }
    }
    pub fn one(field: &Arc<FiniteField>, prec: i64) -> Self {
        Self::monomial_raw(field, 1, 0, prec)
    }
    /// The uniformizer π.
    pub fn pi(field: &Arc<FiniteField>, prec: i64) -> Self {
        Self::monomial_raw(field, 1, 1, prec)
    }
    /// c·π^k.
    pub fn monomial(c: &FiniteFieldElement, k: i64, prec: i64) -> Self {
        Self::monomial_raw(c.field(), c.raw(), k, prec)
    }
    /// A constant of the residue field.
    pub fn constant(c: &FiniteFieldElement, prec: i64) -> Self {
        Self::monomial(c, 0, prec)
    }
    pub fn from_int(field: &Arc<FiniteField>, n: i64, prec: i64) -> Self {
        Self::constant(&FiniteFieldElement::from_int(field, n), prec)
    }

    pub(crate) fn monomial_raw(field: &Arc<FiniteField>, c: u32, k: i64, prec: i64) -> Self {
        if c == 0 || k >= prec {
            return Self::zero(field, prec);
        }
        Self { field: field.clone(), val: Valuation::Finite(k), coeffs: vec![c], prec }
    }

    pub fn field(&self) -> &Arc<FiniteField> {
        &self.field
    }
    pub fn valuation(&self) -> Valuation {
        self.val
    }
    pub fn precision(&self) -> i64 {
        self.prec
    }
    pub fn is_zero(&self) -> bool {
        self.val.is_infinite()
    }
    pub fn is_unit(&self) -> bool {
        self.val == Valuation::Finite(0)
    }
    /// Lowest exponent at which the element could be nonzero.
    pub fn lower_bound(&self) -> i64 {
        self.val.finite().unwrap_or(self.prec)
    }

    /// Coefficient of π^k (zero outside the stored range).
    pub fn coefficient(&self, k: i64) -> FiniteFieldElement {
        FiniteFieldElement::from_raw(&self.field, self.coeff_raw(k))
    }

    fn coeff_raw(&self, k: i64) -> u32 {
        match self.val {
            Valuation::Finite(v) if k >= v => self.coeffs.get((k - v) as usize).copied().unwrap_or(0),
            _ => 0,
        }
    }

    /// Leading coefficient (zero for the zero element).
    pub fn leading_coefficient(&self) -> FiniteFieldElement {
        FiniteFieldElement::from_raw(&self.field, self.coeffs.first().copied().unwrap_or(0))
    }

    /// Reduction modulo π (constant term).
    pub fn residue(&self) -> FiniteFieldElement {
        self.coefficient(0)
    }

    /// Same value, precision lowered to `prec` if that is smaller.
    pub fn truncate(&self, prec: i64) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        let start = self.val.finite().unwrap_or(prec);
        Self::normalize(&self.field, start, self.coeffs.clone(), prec)
    }

    /// Same value with precision raised: only meaningful for exactly known
    /// elements (π, units built from constants, etc.).
    pub fn with_precision(&self, prec: i64) -> Self {
        let mut out = self.clone();
        out.prec = prec;
        out.truncate(prec)
    }

    fn same_field(&self, o: &Self) {
        debug_assert!(
            Arc::ptr_eq(&self.field, &o.field) || self.field == o.field,
            "series over different residue fields"
        );
    }

    pub fn add(&self, o: &Self) -> Self {
        self.combine(o, false)
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.combine(o, true)
    }

    fn combine(&self, o: &Self, subtract: bool) -> Self {
        self.same_field(o);
        let prec = self.prec.min(o.prec);
        let f = &self.field;
        match (self.val, o.val) {
            (_, Valuation::Infinite) => self.truncate(prec),
            (Valuation::Infinite, _) => {
                let t = o.truncate(prec);
                if subtract {
                    t.neg()
                } else {
                    t
                }
            }
            (Valuation::Finite(a), Valuation::Finite(b)) => {
                let start = a.min(b);
                let end = (a + self.coeffs.len() as i64).max(b + o.coeffs.len() as i64).min(prec);
                if end <= start {
                    return Self::zero(f, prec);
                }
                let mut out = Vec::with_capacity((end - start) as usize);
                for k in start..end {
                    let x = self.coeff_raw(k);
                    let y = o.coeff_raw(k);
                    out.push(if subtract { f.sub_raw(x, y) } else { f.add_raw(x, y) });
                }
                Self::normalize(f, start, out, prec)
            }
        }
    }

    pub fn neg(&self) -> Self {
        let f = &self.field;
        Self {
            field: f.clone(),
            val: self.val,
            coeffs: self.coeffs.iter().map(|&c| f.neg_raw(c)).collect(),
            prec: self.prec,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.same_field(o);
        let prec = (self.lower_bound() + o.prec).min(o.lower_bound() + self.prec);
        let (a, b) = match (self.val, o.val) {
            (Valuation::Finite(a), Valuation::Finite(b)) => (a, b),
            _ => return Self::zero(&self.field, prec),
        };
        let f = &self.field;
        let start = a + b;
        let len = (prec - start).max(0) as usize;
        let mut out = vec![0u32; len.min(self.coeffs.len() + o.coeffs.len())];
        for (i, &x) in self.coeffs.iter().enumerate() {
            if x == 0 || i >= out.len() {
                continue;
            }
            for (j, &y) in o.coeffs.iter().enumerate() {
                if i + j >= out.len() {
                    break;
                }
                out[i + j] = f.add_raw(out[i + j], f.mul_raw(x, y));
            }
        }
        Self::normalize(f, start, out, prec)
    }

    /// Multiply by a residue-field constant.
    pub fn scale(&self, c: &FiniteFieldElement) -> Self {
        let f = &self.field;
        if c.is_zero() {
            return Self::zero(f, self.prec);
        }
        Self {
            field: f.clone(),
            val: self.val,
            coeffs: self.coeffs.iter().map(|&x| f.mul_raw(x, c.raw())).collect(),
            prec: self.prec,
        }
    }

    /// Multiply by π^k (shifts precision too).
    pub fn shift(&self, k: i64) -> Self {
        let mut out = self.clone();
        out.prec += k;
        if let Valuation::Finite(v) = out.val {
            out.val = Valuation::Finite(v + k);
        }
        out
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        let v = self.val.finite()?;
        let f = &self.field;
        let rel = self.prec - v;
        let n = rel.max(0) as usize;
        // unit part u = Σ c_k π^k with c_0 ≠ 0; solve u·w = 1 term by term
        let c0inv = f.inv_raw(self.coeffs[0]).expect("leading coefficient is nonzero");
        let mut w = vec![0u32; n];
        for k in 0..n {
            let mut acc = if k == 0 { 1 } else { 0 };
            for j in 1..=k {
                let cj = self.coeffs.get(j).copied().unwrap_or(0);
                if cj != 0 {
                    acc = f.sub_raw(acc, f.mul_raw(cj, w[k - j]));
                }
            }
            w[k] = f.mul_raw(acc, c0inv);
        }
        Some(Self::normalize(f, -v, w, rel - v))
    }

    /// a / b over the fraction field.
    pub fn div(&self, o: &Self) -> Option<Self> {
        Some(self.mul(&o.inverse()?))
    }

    /// Exact division when the quotient is integral-compatible: returns
    /// q with self = q·o when val(o) ≤ val(self).
    pub fn div_exact(&self, o: &Self) -> Option<Self> {
        if o.is_zero() {
            return None;
        }
        if self.is_zero() {
            let prec = self.prec - o.lower_bound();
            return Some(Self::zero(&self.field, prec));
        }
        self.div(o)
    }

    /// Apply the residue-field Frobenius x ↦ x^(q^f) to every coefficient.
    pub fn frobenius(&self, f: u32) -> Self {
        let fld = &self.field;
        Self {
            field: fld.clone(),
            val: self.val,
            coeffs: self.coeffs.iter().map(|&c| fld.frobenius_raw(c, f)).collect(),
            prec: self.prec,
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one(&self.field, self.prec);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Equal up to the smaller of the two precisions.
    pub fn eq_within(&self, o: &Self) -> bool {
        self.sub(o).is_zero()
    }

    /// Stored coefficients starting at the valuation.
    pub fn coefficients(&self) -> Vec<FiniteFieldElement> {
        self.coeffs.iter().map(|&c| FiniteFieldElement::from_raw(&self.field, c)).collect()
    }
}

impl PartialEq for LocalSeriesElement {
    fn eq(&self, o: &Self) -> bool {
        self.eq_within(o)
    }
}

impl fmt::Debug for LocalSeriesElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for LocalSeriesElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.val {
            Valuation::Infinite => write!(f, "O(pi^{})", self.prec),
            Valuation::Finite(v) => {
                let mut terms = Vec::new();
                for (k, &c) in self.coeffs.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    let e = FiniteFieldElement::from_raw(&self.field, c);
                    let exp = v + k as i64;
                    terms.push(match exp {
                        0 => format!("({e})"),
                        1 => format!("({e})pi"),
                        _ => format!("({e})pi^{exp}"),
                    });
                }
                write!(f, "{} + O(pi^{})", terms.join(" + "), self.prec)
            }
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&LocalSeriesElement> for &LocalSeriesElement {
            type Output = LocalSeriesElement;
            fn $m(self, o: &LocalSeriesElement) -> LocalSeriesElement {
                LocalSeriesElement::$m(self, o)
            }
        }
    };
}
forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for &LocalSeriesElement {
    type Output = LocalSeriesElement;
    fn neg(self) -> LocalSeriesElement {
        LocalSeriesElement::neg(self)
    }
}

/// Free-function spelling of the valuation, matching the operation list.
pub fn series_valuation(x: &LocalSeriesElement) -> Valuation {
    x.valuation()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f4() -> Arc<FiniteField> {
        FiniteField::new(2, 1, 2).unwrap()
    }

    #[test]
    fn inverse_of_one_plus_pi() {
        let f = f4();
        let x = LocalSeriesElement::one(&f, 8).add(&LocalSeriesElement::pi(&f, 8));
        let y = x.inverse().unwrap();
        assert!(x.mul(&y).eq_within(&LocalSeriesElement::one(&f, 8)));
        // over F_2, 1/(1+pi) = 1 + pi + pi^2 + ...
        for k in 0..8 {
            assert!(y.coefficient(k).is_one());
        }
    }

    #[test]
    fn inverse_of_pi_is_laurent() {
        let f = f4();
        let p = LocalSeriesElement::pi(&f, 8);
        let q = p.inverse().unwrap();
        assert_eq!(q.valuation(), Valuation::Finite(-1));
        assert!(p.mul(&q).eq_within(&LocalSeriesElement::one(&f, 8)));
    }

    #[test]
    fn precision_tracks_through_products() {
        let f = f4();
        let a = LocalSeriesElement::pi(&f, 5).pow(2);
        assert_eq!(a.precision(), 6);
        let z = LocalSeriesElement::zero(&f, 3);
        assert_eq!(z.mul(&a).precision(), 5); // 3 + 2
    }
}
