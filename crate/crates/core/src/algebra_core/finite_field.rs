//! Finite fields F_{p^d} in a two-level tower F_p ⊂ F_q ⊂ F_{q^m}.
//!
//! Elements are stored as base-p digit strings packed into a `u32`
//! (coefficient of x^k is the k-th digit). Multiplication goes through
//! discrete-log tables built once per field.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Largest field order we build tables for.
pub const MAX_FIELD_ORDER: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("field of order {0} exceeds desk-scale limit")]
    TooLarge(u64),
    #[error("modulus has wrong degree: expected {expected}, got {got}")]
    ModulusDegree { expected: usize, got: usize },
    #[error("modulus is reducible over F_{0}")]
    Reducible(u32),
    #[error("coefficient vector has length {got}, field degree is {expected}")]
    CoefficientLength { expected: usize, got: usize },
    #[error("elements live in different fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
}

/// Shape and tables of a finite field.
#[derive(Clone)]
pub struct FiniteField {
    p: u32,
    base_degree: u32,
    ext_degree: u32,
    modulus: Vec<u32>,
    order: u32,
    generator: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
            && self.base_degree == other.base_degree
            && self.ext_degree == other.ext_degree
            && self.modulus == other.modulus
    }
}
impl Eq for FiniteField {}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "F_{}^{} over F_{}^{} (modulus {:?})",
            self.p,
            self.degree(),
            self.p,
            self.base_degree,
            self.modulus
        )
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2u32;
    while (k as u64) * (k as u64) <= n as u64 {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

// Dense polynomials over F_p, lowest degree first, no trailing zeros.
fn trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = trim(a.to_vec());
    let m = trim(m.to_vec());
    let dm = m.len() - 1;
    let lead_inv = mod_inv(m[dm], p);
    while r.len() > dm {
        let dr = r.len() - 1;
        let c = (r[dr] as u64 * lead_inv as u64 % p as u64) as u32;
        let shift = dr - dm;
        for (k, &mk) in m.iter().enumerate() {
            let sub = (c as u64 * mk as u64 % p as u64) as u32;
            r[shift + k] = (r[shift + k] + p - sub) % p;
        }
        r = trim(r);
    }
    r
}

fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    trim(out.into_iter().map(|v| v as u32).collect())
}

fn mod_inv(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

/// Trial-division irreducibility test for a monic polynomial over F_p.
pub fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let f = trim(modulus.to_vec());
    if f.len() < 2 {
        return false;
    }
    let d = f.len() - 1;
    for deg in 1..=d / 2 {
        let count = (p as u64).pow(deg as u32);
        for idx in 0..count {
            let mut g = Vec::with_capacity(deg + 1);
            let mut t = idx;
            for _ in 0..deg {
                g.push((t % p as u64) as u32);
                t /= p as u64;
            }
            g.push(1);
            if poly_rem(&f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

fn pack(coeffs: &[u32], p: u32) -> u32 {
    coeffs.iter().rev().fold(0u32, |acc, &c| acc * p + c)
}

fn unpack(mut v: u32, p: u32, d: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(d);
    for _ in 0..d {
        out.push(v % p);
        v /= p;
    }
    out
}

impl FiniteField {
    /// The field F_{q^m} with q = p^a, using the lexicographically first
    /// irreducible monic modulus of degree a·m.
    pub fn new(p: u32, base_degree: u32, ext_degree: u32) -> Result<Arc<Self>, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let d = (base_degree * ext_degree) as usize;
        let order = (p as u64).pow(d as u32);
        if order > MAX_FIELD_ORDER {
            return Err(FieldError::TooLarge(order));
        }
        if d == 1 {
            return Self::with_modulus(p, base_degree, ext_degree, vec![0, 1]);
        }
        let count = (p as u64).pow(d as u32);
        for idx in 0..count {
            let mut m = unpack(idx as u32, p, d);
            m.push(1);
            if is_irreducible(&m, p) {
                return Self::with_modulus(p, base_degree, ext_degree, m);
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    /// Build from an explicit monic modulus (lowest degree first).
    pub fn with_modulus(
        p: u32,
        base_degree: u32,
        ext_degree: u32,
        modulus: Vec<u32>,
    ) -> Result<Arc<Self>, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let d = (base_degree * ext_degree) as usize;
        let modulus = trim(modulus.into_iter().map(|c| c % p).collect());
        if modulus.len() != d + 1 {
            return Err(FieldError::ModulusDegree {
                expected: d,
                got: modulus.len().saturating_sub(1),
            });
        }
        if modulus[d] != 1 || !is_irreducible(&modulus, p) {
            return Err(FieldError::Reducible(p));
        }
        let order64 = (p as u64).pow(d as u32);
        if order64 > MAX_FIELD_ORDER {
            return Err(FieldError::TooLarge(order64));
        }
        let order = order64 as u32;
        let mulpoly = |a: u32, b: u32| -> u32 {
            let prod = poly_mul(&trim(unpack(a, p, d)), &trim(unpack(b, p, d)), p);
            pack(&poly_rem(&prod, &modulus, p), p)
        };
        // primitive element search
        let mut generator = 0;
        let mut exp = Vec::new();
        for cand in 1..order {
            let mut table = Vec::with_capacity(order as usize - 1);
            let mut x = 1u32;
            let mut ok = true;
            for k in 0..order - 1 {
                if k > 0 && x == 1 {
                    ok = false;
                    break;
                }
                table.push(x);
                x = mulpoly(x, cand);
            }
            if ok && x == 1 {
                generator = cand;
                exp = table;
                break;
            }
        }
        let mut log = vec![0u32; order as usize];
        for (k, &v) in exp.iter().enumerate() {
            log[v as usize] = k as u32;
        }
        Ok(Arc::new(FiniteField {
            p,
            base_degree,
            ext_degree,
            modulus,
            order,
            generator,
            exp,
            log,
        }))
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }
    /// Total degree over the prime field.
    pub fn degree(&self) -> u32 {
        self.base_degree * self.ext_degree
    }
    pub fn base_degree(&self) -> u32 {
        self.base_degree
    }
    /// Degree over the base field F_q.
    pub fn ext_degree(&self) -> u32 {
        self.ext_degree
    }
    /// q = p^a, the size of the base field.
    pub fn base_order(&self) -> u32 {
        self.p.pow(self.base_degree)
    }
    /// Number of elements.
    pub fn order(&self) -> u32 {
        self.order
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    // raw arithmetic on packed values

    pub(crate) fn add_raw(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            return a ^ b;
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.degree() {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out
    }

    pub(crate) fn neg_raw(&self, a: u32) -> u32 {
        if self.p == 2 {
            return a;
        }
        let mut a = a;
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.degree() {
            out += ((self.p - a % self.p) % self.p) * place;
            a /= self.p;
            place *= self.p;
        }
        out
    }

    pub(crate) fn sub_raw(&self, a: u32, b: u32) -> u32 {
        self.add_raw(a, self.neg_raw(b))
    }

    pub(crate) fn mul_raw(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let n = self.order as u64 - 1;
        let k = (self.log[a as usize] as u64 + self.log[b as usize] as u64) % n;
        self.exp[k as usize]
    }

    pub(crate) fn inv_raw(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let n = self.order as u64 - 1;
        let k = (n - self.log[a as usize] as u64) % n;
        Some(self.exp[k as usize])
    }

    pub(crate) fn pow_raw(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let n = self.order as u64 - 1;
        let k = (self.log[a as usize] as u64 * (e % n)) % n;
        self.exp[k as usize]
    }

    /// x ↦ x^(q^f) on packed values.
    pub(crate) fn frobenius_raw(&self, a: u32, f: u32) -> u32 {
        if a == 0 {
            return 0;
        }
        let n = self.order as u64 - 1;
        let q = self.base_order() as u64 % n.max(1);
        let mut e = 1u64;
        for _ in 0..f {
            e = e * q % n.max(1);
        }
        let k = (self.log[a as usize] as u64 * e) % n;
        self.exp[k as usize]
    }

    pub(crate) fn generator_raw(&self) -> u32 {
        self.generator
    }
}

/// An element of a finite field.
#[derive(Clone)]
pub struct FiniteFieldElement {
    field: Arc<FiniteField>,
    value: u32,
}

impl PartialEq for FiniteFieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && (Arc::ptr_eq(&self.field, &other.field) || self.field == other.field)
    }
}
impl Eq for FiniteFieldElement {}

impl fmt::Debug for FiniteFieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for FiniteFieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.coefficients();
        let terms: Vec<String> = c
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(k, &v)| match k {
                0 => format!("{v}"),
                1 if v == 1 => "x".to_string(),
                1 => format!("{v}x"),
                _ if v == 1 => format!("x^{k}"),
                _ => format!("{v}x^{k}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join("+"))
        }
    }
}

impl FiniteFieldElement {
    pub fn from_coefficients(field: &Arc<FiniteField>, coeffs: &[u32]) -> Result<Self, FieldError> {
        let d = field.degree() as usize;
        if coeffs.len() != d {
            return Err(FieldError::CoefficientLength { expected: d, got: coeffs.len() });
        }
        let reduced: Vec<u32> = coeffs.iter().map(|c| c % field.p).collect();
        Ok(Self { field: field.clone(), value: pack(&reduced, field.p) })
    }

    pub(crate) fn from_raw(field: &Arc<FiniteField>, value: u32) -> Self {
        Self { field: field.clone(), value }
    }

    pub(crate) fn raw(&self) -> u32 {
        self.value
    }

    /// Image of an integer under Z → F_p ⊂ field.
    pub fn from_int(field: &Arc<FiniteField>, n: i64) -> Self {
        let v = n.rem_euclid(field.p as i64) as u32;
        Self { field: field.clone(), value: v }
    }

    pub fn zero(field: &Arc<FiniteField>) -> Self {
        Self { field: field.clone(), value: 0 }
    }
    pub fn one(field: &Arc<FiniteField>) -> Self {
        Self { field: field.clone(), value: 1 }
    }
    /// The class of x modulo the modulus.
    pub fn x(field: &Arc<FiniteField>) -> Self {
        let mut c = vec![0u32; field.degree() as usize];
        if c.len() > 1 {
            c[1] = 1;
            Self::from_coefficients(field, &c).expect("length matches")
        } else {
            // degree one: x ≡ -modulus[0]
            Self::from_int(field, -(field.modulus[0] as i64))
        }
    }
    /// A fixed generator of the multiplicative group (the element ζ).
    pub fn primitive(field: &Arc<FiniteField>) -> Self {
        Self { field: field.clone(), value: field.generator_raw() }
    }

    /// Every element, in packed order.
    pub fn all(field: &Arc<FiniteField>) -> Vec<Self> {
        (0..field.order).map(|v| Self::from_raw(field, v)).collect()
    }

    pub fn field(&self) -> &Arc<FiniteField> {
        &self.field
    }
    pub fn coefficients(&self) -> Vec<u32> {
        unpack(self.value, self.field.p, self.field.degree() as usize)
    }
    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
    pub fn is_one(&self) -> bool {
        self.value == 1
    }

    fn check(&self, o: &Self) {
        debug_assert!(
            Arc::ptr_eq(&self.field, &o.field) || self.field == o.field,
            "finite field mismatch"
        );
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        Self::from_raw(&self.field, self.field.add_raw(self.value, o.value))
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.check(o);
        Self::from_raw(&self.field, self.field.sub_raw(self.value, o.value))
    }
    pub fn neg(&self) -> Self {
        Self::from_raw(&self.field, self.field.neg_raw(self.value))
    }
    pub fn mul(&self, o: &Self) -> Self {
        self.check(o);
        Self::from_raw(&self.field, self.field.mul_raw(self.value, o.value))
    }
    pub fn inv(&self) -> Result<Self, FieldError> {
        self.field
            .inv_raw(self.value)
            .map(|v| Self::from_raw(&self.field, v))
            .ok_or(FieldError::DivisionByZero)
    }
    pub fn div(&self, o: &Self) -> Result<Self, FieldError> {
        Ok(self.mul(&o.inv()?))
    }
    pub fn pow(&self, e: u64) -> Self {
        Self::from_raw(&self.field, self.field.pow_raw(self.value, e))
    }

    /// x ↦ x^(q^f), with q the base-field order.
    pub fn frobenius(&self, f: u32) -> Self {
        Self::from_raw(&self.field, self.field.frobenius_raw(self.value, f))
    }

    /// Multiplicative order (0 for zero).
    pub fn multiplicative_order(&self) -> u64 {
        if self.value == 0 {
            return 0;
        }
        let n = self.field.order as u64 - 1;
        let k = self.field.log[self.value as usize] as u64;
        n / gcd(n, k)
    }
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
