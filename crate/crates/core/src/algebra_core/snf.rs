//! Smith normal form with certificates, over F[[π]] and over ℤ.

use super::matrix::{RingElement, RingMatrix};
use super::series::{LocalSeriesElement, Valuation};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SnfError {
    #[error("insufficient precision: pivot valuation {pivot} not certified below an unresolved entry known only to precision {precision}")]
    InsufficientPrecision { pivot: i64, precision: i64 },
    #[error("non-integral entry at ({0}, {1})")]
    NonIntegral(usize, usize),
}

/// What the elimination needs beyond ring arithmetic.
pub trait SnfRing: RingElement {
    /// Euclidean size; `None` for zero. Smaller means "divides more".
    fn size(&self) -> Option<i64>;
    /// q with size(self − q·b) < size(b), or self − q·b = 0.
    fn quotient(&self, b: &Self) -> Self;
    /// A unit c such that self·c is the canonical associate.
    fn normalizing_unit(&self) -> Self;
    /// For a zero that is only known up to precision: the smallest size
    /// the true value could have. `None` when zero is exact.
    fn zero_bound(&self) -> Option<i64> {
        None
    }
    /// Whether the elimination must check divisibility of the rest of the
    /// block (false for valuation rings, where the minimal pivot divides all).
    fn needs_divisibility_fixup() -> bool {
        true
    }
}

impl SnfRing for LocalSeriesElement {
    fn size(&self) -> Option<i64> {
        self.valuation().finite()
    }
    fn quotient(&self, b: &Self) -> Self {
        match (self.valuation(), b.valuation()) {
            (Valuation::Finite(va), Valuation::Finite(vb)) if va >= vb => {
                self.div_exact(b).expect("nonzero divisor")
            }
            _ => self.zero_like(),
        }
    }
    fn normalizing_unit(&self) -> Self {
        match self.valuation() {
            Valuation::Finite(v) => self.inverse().expect("nonzero").shift(v),
            Valuation::Infinite => self.one_like(),
        }
    }
    fn zero_bound(&self) -> Option<i64> {
        if self.is_zero() {
            Some(self.precision())
        } else {
            None
        }
    }
    fn needs_divisibility_fixup() -> bool {
        false
    }
}

impl SnfRing for i64 {
    fn size(&self) -> Option<i64> {
        if *self == 0 {
            None
        } else {
            Some(self.abs())
        }
    }
    fn quotient(&self, b: &Self) -> Self {
        // nearest-integer quotient keeps remainders small
        let q = self.div_euclid(*b);
        let r = self - q * b;
        if 2 * r.abs() > b.abs() {
            if *b > 0 {
                q + 1
            } else {
                q - 1
            }
        } else {
            q
        }
    }
    fn normalizing_unit(&self) -> Self {
        if *self < 0 {
            -1
        } else {
            1
        }
    }
}

/// U·A·V = D with U, V invertible over the ring.
#[derive(Debug, Clone)]
pub struct SmithDecomposition<R> {
    /// Diagonal of D, length min(rows, cols); zeros come last.
    pub diagonal: Vec<R>,
    pub u: RingMatrix<R>,
    pub v: RingMatrix<R>,
    /// Determinants of U and V, tracked through the elementary operations.
    pub det_u: R,
    pub det_v: R,
}

impl<R: SnfRing> SmithDecomposition<R> {
    /// Recompute U·A·V and compare against the diagonal.
    pub fn verify(&self, a: &RingMatrix<R>) -> bool {
        let Ok(ua) = self.u.mul(a) else { return false };
        let Ok(d) = ua.mul(&self.v) else { return false };
        for i in 0..d.rows() {
            for j in 0..d.cols() {
                let e = d.get(i, j);
                let ok = if i == j { e.same(&self.diagonal[i]) } else { e.is_zero() };
                if !ok {
                    return false;
                }
            }
        }
        // divisibility chain
        self.diagonal.windows(2).all(|w| match (w[0].size(), w[1].size()) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(_), Some(_)) => w[1].minus(&w[1].quotient(&w[0]).times(&w[0])).is_zero(),
        })
    }

    /// Number of nonzero diagonal entries.
    pub fn rank(&self) -> usize {
        self.diagonal.iter().filter(|d| !d.is_zero()).count()
    }
}

impl SmithDecomposition<LocalSeriesElement> {
    /// π-exponents of the elementary divisors, nondecreasing, ∞ for zero.
    pub fn exponents(&self) -> Vec<Valuation> {
        self.diagonal.iter().map(|d| d.valuation()).collect()
    }
}

/// Smith normal form with pivot rule: minimal size, then smallest (row, col).
pub fn smith_normal_form<R: SnfRing>(a: &RingMatrix<R>) -> Result<SmithDecomposition<R>, SnfError> {
    let (m, n) = (a.rows(), a.cols());
    let t = a.template().clone();
    let mut d = a.clone();
    let mut u = RingMatrix::identity(m, &t);
    let mut v = RingMatrix::identity(n, &t);
    let mut det_u = t.one_like();
    let mut det_v = t.one_like();
    let steps = m.min(n);

    for k in 0..steps {
        loop {
            // pivot search over the remaining block
            let mut best: Option<(i64, usize, usize)> = None;
            let mut zero_floor: Option<i64> = None;
            for i in k..m {
                for j in k..n {
                    let e = d.get(i, j);
                    match e.size() {
                        Some(s) => {
                            if best.is_none_or(|(b, _, _)| s < b) {
                                best = Some((s, i, j));
                            }
                        }
                        None => {
                            if let Some(zb) = e.zero_bound() {
                                zero_floor = Some(zero_floor.map_or(zb, |z: i64| z.min(zb)));
                            }
                        }
                    }
                }
            }
            let Some((s, pi, pj)) = best else {
                // remaining block vanishes at working precision
                return Ok(finish(d, u, v, det_u, det_v, steps));
            };
            if let Some(z) = zero_floor {
                if z < s {
                    return Err(SnfError::InsufficientPrecision { pivot: s, precision: z });
                }
            }
            if pi != k {
                d.swap_rows(pi, k);
                u.swap_rows(pi, k);
                det_u = det_u.negate();
            }
            if pj != k {
                d.swap_cols(pj, k);
                v.swap_cols(pj, k);
                det_v = det_v.negate();
            }
            let c = d.get(k, k).normalizing_unit();
            d.scale_row(k, &c);
            u.scale_row(k, &c);
            det_u = det_u.times(&c);

            let p = d.get(k, k).clone();
            let mut dirty = false;
            for i in k + 1..m {
                if d.get(i, k).is_zero() {
                    continue;
                }
                let q = d.get(i, k).quotient(&p).negate();
                d.add_row_multiple(i, k, &q);
                u.add_row_multiple(i, k, &q);
                // exact ring: clear any residue left by truncation
                if !d.get(i, k).is_zero() {
                    dirty = true;
                }
            }
            for j in k + 1..n {
                if d.get(k, j).is_zero() {
                    continue;
                }
                let q = d.get(k, j).quotient(&p).negate();
                d.add_col_multiple(j, k, &q);
                v.add_col_multiple(j, k, &q);
                if !d.get(k, j).is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            if R::needs_divisibility_fixup() {
                let mut bad = None;
                'scan: for i in k + 1..m {
                    for j in k + 1..n {
                        let e = d.get(i, j);
                        if !e.is_zero() && !e.minus(&e.quotient(&p).times(&p)).is_zero() {
                            bad = Some(i);
                            break 'scan;
                        }
                    }
                }
                if let Some(i) = bad {
                    let one = t.one_like();
                    d.add_row_multiple(k, i, &one);
                    u.add_row_multiple(k, i, &one);
                    continue;
                }
            }
            break;
        }
    }
    Ok(finish(d, u, v, det_u, det_v, steps))
}

fn finish<R: SnfRing>(
    d: RingMatrix<R>,
    u: RingMatrix<R>,
    v: RingMatrix<R>,
    det_u: R,
    det_v: R,
    steps: usize,
) -> SmithDecomposition<R> {
    let diagonal = (0..steps).map(|i| d.get(i, i).clone()).collect();
    SmithDecomposition { diagonal, u, v, det_u, det_v }
}

/// π-valuation of the determinant of a square series matrix, via SNF.
pub fn determinant_valuation(a: &RingMatrix<LocalSeriesElement>) -> Result<Valuation, SnfError> {
    let s = smith_normal_form(a)?;
    Ok(s.exponents().into_iter().fold(Valuation::Finite(0), |acc, v| acc + v))
}
