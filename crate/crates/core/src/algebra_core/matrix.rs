//! Dense matrices over the exact rings of this crate.

use std::fmt;

use super::finite_field::FiniteFieldElement;
use super::series::LocalSeriesElement;

/// The ring operations the exact linear algebra needs.
pub trait RingElement: Clone + fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negate(&self) -> Self;
    /// Equality at the working precision of both operands.
    fn same(&self, o: &Self) -> bool {
        self.minus(o).is_zero()
    }
}

impl RingElement for LocalSeriesElement {
    fn zero_like(&self) -> Self {
        LocalSeriesElement::zero(self.field(), self.precision())
    }
    fn one_like(&self) -> Self {
        LocalSeriesElement::one(self.field(), self.precision())
    }
    fn is_zero(&self) -> bool {
        LocalSeriesElement::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn minus(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn negate(&self) -> Self {
        self.neg()
    }
}

impl RingElement for FiniteFieldElement {
    fn zero_like(&self) -> Self {
        FiniteFieldElement::zero(self.field())
    }
    fn one_like(&self) -> Self {
        FiniteFieldElement::one(self.field())
    }
    fn is_zero(&self) -> bool {
        FiniteFieldElement::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn minus(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn negate(&self) -> Self {
        self.neg()
    }
}

impl RingElement for i64 {
    fn zero_like(&self) -> Self {
        0
    }
    fn one_like(&self) -> Self {
        1
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn plus(&self, o: &Self) -> Self {
        self.checked_add(*o).expect("integer overflow")
    }
    fn minus(&self, o: &Self) -> Self {
        self.checked_sub(*o).expect("integer overflow")
    }
    fn times(&self, o: &Self) -> Self {
        self.checked_mul(*o).expect("integer overflow")
    }
    fn negate(&self) -> Self {
        -*self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatrixError {
    #[error("shape mismatch: {0}x{1} vs {2}x{3}")]
    Shape(usize, usize, usize, usize),
    #[error("matrix rows have unequal lengths")]
    Ragged,
    #[error("empty matrix needs an explicit template element")]
    Empty,
}

/// Row-major rectangular matrix.
#[derive(Clone)]
pub struct RingMatrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
    template: R,
}

impl<R: RingElement> RingMatrix<R> {
    /// `template` fixes the ring (field, precision) for zero-sized shapes.
    pub fn zeros(rows: usize, cols: usize, template: &R) -> Self {
        let z = template.zero_like();
        Self { rows, cols, data: vec![z.clone(); rows * cols], template: z }
    }

    pub fn identity(n: usize, template: &R) -> Self {
        let mut m = Self::zeros(n, n, template);
        for i in 0..n {
            m.data[i * n + i] = template.one_like();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<R>>, template: &R) -> Result<Self, MatrixError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(MatrixError::Ragged);
        }
        Ok(Self { rows: r, cols: c, data: rows.into_iter().flatten().collect(), template: template.zero_like() })
    }

    pub fn from_fn(rows: usize, cols: usize, template: &R, mut f: impl FnMut(usize, usize) -> R) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data, template: template.zero_like() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn template(&self) -> &R {
        &self.template
    }
    pub fn get(&self, i: usize, j: usize) -> &R {
        &self.data[i * self.cols + j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.data[i * self.cols + j] = v;
    }
    pub fn row(&self, i: usize) -> &[R] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
    pub fn entries(&self) -> impl Iterator<Item = &R> {
        self.data.iter()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, &self.template, |i, j| self.get(j, i).clone())
    }

    pub fn map(&self, f: impl Fn(&R) -> R) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect(), template: self.template.clone() }
    }

    pub fn mul(&self, o: &Self) -> Result<Self, MatrixError> {
        if self.cols != o.rows {
            return Err(MatrixError::Shape(self.rows, self.cols, o.rows, o.cols));
        }
        let mut out = Self::zeros(self.rows, o.cols, &self.template);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * o.cols + j;
                    out.data[idx] = out.data[idx].plus(&a.times(b));
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, o: &Self) -> Result<Self, MatrixError> {
        self.zip(o, |a, b| a.plus(b))
    }
    pub fn sub(&self, o: &Self) -> Result<Self, MatrixError> {
        self.zip(o, |a, b| a.minus(b))
    }

    fn zip(&self, o: &Self, f: impl Fn(&R, &R) -> R) -> Result<Self, MatrixError> {
        if self.rows != o.rows || self.cols != o.cols {
            return Err(MatrixError::Shape(self.rows, self.cols, o.rows, o.cols));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| f(a, b)).collect(),
            template: self.template.clone(),
        })
    }

    pub fn scale(&self, c: &R) -> Self {
        self.map(|x| x.times(c))
    }

    /// Entrywise equality at working precision.
    pub fn same(&self, o: &Self) -> bool {
        self.rows == o.rows && self.cols == o.cols && self.data.iter().zip(&o.data).all(|(a, b)| a.same(b))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += c · row[src]
    pub fn add_row_multiple(&mut self, dst: usize, src: usize, c: &R) {
        if c.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let s = &self.data[src * self.cols + j];
            if s.is_zero() {
                continue;
            }
            let v = self.data[dst * self.cols + j].plus(&c.times(s));
            self.data[dst * self.cols + j] = v;
        }
    }

    /// col[dst] += c · col[src]
    pub fn add_col_multiple(&mut self, dst: usize, src: usize, c: &R) {
        if c.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let s = &self.data[i * self.cols + src];
            if s.is_zero() {
                continue;
            }
            let v = self.data[i * self.cols + dst].plus(&s.times(c));
            self.data[i * self.cols + dst] = v;
        }
    }

    pub fn scale_row(&mut self, i: usize, c: &R) {
        for j in 0..self.cols {
            let v = self.data[i * self.cols + j].times(c);
            self.data[i * self.cols + j] = v;
        }
    }

    pub fn scale_col(&mut self, j: usize, c: &R) {
        for i in 0..self.rows {
            let v = self.data[i * self.cols + j].times(c);
            self.data[i * self.cols + j] = v;
        }
    }
}

impl RingMatrix<LocalSeriesElement> {
    /// Minimum precision over all entries (the common precision).
    pub fn precision(&self) -> i64 {
        self.data.iter().map(|x| x.precision()).min().unwrap_or(self.template.precision())
    }

    /// Apply the coefficientwise Frobenius x ↦ x^(q^f) to every entry.
    pub fn frobenius(&self, f: u32) -> Self {
        self.map(|x| x.frobenius(f))
    }

    /// Determinant by elimination over the fraction field.
    pub fn determinant(&self) -> Option<LocalSeriesElement> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut det = self.template.one_like();
        for c in 0..n {
            let piv = (c..n)
                .filter(|&r| !m.get(r, c).is_zero())
                .min_by_key(|&r| m.get(r, c).valuation())?;
            if piv != c {
                m.swap_rows(piv, c);
                det = det.negate();
            }
            let p = m.get(c, c).clone();
            det = det.times(&p);
            let pinv = p.inverse()?;
            for r in c + 1..n {
                let e = m.get(r, c);
                if e.is_zero() {
                    continue;
                }
                let f = e.times(&pinv).negate();
                m.add_row_multiple(r, c, &f);
            }
        }
        Some(det)
    }
}

impl<R: fmt::Debug> fmt::Debug for RingMatrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}x{}]", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        Ok(())
    }
}

impl<R: RingElement> PartialEq for RingMatrix<R> {
    fn eq(&self, o: &Self) -> bool {
        self.same(o)
    }
}
