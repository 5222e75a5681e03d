//! Period lattices Λ_Z, Riemann forms E_μ, covolumes and polarization degrees.

use nalgebra::ComplexField;
use num_complex::Complex;

use crate::numeric::{condition_number_real, identity, lit, max_abs, realify, CMat, RMat};
use crate::symmetric_domains::{BoundedPoint, DomainPoint};
use crate::Real;

/// Lattices whose real basis matrix is worse conditioned than this are rejected.
pub const RANK_COND_LIMIT: f64 = 1e12;
/// Distance to the nearest integer accepted as "integral".
pub const INTEGRALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LatticeError {
    #[error("lattice is rank deficient (condition number {0:.3e})")]
    RankDeficient(f64),
    #[error("μ is singular")]
    SingularMu,
    #[error("no self-dual form in the family μ = −t·1: {0}")]
    NoSelfDualForm(String),
    #[error("the form is not integral on the lattice (max defect {0:.3e})")]
    NonIntegral(f64),
    #[error("domain point does not match the embedding: {0}")]
    DomainMismatch(String),
    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeKind {
    /// σ(β) is n×r; Z ∈ H_{r/2,r/2}.
    A,
    /// σ(β) is n×2r; Z ∈ Siegel space of size r.
    C,
}

/// How tr_{F/ℚ} is realised at the archimedean place.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMode {
    /// z ↦ z + z̄.
    TwiceReal,
    /// z ↦ Re z.
    Real,
}

impl LatticeKind {
    pub fn default_trace(self) -> TraceMode {
        match self {
            LatticeKind::A => TraceMode::TwiceReal,
            LatticeKind::C => TraceMode::Real,
        }
    }
}

/// σ on a ℤ-basis of O_B^{r/n}, with the algebra's structure constants.
#[derive(Debug, Clone)]
pub struct OrderEmbedding<T: Real = f64> {
    kind: LatticeKind,
    n: usize,
    r: usize,
    algebra: Vec<CMat<T>>,
    structure: Vec<Vec<Vec<i64>>>,
    sigma: Vec<CMat<T>>,
    labels: Vec<String>,
}

impl<T: Real> OrderEmbedding<T> {
    /// `algebra[a]` is σ of the a-th basis element of the order (n×n);
    /// `structure[a][b][k]` are the integer structure constants.
    pub fn new(
        kind: LatticeKind,
        n: usize,
        r: usize,
        algebra: Vec<CMat<T>>,
        structure: Vec<Vec<Vec<i64>>>,
        algebra_labels: Vec<String>,
    ) -> Result<Self, LatticeError> {
        let m = algebra.len();
        if n == 0 || r == 0 {
            return Err(LatticeError::InvalidEmbedding("n and r must be positive".into()));
        }
        let cols = match kind {
            LatticeKind::A => {
                if !r.is_multiple_of(2) {
                    return Err(LatticeError::InvalidEmbedding("type A needs even r".into()));
                }
                r
            }
            LatticeKind::C => 2 * r,
        };
        if cols % n != 0 {
            return Err(LatticeError::InvalidEmbedding(format!("n = {n} must divide {cols}")));
        }
        if algebra.iter().any(|s| s.nrows() != n || s.ncols() != n) {
            return Err(LatticeError::InvalidEmbedding("σ of algebra basis elements must be n×n".into()));
        }
        if structure.len() != m || structure.iter().any(|row| row.len() != m || row.iter().any(|c| c.len() != m)) {
            return Err(LatticeError::InvalidEmbedding("structure constants must be m×m×m".into()));
        }
        if algebra_labels.len() != m {
            return Err(LatticeError::InvalidEmbedding("one label per algebra basis element".into()));
        }
        // σ is multiplicative on the supplied table
        for a in 0..m {
            for b in 0..m {
                let lhs = &algebra[a] * &algebra[b];
                let mut rhs = CMat::<T>::zeros(n, n);
                for k in 0..m {
                    let c = structure[a][b][k];
                    if c != 0 {
                        rhs += &algebra[k] * Complex::new(lit::<T>(c as f64), T::zero());
                    }
                }
                let defect = max_abs(&(lhs - &rhs)) / (T::one() + max_abs(&rhs));
                if defect > lit(1e-9) {
                    return Err(LatticeError::InvalidEmbedding(format!(
                        "σ({}·{}) disagrees with the structure constants",
                        algebra_labels[a], algebra_labels[b]
                    )));
                }
            }
        }
        let copies = cols / n;
        let mut sigma = Vec::with_capacity(copies * m);
        let mut labels = Vec::with_capacity(copies * m);
        for c in 0..copies {
            for (a, s) in algebra.iter().enumerate() {
                let mut big = CMat::<T>::zeros(n, cols);
                big.view_mut((0, c * n), (n, n)).copy_from(s);
                sigma.push(big);
                labels.push(format!("{}[{}]", algebra_labels[a], c));
            }
        }
        if sigma.len() != 2 * n * r {
            return Err(LatticeError::InvalidEmbedding(format!(
                "lattice rank {} differs from 2nr = {}",
                sigma.len(),
                2 * n * r
            )));
        }
        let emb = Self { kind, n, r, algebra, structure, sigma, labels };
        // rational independence over ℝ of the σ-images
        let real = RMat::<T>::from_fn(2 * n * cols, emb.sigma.len(), |i, b| {
            let v: Vec<Complex<T>> = emb.sigma[b].transpose().iter().copied().collect();
            realify(&v)[i]
        });
        let sv = real.svd(false, false).singular_values;
        let max = sv.iter().copied().fold(T::zero(), |a, b| a.max(b));
        let min = sv.iter().copied().fold(max, |a, b| a.min(b));
        if min <= max * lit(1e-12) {
            return Err(LatticeError::RankDeficient(f64::INFINITY));
        }
        Ok(emb)
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn r(&self) -> usize {
        self.r
    }
    /// Complex dimension nr of the torus.
    pub fn dim(&self) -> usize {
        self.n * self.r
    }
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }
    pub fn sigma(&self) -> &[CMat<T>] {
        &self.sigma
    }
    pub fn labels(&self) -> &[String] {
        &self.labels
    }
    pub fn algebra(&self) -> &[CMat<T>] {
        &self.algebra
    }
    pub fn structure_constants(&self) -> &[Vec<Vec<i64>>] {
        &self.structure
    }
    /// Columns of σ(β): r (type A) or 2r (type C).
    pub fn sigma_cols(&self) -> usize {
        match self.kind {
            LatticeKind::A => self.r,
            LatticeKind::C => 2 * self.r,
        }
    }
    /// Size of the domain point Z.
    pub fn domain_size(&self) -> usize {
        match self.kind {
            LatticeKind::A => self.r / 2,
            LatticeKind::C => self.r,
        }
    }

    /// σ(Σ c_b β_b).
    pub fn sigma_of(&self, coeffs: &[T]) -> CMat<T> {
        let mut out = CMat::<T>::zeros(self.n, self.sigma_cols());
        for (c, s) in coeffs.iter().zip(&self.sigma) {
            out += s * Complex::new(*c, T::zero());
        }
        out
    }

    /// Lebesgue covolume of σ(O_B^{r/n}) in M_{n,r}(ℂ) (type A only).
    pub fn order_covolume(&self) -> T {
        let real = RMat::<T>::from_fn(2 * self.dim(), self.rank(), |i, b| {
            let v: Vec<Complex<T>> = self.sigma[b].transpose().iter().copied().collect();
            realify(&v)[i]
        });
        if real.is_square() {
            real.determinant().abs()
        } else {
            T::zero()
        }
    }

    /// F = ℚ(i), n = 1, type A: O_F^r with basis (e_k, i·e_k).
    pub fn gaussian(r: usize) -> Result<Self, LatticeError> {
        let one = CMat::<T>::from_element(1, 1, Complex::new(T::one(), T::zero()));
        let i = CMat::<T>::from_element(1, 1, Complex::new(T::zero(), T::one()));
        let structure = vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![-1, 0]]];
        Self::new(LatticeKind::A, 1, r, vec![one, i], structure, vec!["1".into(), "i".into()])
    }

    /// F = ℚ, n = 1, type C: ℤ^{2r}.
    pub fn siegel(r: usize) -> Result<Self, LatticeError> {
        let one = CMat::<T>::from_element(1, 1, Complex::new(T::one(), T::zero()));
        Self::new(LatticeKind::C, 1, r, vec![one], vec![vec![vec![1]]], vec!["1".into()])
    }

    /// (a, b)_ℚ ⊗ ℚ(i), n = 2, r = 2, order ℤ⟨I, J⟩ ⊗ ℤ[i];
    /// σ(I) = diag(√a, −√a), σ(J) = (0, b; 1, 0).
    pub fn quaternion_gaussian(a: i64, b: i64) -> Result<Self, LatticeError> {
        if a <= 0 {
            return Err(LatticeError::InvalidEmbedding("a must be positive for a real splitting".into()));
        }
        let c = |x: f64| Complex::new(lit::<T>(x), T::zero());
        let sa = (a as f64).sqrt();
        let one = identity::<T>(2);
        let ii = CMat::<T>::from_row_slice(2, 2, &[c(sa), c(0.0), c(0.0), c(-sa)]);
        let jj = CMat::<T>::from_row_slice(2, 2, &[c(0.0), c(b as f64), c(1.0), c(0.0)]);
        let kk = &ii * &jj;
        let quat = [one, ii, jj, kk];
        // quaternion table: (coefficient, index) of x_p x_q in {1, I, J, K}
        let qt = |p: usize, q: usize| -> (i64, usize) {
            match (p, q) {
                (0, x) | (x, 0) => (1, x),
                (1, 1) => (a, 0),
                (2, 2) => (b, 0),
                (3, 3) => (-a * b, 0),
                (1, 2) => (1, 3),
                (2, 1) => (-1, 3),
                (1, 3) => (a, 2),
                (3, 1) => (-a, 2),
                (2, 3) => (-b, 1),
                (3, 2) => (b, 1),
                _ => unreachable!(),
            }
        };
        // Gaussian table on {1, i}
        let gt = |s: usize, t: usize| -> (i64, usize) {
            match (s, t) {
                (0, x) | (x, 0) => (1, x),
                _ => (-1, 0),
            }
        };
        let mut algebra = Vec::new();
        let mut labels = Vec::new();
        let names = ["1", "I", "J", "IJ"];
        for (p, x) in quat.iter().enumerate() {
            for s in 0..2 {
                let scale = if s == 0 { Complex::new(T::one(), T::zero()) } else { Complex::new(T::zero(), T::one()) };
                algebra.push(x * scale);
                labels.push(if s == 0 { names[p].to_string() } else { format!("i{}", names[p]) });
            }
        }
        let m = 8;
        let mut structure = vec![vec![vec![0i64; m]; m]; m];
        for p in 0..4 {
            for s in 0..2 {
                for q in 0..4 {
                    for t in 0..2 {
                        let (c1, k1) = qt(p, q);
                        let (c2, k2) = gt(s, t);
                        structure[2 * p + s][2 * q + t][2 * k1 + k2] += c1 * c2;
                    }
                }
            }
        }
        Self::new(LatticeKind::A, 2, 2, algebra, structure, labels)
    }
}

/// λ_β(Z) as an n×r matrix.
pub fn lambda<T: Real>(kind: LatticeKind, z: &CMat<T>, sigma: &CMat<T>) -> CMat<T> {
    match kind {
        LatticeKind::A => {
            let h = z.nrows();
            let top = stack(z, &identity::<T>(h));
            let bottom = stack(&z.transpose(), &identity::<T>(h));
            let left = sigma * top;
            let right = sigma.map(|w| w.conj()) * bottom;
            hcat(&left, &right)
        }
        LatticeKind::C => {
            let r = z.nrows();
            sigma * stack(z, &identity::<T>(r))
        }
    }
}

/// (σ[U; 1_q], σ̄[1_p; Uᵗ]) for U ∈ M_{p,q}.
pub fn lambda_bounded<T: Real>(u: &CMat<T>, sigma: &CMat<T>) -> CMat<T> {
    let (p, q) = (u.nrows(), u.ncols());
    let left = sigma * stack(u, &identity::<T>(q));
    let right = sigma.map(|w| w.conj()) * stack(&identity::<T>(p), &u.transpose());
    hcat(&left, &right)
}

fn stack<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    let mut out = CMat::<T>::zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((a.nrows(), 0), (b.nrows(), b.ncols())).copy_from(b);
    out
}

fn hcat<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    let mut out = CMat::<T>::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((0, a.ncols()), (b.nrows(), b.ncols())).copy_from(b);
    out
}

/// Row-major flattening of an n×r matrix into ℂ^{nr}.
pub fn flatten<T: Real>(m: &CMat<T>) -> Vec<Complex<T>> {
    m.transpose().iter().copied().collect()
}

/// 2N×2N real matrix whose columns are realified vectors.
fn real_basis<T: Real>(vectors: &[Vec<Complex<T>>]) -> RMat<T> {
    let dim = vectors.first().map_or(0, |v| 2 * v.len());
    RMat::<T>::from_fn(dim, vectors.len(), |i, b| realify(&vectors[b])[i])
}

/// The lattice Λ_Z ⊂ ℂ^{nr} with its real basis matrix.
#[derive(Debug, Clone)]
pub struct PeriodLattice<T: Real = f64> {
    kind: LatticeKind,
    n: usize,
    r: usize,
    point: CMat<T>,
    vectors: Vec<Vec<Complex<T>>>,
    basis: RMat<T>,
    basis_inv: RMat<T>,
}

impl<T: Real> PeriodLattice<T> {
    fn from_vectors(kind: LatticeKind, n: usize, r: usize, point: CMat<T>, vectors: Vec<Vec<Complex<T>>>) -> Result<Self, LatticeError> {
        let basis = real_basis(&vectors);
        if !basis.is_square() {
            return Err(LatticeError::RankDeficient(f64::INFINITY));
        }
        let cond = condition_number_real(&basis);
        if cond > lit(RANK_COND_LIMIT) {
            return Err(LatticeError::RankDeficient(cond.to_subset().unwrap_or(f64::INFINITY)));
        }
        let basis_inv = basis.clone().try_inverse().ok_or(LatticeError::RankDeficient(f64::INFINITY))?;
        Ok(Self { kind, n, r, point, vectors, basis, basis_inv })
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn r(&self) -> usize {
        self.r
    }
    pub fn dim(&self) -> usize {
        self.n * self.r
    }
    pub fn point(&self) -> &CMat<T> {
        &self.point
    }
    pub fn vectors(&self) -> &[Vec<Complex<T>>] {
        &self.vectors
    }
    /// Columns are the realified lattice vectors.
    pub fn basis(&self) -> &RMat<T> {
        &self.basis
    }
    pub fn basis_inverse(&self) -> &RMat<T> {
        &self.basis_inv
    }
    /// Real Gram determinant of the basis.
    pub fn gram_determinant(&self) -> T {
        (self.basis.transpose() * &self.basis).determinant()
    }
    /// cΛ for real c > 0.
    pub fn scaled(&self, c: T) -> Result<Self, LatticeError> {
        let vectors = self.vectors.iter().map(|v| v.iter().map(|z| z * c).collect()).collect();
        Self::from_vectors(self.kind, self.n, self.r, self.point.clone(), vectors)
    }

    /// Lattice coordinates of a vector of ℂ^{nr}.
    pub fn coordinates(&self, v: &[Complex<T>]) -> Vec<T> {
        let x = RMat::<T>::from_column_slice(2 * v.len(), 1, &realify(v));
        (&self.basis_inv * x).iter().copied().collect()
    }
}

/// Λ_Z for Z in the domain attached to the embedding.
pub fn build_lattice<T: Real>(z: &DomainPoint<T>, emb: &OrderEmbedding<T>) -> Result<PeriodLattice<T>, LatticeError> {
    let m = match (emb.kind, z) {
        (LatticeKind::A, DomainPoint::Hermitian(p)) => p.matrix(),
        (LatticeKind::C, DomainPoint::Siegel(p)) => p.matrix(),
        _ => return Err(LatticeError::DomainMismatch("type A needs a Hermitian point, type C a Siegel point".into())),
    };
    if m.nrows() != emb.domain_size() {
        return Err(LatticeError::DomainMismatch(format!("expected a {0}×{0} point", emb.domain_size())));
    }
    let vectors = emb.sigma.iter().map(|s| flatten(&lambda(emb.kind, m, s))).collect();
    PeriodLattice::from_vectors(emb.kind, emb.n, emb.r, m.clone(), vectors)
}

/// Λ_U in the bounded realization, U ∈ M_{p,q} with p + q = r.
pub fn build_lattice_bounded<T: Real>(u: &BoundedPoint<T>, emb: &OrderEmbedding<T>) -> Result<PeriodLattice<T>, LatticeError> {
    if emb.kind != LatticeKind::A {
        return Err(LatticeError::DomainMismatch("the bounded realization is for type A".into()));
    }
    let (p, q) = u.shape();
    if p + q != emb.r {
        return Err(LatticeError::DomainMismatch(format!("U is {p}×{q} but r = {}", emb.r)));
    }
    let vectors = emb.sigma.iter().map(|s| flatten(&lambda_bounded(u.matrix(), s))).collect();
    PeriodLattice::from_vectors(emb.kind, emb.n, emb.r, u.matrix().clone(), vectors)
}

/// μ together with the trace realisation and the fixed J.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannFormDescriptor<T: Real = f64> {
    pub mu: CMat<T>,
    pub trace: TraceMode,
}

impl<T: Real> RiemannFormDescriptor<T> {
    pub fn new(mu: CMat<T>, trace: TraceMode) -> Self {
        Self { mu, trace }
    }
    /// μ = c·1_n.
    pub fn scalar(n: usize, c: f64, trace: TraceMode) -> Self {
        Self { mu: identity::<T>(n) * Complex::new(lit::<T>(c), T::zero()), trace }
    }
    pub fn det_mu(&self) -> Complex<T> {
        self.mu.determinant()
    }
}

fn block_j<T: Real>(cols: usize) -> CMat<T> {
    // (0, −1; 1, 0)
    let h = cols / 2;
    let mut j = CMat::<T>::zeros(cols, cols);
    for k in 0..h {
        j[(k, h + k)] = Complex::new(-T::one(), T::zero());
        j[(h + k, k)] = Complex::new(T::one(), T::zero());
    }
    j
}

/// Gram matrix E(β_a, β_b) = tr(μ⁻¹ σ(β_a) J σ̄(β_b)ᵗ) on the order basis.
pub fn riemann_gram<T: Real>(emb: &OrderEmbedding<T>, d: &RiemannFormDescriptor<T>) -> Result<RMat<T>, LatticeError> {
    if d.mu.nrows() != emb.n || d.mu.ncols() != emb.n {
        return Err(LatticeError::InvalidEmbedding("μ must be n×n".into()));
    }
    let mu_inv = d.mu.clone().try_inverse().ok_or(LatticeError::SingularMu)?;
    if !mu_inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(LatticeError::SingularMu);
    }
    let j = block_j::<T>(emb.sigma_cols());
    let left: Vec<CMat<T>> = emb.sigma.iter().map(|s| &mu_inv * s * &j).collect();
    let right: Vec<CMat<T>> = emb.sigma.iter().map(|s| s.adjoint()).collect();
    let k = emb.rank();
    Ok(RMat::<T>::from_fn(k, k, |a, b| {
        let z = (&left[a] * &right[b]).trace();
        match d.trace {
            TraceMode::TwiceReal => z.re * lit(2.0),
            TraceMode::Real => z.re,
        }
    }))
}

/// tr(μ⁻¹ W J σ̄(β)ᵗ) for an arbitrary n×cols matrix W, ℂ-linear in W and before
/// the trace realisation.
pub fn trace_pairing<T: Real>(mu: &CMat<T>, w: &CMat<T>, sigma: &CMat<T>) -> Result<Complex<T>, LatticeError> {
    let mu_inv = mu.clone().try_inverse().ok_or(LatticeError::SingularMu)?;
    Ok((mu_inv * w * block_j::<T>(w.ncols()) * sigma.adjoint()).trace())
}

/// z ↦ z + z̄ or z ↦ Re z.
pub fn realize_trace<T: Real>(mode: TraceMode, z: Complex<T>) -> T {
    match mode {
        TraceMode::TwiceReal => z.re + z.re,
        TraceMode::Real => z.re,
    }
}

/// E(β, β') for lattice coordinate vectors.
pub fn riemann_form<T: Real>(
    emb: &OrderEmbedding<T>,
    d: &RiemannFormDescriptor<T>,
    beta: &[T],
    beta2: &[T],
) -> Result<T, LatticeError> {
    let g = riemann_gram(emb, d)?;
    let x = RMat::<T>::from_column_slice(beta.len(), 1, beta);
    let y = RMat::<T>::from_column_slice(beta2.len(), 1, beta2);
    Ok((x.transpose() * g * y)[(0, 0)])
}

/// E on ℂ^{nr} in real coordinates (Re z, Im z): P⁻ᵀ G P⁻¹.
pub fn riemann_form_real<T: Real>(l: &PeriodLattice<T>, g: &RMat<T>) -> RMat<T> {
    l.basis_inv.transpose() * g * &l.basis_inv
}

/// Multiplication by i on (Re z, Im z).
pub fn multiplication_by_i<T: Real>(dim: usize) -> RMat<T> {
    let mut m = RMat::<T>::zeros(2 * dim, 2 * dim);
    for k in 0..dim {
        m[(dim + k, k)] = T::one();
        m[(k, dim + k)] = -T::one();
    }
    m
}

/// Complex structure of ℂ^{nr} written in lattice coordinates.
pub fn complex_structure<T: Real>(l: &PeriodLattice<T>) -> RMat<T> {
    &l.basis_inv * multiplication_by_i::<T>(l.dim()) * &l.basis
}

/// Positivity data for H(x, y) = E(ix, y) + iE(x, y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianCheck<T: Real = f64> {
    /// Smallest eigenvalue of x ↦ E(ix, x).
    pub min_eigenvalue: T,
    /// max |E(ix, iy) − E(x, y)| relative; zero iff H is Hermitian.
    pub hermitian_defect: T,
}

impl<T: Real> HermitianCheck<T> {
    pub fn is_positive(&self) -> bool {
        self.min_eigenvalue > T::zero() && self.hermitian_defect < lit(1e-9)
    }
}

pub fn hermitian_check<T: Real>(l: &PeriodLattice<T>, d: &RiemannFormDescriptor<T>, emb: &OrderEmbedding<T>) -> Result<HermitianCheck<T>, LatticeError> {
    let g = riemann_gram(emb, d)?;
    let e = riemann_form_real(l, &g);
    let ji = multiplication_by_i::<T>(l.dim());
    let s = ji.transpose() * &e;
    let sym = (&s + s.transpose()) * lit::<T>(0.5);
    let ev = sym.clone().symmetric_eigen().eigenvalues;
    let min = ev.iter().copied().fold(T::max_value().unwrap_or_else(|| lit(f64::MAX)), |a, b| a.min(b));
    let rot = ji.transpose() * &e * &ji;
    let scale = T::one() + e.iter().fold(T::zero(), |a, x| a.max(x.abs()));
    let defect = (rot - &e).iter().fold(T::zero(), |a, x| a.max(x.abs())) / scale;
    Ok(HermitianCheck { min_eigenvalue: min, hermitian_defect: defect })
}

/// The matrix H_{ab} = H(e_a, e_b) on the standard basis of ℂ^{nr}.
pub fn hermitian_matrix<T: Real>(l: &PeriodLattice<T>, d: &RiemannFormDescriptor<T>, emb: &OrderEmbedding<T>) -> Result<CMat<T>, LatticeError> {
    let g = riemann_gram(emb, d)?;
    let e = riemann_form_real(l, &g);
    let n = l.dim();
    let ev = |x: usize, y: usize| e[(x, y)];
    // real basis: e_a at index a, i·e_a at index n + a
    Ok(CMat::<T>::from_fn(n, n, |a, b| Complex::new(ev(n + a, b), ev(a, b))))
}

fn integrality_defect<T: Real>(g: &RMat<T>) -> T {
    g.iter().fold(T::zero(), |acc, x| acc.max((*x - x.round()).abs()))
}

/// How μ is normalised.
#[derive(Debug, Clone)]
pub struct SelfDualSolution<T: Real = f64> {
    pub descriptor: RiemannFormDescriptor<T>,
    /// μ = −t·1.
    pub t: T,
    pub integrality_defect: T,
    /// |det μ|^r.
    pub det_mu_power: T,
    /// Lebesgue covolume of σ(O_B^{r/n}).
    pub order_covolume: T,
}

/// μ = −t·1 with t = |det G₁|^{1/(2nr)} so that det Gram(E_μ) = ±1; requires
/// E_μ integral, otherwise `NoSelfDualForm`.
pub fn solve_self_dual_mu<T: Real>(emb: &OrderEmbedding<T>) -> Result<SelfDualSolution<T>, LatticeError> {
    let sol = unit_covolume_mu(emb)?;
    if sol.integrality_defect > lit(INTEGRALITY_TOL) {
        return Err(LatticeError::NoSelfDualForm(format!(
            "scaling by t = {:.6} leaves an integrality defect {:.3e}",
            sol.t.to_subset().unwrap_or(f64::NAN),
            sol.integrality_defect.to_subset().unwrap_or(f64::NAN)
        )));
    }
    Ok(sol)
}

/// The same normalisation without the integrality requirement.
pub fn unit_covolume_mu<T: Real>(emb: &OrderEmbedding<T>) -> Result<SelfDualSolution<T>, LatticeError> {
    let trace = emb.kind.default_trace();
    let base = RiemannFormDescriptor::<T>::scalar(emb.n, 1.0, trace);
    let g1 = riemann_gram(emb, &base)?;
    let det = g1.determinant().abs();
    if det <= T::zero() {
        return Err(LatticeError::NoSelfDualForm("the trace form is degenerate".into()));
    }
    let t = det.powf(T::one() / lit((2 * emb.dim()) as f64));
    let descriptor = RiemannFormDescriptor::<T>::scalar(emb.n, 1.0, trace);
    let descriptor = RiemannFormDescriptor { mu: descriptor.mu * Complex::new(-t, T::zero()), trace };
    let g = riemann_gram(emb, &descriptor)?;
    let det_mu_power = descriptor.det_mu().modulus().powi(emb.r as i32);
    Ok(SelfDualSolution {
        t,
        integrality_defect: integrality_defect(&g),
        det_mu_power,
        order_covolume: emb.order_covolume(),
        descriptor,
    })
}

/// |det P|: Lebesgue covolume of ℂ^{nr}/Λ.
pub fn covolume<T: Real>(l: &PeriodLattice<T>) -> T {
    l.basis.determinant().abs()
}

/// ‖∧dz‖_Fal = (covolume / π^{nr})^{1/2}.
pub fn faltings_norm<T: Real>(l: &PeriodLattice<T>) -> T {
    (covolume(l) / T::pi().powi(l.dim() as i32)).sqrt()
}

/// [Λ^∨ : Λ] = |det Gram(E)|^{1/2}; the form must be integral.
pub fn polarization_degree<T: Real>(emb: &OrderEmbedding<T>, d: &RiemannFormDescriptor<T>) -> Result<T, LatticeError> {
    let g = riemann_gram(emb, d)?;
    let defect = integrality_defect(&g);
    if defect > lit(INTEGRALITY_TOL) {
        return Err(LatticeError::NonIntegral(defect.to_subset().unwrap_or(f64::NAN)));
    }
    Ok(g.map(|x| x.round()).determinant().abs().sqrt())
}

/// E-dual lattice {x : E(x, Λ) ⊂ ℤ}, basis P·G⁻ᵀ.
pub fn dual_lattice<T: Real>(l: &PeriodLattice<T>, emb: &OrderEmbedding<T>, d: &RiemannFormDescriptor<T>) -> Result<PeriodLattice<T>, LatticeError> {
    let g = riemann_gram(emb, d)?;
    let git = g.transpose().try_inverse().ok_or(LatticeError::RankDeficient(f64::INFINITY))?;
    let dual = &l.basis * git;
    let n = l.dim();
    let vectors: Vec<Vec<Complex<T>>> =
        (0..dual.ncols()).map(|b| (0..n).map(|k| Complex::new(dual[(k, b)], dual[(n + k, b)])).collect()).collect();
    PeriodLattice::from_vectors(l.kind, l.n, l.r, l.point.clone(), vectors)
}

/// Symmetric form x ↦ E(ix, x) on (Re z, Im z), the metric Re H of the polarization.
pub fn polarization_metric<T: Real>(
    l: &PeriodLattice<T>,
    emb: &OrderEmbedding<T>,
    d: &RiemannFormDescriptor<T>,
) -> Result<RMat<T>, LatticeError> {
    let g = riemann_gram(emb, d)?;
    let e = riemann_form_real(l, &g);
    let s = multiplication_by_i::<T>(l.dim()).transpose() * e;
    Ok((&s + s.transpose()) * lit::<T>(0.5))
}

/// Covolume of a lattice in a metric given on (Re z, Im z).
pub fn covolume_in_metric<T: Real>(l: &PeriodLattice<T>, metric: &RMat<T>) -> T {
    (l.basis.transpose() * metric * &l.basis).determinant().abs().sqrt()
}

/// Realification of a complex-linear map of ℂ^N.
pub fn realify_map<T: Real>(a: &CMat<T>) -> RMat<T> {
    let n = a.nrows();
    RMat::<T>::from_fn(2 * n, 2 * n, |i, j| {
        let z = a[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// A(Λ₁) relative to Λ₂: the matrix of A in lattice coordinates.
#[derive(Debug, Clone)]
pub struct Commensurability<T: Real = f64> {
    pub matrix: RMat<T>,
    /// Distance of the matrix from an integer matrix.
    pub integrality_defect: T,
    /// |det|, the index [Λ₂ : A Λ₁] when integral.
    pub index: T,
}

pub fn commensurability<T: Real>(l1: &PeriodLattice<T>, l2: &PeriodLattice<T>, a: &CMat<T>) -> Commensurability<T> {
    let m = &l2.basis_inv * realify_map(a) * &l1.basis;
    let defect = integrality_defect(&m);
    let index = m.determinant().abs();
    Commensurability { matrix: m, integrality_defect: defect, index }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetric_domains::{HermitianPoint, SiegelPoint};

    #[test]
    fn elliptic_covolume_is_im_tau() {
        let emb = OrderEmbedding::<f64>::siegel(1).unwrap();
        let tau = CMat::<f64>::from_element(1, 1, Complex::new(0.3, 1.7));
        let l = build_lattice(&DomainPoint::Siegel(SiegelPoint::new(tau).unwrap()), &emb).unwrap();
        assert!((covolume(&l) - 1.7).abs() < 1e-12);
    }

    #[test]
    fn gaussian_self_dual_mu_is_minus_two() {
        let emb = OrderEmbedding::<f64>::gaussian(2).unwrap();
        let sol = solve_self_dual_mu(&emb).unwrap();
        assert!((sol.t - 2.0).abs() < 1e-12);
        let z = HermitianPoint::<f64>::i_identity(1);
        let l = build_lattice(&DomainPoint::Hermitian(z), &emb).unwrap();
        assert!(hermitian_check(&l, &sol.descriptor, &emb).unwrap().is_positive());
    }

    #[test]
    fn quaternion_structure_constants_are_consistent() {
        assert!(OrderEmbedding::<f64>::quaternion_gaussian(5, 13).is_ok());
    }
}
