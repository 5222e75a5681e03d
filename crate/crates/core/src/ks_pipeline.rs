//! Cocycle Jacobian of the period map, the semilinear w-solve, the connecting map φ,
//! the ψ constant and the Faltings/Petersson comparison.

use nalgebra::ComplexField;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::abelian_lattice::{
    build_lattice, covolume, flatten, lambda, riemann_gram, LatticeError, LatticeKind, OrderEmbedding, PeriodLattice,
    RiemannFormDescriptor,
};
use crate::numeric::{ci, condition_number_real, lit, CMat, RMat};
use crate::symmetric_domains::{petersson_norm, random_hermitian_point, random_siegel_point, DomainPoint, PeterssonType};
use crate::Real;

/// w-solves worse conditioned than this raise `SingularPairing`.
pub const PAIRING_COND_LIMIT: f64 = 1e10;
pub const DEFAULT_SAMPLES: usize = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("the pairing solve is ill-conditioned (condition number {condition:.3e} > {limit:.1e})")]
    SingularPairing { condition: f64, limit: f64 },
    #[error("type A needs signature (r/2, r/2); got ({p}, {q})")]
    SignatureMismatch { p: usize, q: usize },
    #[error("target functional has {got} values, the lattice has {expected} generators")]
    Length { expected: usize, got: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Coordinates Z_{kl} of the domain: all (k, l) for type A, k ≤ l for type C.
pub fn domain_coordinates(kind: LatticeKind, r: usize) -> Vec<(usize, usize)> {
    match kind {
        LatticeKind::A => {
            let h = r / 2;
            (0..h).flat_map(|k| (0..h).map(move |l| (k, l))).collect()
        }
        LatticeKind::C => (0..r).flat_map(|k| (k..r).map(move |l| (k, l))).collect(),
    }
}

/// ∂λ_β/∂Z_c: an (nr) × (#coordinates) complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CocycleJacobian<T: Real = f64> {
    pub coordinates: Vec<(usize, usize)>,
    pub matrix: CMat<T>,
}

/// Closed-form partials: Z_{kl} contributes σ_{ik} at (i, l) and σ̄_{il} at (i, h + k)
/// for type A; type C moves Z_{kl} and Z_{lk} together.
pub fn cocycle_jacobian<T: Real>(emb: &OrderEmbedding<T>, sigma: &CMat<T>) -> CocycleJacobian<T> {
    let (n, r) = (emb.n(), emb.r());
    let coords = domain_coordinates(emb.kind(), r);
    let mut m = CMat::<T>::zeros(n * r, coords.len());
    for (c, &(k, l)) in coords.iter().enumerate() {
        for i in 0..n {
            match emb.kind() {
                LatticeKind::A => {
                    let h = r / 2;
                    m[(i * r + l, c)] += sigma[(i, k)];
                    m[(i * r + h + k, c)] += sigma[(i, l)].conj();
                }
                LatticeKind::C => {
                    m[(i * r + l, c)] += sigma[(i, k)];
                    if k != l {
                        m[(i * r + k, c)] += sigma[(i, l)];
                    }
                }
            }
        }
    }
    CocycleJacobian { coordinates: coords, matrix: m }
}

/// Central differences of Z ↦ λ_β(Z) with step h along each coordinate.
pub fn cocycle_jacobian_fd<T: Real>(emb: &OrderEmbedding<T>, z: &CMat<T>, sigma: &CMat<T>, h: T) -> CocycleJacobian<T> {
    let coords = domain_coordinates(emb.kind(), emb.r());
    let mut m = CMat::<T>::zeros(emb.dim(), coords.len());
    for (c, &(k, l)) in coords.iter().enumerate() {
        let mut dz = CMat::<T>::zeros(z.nrows(), z.ncols());
        dz[(k, l)] = Complex::new(h, T::zero());
        if emb.kind() == LatticeKind::C {
            dz[(l, k)] = Complex::new(h, T::zero());
        }
        let plus = flatten(&lambda(emb.kind(), &(z + &dz), sigma));
        let minus = flatten(&lambda(emb.kind(), &(z - &dz), sigma));
        for a in 0..emb.dim() {
            m[(a, c)] = (plus[a] - minus[a]) / (h + h);
        }
    }
    CocycleJacobian { coordinates: coords, matrix: m }
}

/// Antilinear coefficient vector b with ℓ(v) = a·v + b·v̄, from the functional in
/// real coordinates x = (Re v, Im v).
fn antilinear_part<T: Real>(f: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = f.len() / 2;
    let half = lit::<T>(0.5);
    (0..n).map(|k| (f[k] + ci::<T>() * f[n + k]) * half).collect()
}

/// The unique w with antilinear part of 2πi·E(w, ·) equal to that of the real-linear
/// functional taking the value `values[b]` on the b-th lattice generator.
pub fn solve_w<T: Real>(
    l: &PeriodLattice<T>,
    gram: &RMat<T>,
    values: &[Complex<T>],
) -> Result<Vec<Complex<T>>, PipelineError> {
    let n = l.dim();
    if values.len() != 2 * n {
        return Err(PipelineError::Length { expected: 2 * n, got: values.len() });
    }
    let pinv = l.basis_inverse();
    let f: Vec<Complex<T>> = (0..2 * n)
        .map(|x| (0..2 * n).fold(Complex::new(T::zero(), T::zero()), |acc, b| acc + values[b] * pinv[(b, x)]))
        .collect();
    let target = antilinear_part(&f);
    // E in real coordinates; w ↦ antilinear part of 2πi E(w, ·) is ℝ-linear in w
    let e = pinv.transpose() * gram * pinv;
    let two_pi_i = ci::<T>() * (T::two_pi());
    let mut a = RMat::<T>::zeros(2 * n, 2 * n);
    for col in 0..2 * n {
        let row: Vec<Complex<T>> = (0..2 * n).map(|x| two_pi_i * e[(col, x)]).collect();
        let b = antilinear_part(&row);
        for k in 0..n {
            a[(k, col)] = b[k].re;
            a[(n + k, col)] = b[k].im;
        }
    }
    let cond = condition_number_real(&a);
    if cond.partial_cmp(&lit(PAIRING_COND_LIMIT)) != Some(std::cmp::Ordering::Less) {
        return Err(PipelineError::SingularPairing {
            condition: cond.to_subset().unwrap_or(f64::INFINITY),
            limit: PAIRING_COND_LIMIT,
        });
    }
    let rhs = RMat::<T>::from_fn(2 * n, 1, |i, _| if i < n { target[i].re } else { target[i - n].im });
    let x = a.lu().solve(&rhs).ok_or(PipelineError::SingularPairing { condition: f64::INFINITY, limit: PAIRING_COND_LIMIT })?;
    Ok((0..n).map(|k| Complex::new(x[(k, 0)], x[(n + k, 0)])).collect())
}

/// w attached to the coordinate functional z ↦ z_{ik} or its conjugate.
#[derive(Debug, Clone, PartialEq)]
pub struct WVector<T: Real = f64> {
    pub i: usize,
    pub k: usize,
    pub conjugate: bool,
    pub w: Vec<Complex<T>>,
}

/// w_{ik} for every coordinate functional δ_{ik} and δ̄_{ik} on ℂ^{nr}.
pub fn solve_w_vectors<T: Real>(
    l: &PeriodLattice<T>,
    emb: &OrderEmbedding<T>,
    d: &RiemannFormDescriptor<T>,
) -> Result<Vec<WVector<T>>, PipelineError> {
    let gram = riemann_gram(emb, d)?;
    let (n, r) = (l.n(), l.r());
    let mut out = Vec::with_capacity(2 * n * r);
    for conjugate in [false, true] {
        for i in 0..n {
            for k in 0..r {
                let values: Vec<Complex<T>> = l
                    .vectors()
                    .iter()
                    .map(|v| if conjugate { v[i * r + k].conj() } else { v[i * r + k] })
                    .collect();
                out.push(WVector { i, k, conjugate, w: solve_w(l, &gram, &values)? });
            }
        }
    }
    Ok(out)
}

/// φ(dz_src) = Σ data[src][lie][c] ∂/∂z_lie ⊗ dZ_c.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectingMatrix<T: Real = f64> {
    pub kind: LatticeKind,
    pub n: usize,
    pub r: usize,
    pub coordinates: Vec<(usize, usize)>,
    pub data: Vec<Vec<Vec<Complex<T>>>>,
}

impl<T: Real> ConnectingMatrix<T> {
    pub fn entry(&self, src: usize, lie: usize, coord: usize) -> Complex<T> {
        self.data[src][lie][coord]
    }

    /// Largest entrywise difference.
    pub fn max_difference(&self, other: &Self) -> T {
        let mut m = T::zero();
        for (a, b) in self.data.iter().flatten().flatten().zip(other.data.iter().flatten().flatten()) {
            m = m.max((*a - *b).modulus());
        }
        m
    }
}

/// φ from the cocycle Jacobians and the w-solve.
pub fn assemble_phi<T: Real>(
    l: &PeriodLattice<T>,
    emb: &OrderEmbedding<T>,
    d: &RiemannFormDescriptor<T>,
) -> Result<ConnectingMatrix<T>, PipelineError> {
    let gram = riemann_gram(emb, d)?;
    let jac: Vec<CocycleJacobian<T>> = emb.sigma().iter().map(|s| cocycle_jacobian(emb, s)).collect();
    let coordinates = domain_coordinates(emb.kind(), emb.r());
    let dim = emb.dim();
    let zero = Complex::new(T::zero(), T::zero());
    let mut data = vec![vec![vec![zero; coordinates.len()]; dim]; dim];
    #[allow(clippy::needless_range_loop)]
    for src in 0..dim {
        for c in 0..coordinates.len() {
            let values: Vec<Complex<T>> = jac.iter().map(|j| j.matrix[(src, c)]).collect();
            let w = solve_w(l, &gram, &values)?;
            for (lie, x) in w.into_iter().enumerate() {
                data[src][lie][c] = x;
            }
        }
    }
    Ok(ConnectingMatrix { kind: emb.kind(), n: emb.n(), r: emb.r(), coordinates, data })
}

/// c with ψ((∧dz)^{⊗k}) = c·dτ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiConstant<T: Real = f64> {
    pub value: Complex<T>,
    /// k = r/2 (type A) or r + 1 (type C).
    pub weight: usize,
}

impl<T: Real> PsiConstant<T> {
    pub fn modulus(&self) -> T {
        self.value.modulus()
    }
}

/// Contraction of φ into a determinant.
///
/// Type C: det over symmetric pairs (a ≤ b) × coordinates of φ[a][b][c].
/// Type A: Π over coordinates (k, j) of det_{i,l} φ[i·r + j][l·r + k + h][(k, j)].
pub fn psi_constant<T: Real>(phi: &ConnectingMatrix<T>, signature: (usize, usize)) -> Result<PsiConstant<T>, PipelineError> {
    let (n, r) = (phi.n, phi.r);
    match phi.kind {
        LatticeKind::C => {
            let pairs: Vec<(usize, usize)> = (0..r).flat_map(|a| (a..r).map(move |b| (a, b))).collect();
            let m = CMat::<T>::from_fn(pairs.len(), phi.coordinates.len(), |p, c| phi.data[pairs[p].0][pairs[p].1][c]);
            Ok(PsiConstant { value: m.determinant(), weight: r + 1 })
        }
        LatticeKind::A => {
            let (p, q) = signature;
            if p != q || p + q != r {
                return Err(PipelineError::SignatureMismatch { p, q });
            }
            let h = r / 2;
            let mut value = Complex::new(T::one(), T::zero());
            for (c, &(k, j)) in phi.coordinates.iter().enumerate() {
                let b = CMat::<T>::from_fn(n, n, |i, l| phi.data[i * r + j][l * r + k + h][c]);
                value *= b.determinant();
            }
            Ok(PsiConstant { value, weight: h })
        }
    }
}

/// (|det μ|/(2π)^n)^{r²/4} for type A, (2π)^{−r(r+1)/2} for type C.
pub fn predicted_psi_modulus<T: Real>(kind: LatticeKind, n: usize, r: usize, d: &RiemannFormDescriptor<T>) -> T {
    let rf = r as f64;
    match kind {
        LatticeKind::A => (d.det_mu().modulus() / T::two_pi().powi(n as i32)).powf(lit(rf * rf / 4.0)),
        LatticeKind::C => T::two_pi().powf(lit(-rf * (rf + 1.0) / 2.0)),
    }
}

/// Per-sample comparison of |c|·‖dτ‖_Pet with ‖(∧dz)^{⊗k}‖_Fal.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSample<T: Real = f64> {
    pub point: CMat<T>,
    pub psi: Complex<T>,
    pub faltings: T,
    pub petersson: T,
    pub ratio: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport<T: Real = f64> {
    pub seed: u64,
    pub samples: Vec<MetricSample<T>>,
    /// max |ratio − 1|.
    pub max_deviation: T,
    /// max |c(Z) − c(Z₀)| over the samples.
    pub psi_spread: T,
}

/// One sample of the identity at a given domain point.
pub fn metric_sample<T: Real>(
    emb: &OrderEmbedding<T>,
    d: &RiemannFormDescriptor<T>,
    z: &DomainPoint<T>,
) -> Result<MetricSample<T>, PipelineError> {
    let l = build_lattice(z, emb)?;
    let phi = assemble_phi(&l, emb, d)?;
    let h = emb.r() / 2;
    let psi = psi_constant(&phi, (h, emb.r() - h))?;
    let n = emb.n();
    let (kind, point) = match z {
        DomainPoint::Siegel(p) => (PeterssonType::C, p.matrix().clone()),
        DomainPoint::Hermitian(p) => (PeterssonType::A, p.matrix().clone()),
        DomainPoint::Bounded(_) => unreachable!("build_lattice rejects bounded points"),
    };
    let points = vec![point.clone(); n];
    let petersson = petersson_norm(kind, &points, emb.r()).map_err(|e| LatticeError::DomainMismatch(e.to_string()))?;
    let faltings = (covolume(&l) / T::pi().powi(emb.dim() as i32)).powf(lit(psi.weight as f64 / 2.0));
    let ratio = psi.modulus() * petersson / faltings;
    Ok(MetricSample { point, psi: psi.value, faltings, petersson, ratio })
}

/// Draws `samples` points from a ChaCha8 stream seeded with `seed`.
pub fn metric_identity_check<T: Real>(
    emb: &OrderEmbedding<T>,
    d: &RiemannFormDescriptor<T>,
    samples: usize,
    seed: u64,
) -> Result<MetricReport<T>, PipelineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = emb.domain_size();
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let z = match emb.kind() {
            LatticeKind::A => DomainPoint::Hermitian(random_hermitian_point::<T, _>(size, &mut rng)),
            LatticeKind::C => DomainPoint::Siegel(random_siegel_point::<T, _>(size, &mut rng)),
        };
        out.push(metric_sample(emb, d, &z)?);
    }
    let max_deviation = out.iter().fold(T::zero(), |m, s| m.max((s.ratio - T::one()).abs()));
    let psi_spread = match out.first() {
        Some(first) => out.iter().fold(T::zero(), |m, s| m.max((s.psi - first.psi).modulus())),
        None => T::zero(),
    };
    Ok(MetricReport { seed, samples: out, max_deviation, psi_spread })
}
