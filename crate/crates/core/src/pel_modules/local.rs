use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::algebra_core::{
    smith_normal_form, FiniteFieldElement, LocalSeriesElement, RingElement, RingMatrix, SmithDecomposition, SnfError,
    Valuation,
};
use crate::cyclic_algebra::CyclicAlgebraDescriptor;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PelError {
    #[error("label e_{i}{j} out of range for n={n}, r={r}")]
    LabelOutOfRange { i: usize, j: usize, n: usize, r: usize },
    #[error("invalid module: {0}")]
    InvalidModule(String),
    #[error("no test element separates the conjugates ({0})")]
    DegenerateTestElement(String),
    #[error("signature ({p}, {q}) is not balanced; no canonical ψ exists for type A")]
    SignatureMismatch { p: usize, q: usize },
    #[error("the layer map is not injective on the free quotient")]
    NotInjective,
    #[error(transparent)]
    Snf(#[from] SnfError),
}

impl PelError {
    fn insufficient(e: SnfError) -> Self {
        PelError::Snf(e)
    }
}

/// How the conjugation x ↦ x̄ acts on the coefficient ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarMode {
    /// x̄ = τ^s(x) with s from the algebra descriptor.
    Power,
    /// x̄ is an independent second coordinate (a place split in E/E⁺).
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceType {
    A,
    C,
}

/// 1-based basis label e_ij.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub i: usize,
    pub j: usize,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e_{}{}", self.i, self.j)
    }
}

/// e_ij ⊗ e'_lk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairLabel {
    pub i: usize,
    pub j: usize,
    pub l: usize,
    pub k: usize,
}

impl fmt::Display for PairLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e_{}{}⊗e'_{}{}", self.i, self.j, self.l, self.k)
    }
}

/// An element x of O_E together with its conjugate x̄.
#[derive(Debug, Clone)]
pub struct ScalarElement {
    pub x: LocalSeriesElement,
    pub xbar: LocalSeriesElement,
}

#[derive(Debug, Clone)]
pub enum Generator {
    Scalar(ScalarElement),
    U,
}

/// The rank-nr module M (or its dual Mᵗ) with basis e_ij and signature (p, q).
#[derive(Debug, Clone)]
pub struct SignedBasisModule {
    desc: Arc<CyclicAlgebraDescriptor>,
    r: usize,
    p: usize,
    q: usize,
    dual: bool,
    mode: BarMode,
}

impl SignedBasisModule {
    pub fn new(
        desc: &Arc<CyclicAlgebraDescriptor>,
        r: usize,
        p: usize,
        q: usize,
        dual: bool,
        mode: BarMode,
    ) -> Result<Self, PelError> {
        if p + q != r {
            return Err(PelError::InvalidModule(format!("p + q = {} differs from r = {r}", p + q)));
        }
        if r == 0 {
            return Err(PelError::InvalidModule("r must be positive".into()));
        }
        Ok(Self { desc: desc.clone(), r, p, q, dual, mode })
    }

    /// The matching dual module.
    pub fn dual(&self) -> Self {
        Self { dual: !self.dual, ..self.clone() }
    }

    pub fn descriptor(&self) -> &Arc<CyclicAlgebraDescriptor> {
        &self.desc
    }
    pub fn n(&self) -> usize {
        self.desc.n() as usize
    }
    pub fn r(&self) -> usize {
        self.r
    }
    pub fn signature(&self) -> (usize, usize) {
        (self.p, self.q)
    }
    pub fn is_dual(&self) -> bool {
        self.dual
    }
    pub fn mode(&self) -> BarMode {
        self.mode
    }
    pub fn rank(&self) -> usize {
        self.n() * self.r
    }

    pub fn labels(&self) -> Vec<Label> {
        let mut out = Vec::with_capacity(self.rank());
        for i in 1..=self.n() {
            for j in 1..=self.r {
                out.push(Label { i, j });
            }
        }
        out
    }

    pub fn index(&self, e: Label) -> Result<usize, PelError> {
        if e.i == 0 || e.i > self.n() || e.j == 0 || e.j > self.r {
            return Err(PelError::LabelOutOfRange { i: e.i, j: e.j, n: self.n(), r: self.r });
        }
        Ok((e.i - 1) * self.r + (e.j - 1))
    }
    pub fn label(&self, idx: usize) -> Label {
        Label { i: idx / self.r + 1, j: idx % self.r + 1 }
    }

    /// Build x together with its conjugate (Power mode).
    pub fn scalar(&self, x: LocalSeriesElement) -> ScalarElement {
        let xbar = self.desc.bar(&x);
        ScalarElement { x, xbar }
    }

    /// Build a pair (x, x̄) with independent components (Split mode).
    pub fn scalar_pair(&self, x: LocalSeriesElement, xbar: LocalSeriesElement) -> ScalarElement {
        match self.mode {
            BarMode::Power => self.scalar(x),
            BarMode::Split => ScalarElement { x, xbar },
        }
    }

    fn compatible(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.desc, &o.desc) && self.r == o.r && self.p == o.p && self.q == o.q && self.mode == o.mode
    }

    /// τ-exponent and whether x̄ is used, for the scalar action on label e.
    fn scalar_rule(&self, e: Label) -> (u32, bool) {
        let n = self.n() as u32;
        let low = e.j <= self.p;
        if self.dual {
            ((n + 1 - e.i as u32) % n, low)
        } else {
            ((e.i as u32 - 1) % n, !low)
        }
    }
}

/// Plain module: left action. Dual module: right action e'·β.
pub fn act(g: &Generator, e: Label, m: &SignedBasisModule) -> Result<(LocalSeriesElement, Label), PelError> {
    m.index(e)?;
    let d = &m.desc;
    let n = m.n();
    match g {
        Generator::Scalar(s) => {
            let (k, use_bar) = m.scalar_rule(e);
            let base = if use_bar { &s.xbar } else { &s.x };
            Ok((d.tau_pow(base, k), e))
        }
        Generator::U => {
            if e.i == 1 {
                Ok((d.pi(), Label { i: n, j: e.j }))
            } else {
                Ok((d.one_series(), Label { i: e.i - 1, j: e.j }))
            }
        }
    }
}

/// Finitely supported combination of pairs e_a ⊗ e'_b.
#[derive(Debug, Clone)]
pub struct TensorVector {
    pub coeffs: BTreeMap<PairLabel, LocalSeriesElement>,
}

impl TensorVector {
    pub fn new() -> Self {
        Self { coeffs: BTreeMap::new() }
    }

    pub fn add_term(&mut self, pair: PairLabel, c: &LocalSeriesElement) {
        let v = match self.coeffs.get(&pair) {
            Some(old) => old.add(c),
            None => c.clone(),
        };
        if v.is_zero() {
            self.coeffs.remove(&pair);
        } else {
            self.coeffs.insert(pair, v);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|c| c.is_zero())
    }

    /// Apply a relabeling of the column index j (same permutation on both factors).
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let mut out = Self::new();
        for (p, c) in &self.coeffs {
            out.add_term(PairLabel { i: p.i, j: perm[p.j - 1], l: p.l, k: perm[p.k - 1] }, c);
        }
        out
    }
}

impl Default for TensorVector {
    fn default() -> Self {
        Self::new()
    }
}

fn residue_labels(m: &SignedBasisModule, s: &ScalarElement) -> Vec<FiniteFieldElement> {
    let n = m.n() as u32;
    let d = &m.desc;
    let mut out: Vec<FiniteFieldElement> = (0..n).map(|i| d.tau_pow(&s.x, i).residue()).collect();
    if m.mode == BarMode::Split {
        out.extend((0..n).map(|i| d.tau_pow(&s.xbar, i).residue()));
    }
    out
}

/// Whether the distinct automorphism images of x (2n in Split mode, n otherwise)
/// stay pairwise distinct modulo π.
pub fn separates(m: &SignedBasisModule, s: &ScalarElement) -> bool {
    let r = residue_labels(m, s);
    (0..r.len()).all(|a| (a + 1..r.len()).all(|b| r[a] != r[b]))
}

/// Scan residue monomials ζ^k (pairs (ζ^k, ζ^k') in Split mode) for a separating element.
pub fn separating_element(m: &SignedBasisModule) -> Result<ScalarElement, PelError> {
    let d = &m.desc;
    let fld = d.residue_field();
    let zeta = FiniteFieldElement::primitive(fld);
    let ord = fld.order() as u64 - 1;
    let mono = |k: u64| d.constant(&zeta.pow(k));
    match m.mode {
        BarMode::Power => {
            for k in 0..ord {
                let s = m.scalar(mono(k));
                if separates(m, &s) {
                    return Ok(s);
                }
            }
        }
        BarMode::Split => {
            for k in 0..ord {
                for k2 in 0..ord {
                    let s = m.scalar_pair(mono(k), mono(k2));
                    if separates(m, &s) {
                        return Ok(s);
                    }
                }
            }
        }
    }
    Err(PelError::DegenerateTestElement(format!(
        "residue field of order {} has too few elements for {} distinct conjugates",
        fld.order(),
        if m.mode == BarMode::Split { 2 * m.n() } else { m.n() }
    )))
}

/// β·e ⊗ e' − e ⊗ e'·β for β ∈ xs ∪ {u} and every basis pair; zero vectors are dropped.
pub fn relation_generators(
    m: &SignedBasisModule,
    mt: &SignedBasisModule,
    xs: &[ScalarElement],
) -> Result<Vec<TensorVector>, PelError> {
    if m.dual || !mt.dual || !m.compatible(mt) {
        return Err(PelError::InvalidModule("second module must be the dual of the first".into()));
    }
    if !xs.iter().any(|s| separates(m, s)) {
        return Err(PelError::DegenerateTestElement("none of the supplied elements separates conjugates".into()));
    }
    let mut gens: Vec<Generator> = xs.iter().cloned().map(Generator::Scalar).collect();
    gens.push(Generator::U);
    let mut out = Vec::new();
    for g in &gens {
        for a in m.labels() {
            for b in mt.labels() {
                let (ca, a2) = act(g, a, m)?;
                let (cb, b2) = act(g, b, mt)?;
                let mut v = TensorVector::new();
                v.add_term(PairLabel { i: a2.i, j: a2.j, l: b.i, k: b.j }, &ca);
                v.add_term(PairLabel { i: a.i, j: a.j, l: b2.i, k: b2.j }, &cb.neg());
                if !v.is_zero() {
                    out.push(v);
                }
            }
        }
    }
    Ok(out)
}

/// A verified identity class(a) = π^e · class(b) in the quotient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Twist {
    pub lhs: PairLabel,
    pub rhs: PairLabel,
    pub exponent: i64,
}

/// Structure of (M ⊗ Mᵗ)/R_E.
#[derive(Debug, Clone)]
pub struct QuotientStructure {
    pub n: usize,
    pub r: usize,
    pub signature: (usize, usize),
    pub free_rank: usize,
    /// Positive exponents of torsion divisors.
    pub torsion: Vec<i64>,
    /// Pairs whose class has a nonzero free component, sorted.
    pub survivors: Vec<PairLabel>,
    /// The cyclic identification e_1j⊗e'_1k = π e_2j⊗e'_nk, verified per survivor (empty for n = 1).
    pub twists: Vec<Twist>,
    relations: Vec<TensorVector>,
    precision: i64,
    template: LocalSeriesElement,
}

impl QuotientStructure {
    pub fn relations(&self) -> &[TensorVector] {
        &self.relations
    }
    pub fn precision(&self) -> i64 {
        self.precision
    }
}

fn pair_index(n_r: usize, r: usize, p: &PairLabel) -> usize {
    ((p.i - 1) * r + (p.j - 1)) * n_r + (p.l - 1) * r + (p.k - 1)
}

fn pair_from_index(n_r: usize, r: usize, idx: usize) -> PairLabel {
    let (a, b) = (idx / n_r, idx % n_r);
    PairLabel { i: a / r + 1, j: a % r + 1, l: b / r + 1, k: b % r + 1 }
}

fn relation_matrix(
    n: usize,
    r: usize,
    rels: &[TensorVector],
    template: &LocalSeriesElement,
) -> RingMatrix<LocalSeriesElement> {
    let nr = n * r;
    let mut m = RingMatrix::zeros(rels.len(), nr * nr, template);
    for (row, v) in rels.iter().enumerate() {
        for (p, c) in &v.coeffs {
            m.set(row, pair_index(nr, r, p), c.clone());
        }
    }
    m
}

/// Free coordinates of each basis vector: rows of V restricted to free columns.
struct Classes {
    free_cols: Vec<usize>,
    torsion: Vec<i64>,
    v: RingMatrix<LocalSeriesElement>,
}

fn classes(a: &RingMatrix<LocalSeriesElement>) -> Result<Classes, PelError> {
    let s: SmithDecomposition<LocalSeriesElement> = smith_normal_form(a).map_err(PelError::insufficient)?;
    let exps = s.exponents();
    let mut free_cols = Vec::new();
    let mut torsion = Vec::new();
    for c in 0..a.cols() {
        match exps.get(c) {
            Some(Valuation::Finite(0)) => {}
            Some(Valuation::Finite(e)) => torsion.push(*e),
            Some(Valuation::Infinite) | None => free_cols.push(c),
        }
    }
    Ok(Classes { free_cols, torsion, v: s.v })
}

impl Classes {
    fn free_vector(&self, idx: usize) -> Vec<LocalSeriesElement> {
        self.free_cols.iter().map(|&c| self.v.get(idx, c).clone()).collect()
    }
}

fn all_zero(v: &[LocalSeriesElement]) -> bool {
    v.iter().all(|x| x.is_zero())
}

/// SNF of the relation matrix; survivors, torsion and the π-twist.
pub fn quotient_structure(m: &SignedBasisModule, relations: &[TensorVector]) -> Result<QuotientStructure, PelError> {
    let (n, r) = (m.n(), m.r);
    let nr = n * r;
    let template = m.desc.zero_series();
    let a = relation_matrix(n, r, relations, &template);
    let cl = classes(&a)?;
    let mut survivors = Vec::new();
    for idx in 0..nr * nr {
        if !all_zero(&cl.free_vector(idx)) {
            survivors.push(pair_from_index(nr, r, idx));
        }
    }
    let mut twists = Vec::new();
    if n > 1 {
        let pi = m.desc.pi();
        for s in survivors.iter().filter(|s| s.i == 1 && s.l == 1) {
            let rhs = PairLabel { i: 2, j: s.j, l: n, k: s.k };
            let lv = cl.free_vector(pair_index(nr, r, s));
            let rv = cl.free_vector(pair_index(nr, r, &rhs));
            if lv.iter().zip(&rv).all(|(x, y)| x.eq_within(&y.mul(&pi))) {
                twists.push(Twist { lhs: *s, rhs, exponent: 1 });
            }
        }
    }
    Ok(QuotientStructure {
        n,
        r,
        signature: (m.p, m.q),
        free_rank: cl.free_cols.len(),
        torsion: cl.torsion,
        survivors,
        twists,
        relations: relations.to_vec(),
        precision: m.desc.precision(),
        template,
    })
}

/// Whether v lies in the O-span of the relations: with U·A·V = D, v·V must be
/// divisible by the diagonal column by column.
pub fn span_contains(m: &SignedBasisModule, relations: &[TensorVector], v: &TensorVector) -> Result<bool, PelError> {
    let (n, r) = (m.n(), m.r);
    let template = m.desc.zero_series();
    let a = relation_matrix(n, r, relations, &template);
    let s: SmithDecomposition<LocalSeriesElement> = smith_normal_form(&a).map_err(PelError::insufficient)?;
    let exps = s.exponents();
    let row = relation_matrix(n, r, std::slice::from_ref(v), &template);
    let w = row.mul(&s.v).map_err(|e| PelError::InvalidModule(e.to_string()))?;
    for c in 0..a.cols() {
        let val = w.get(0, c).valuation();
        let ok = match (exps.get(c), val) {
            (_, Valuation::Infinite) => true,
            (Some(Valuation::Finite(e)), Valuation::Finite(x)) => x >= *e,
            _ => false,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// π-valuation of det ψ: per layer i, the map from symmetric representatives
/// e_ij⊗e'_(n+2−i)k into the free part of the symmetrised quotient.
pub fn image_exponent(
    qs: &QuotientStructure,
    kind: InstanceType,
    n: usize,
    r: usize,
    p: usize,
    q: usize,
) -> Result<i64, PelError> {
    if kind == InstanceType::A && p != q {
        return Err(PelError::SignatureMismatch { p, q });
    }
    if n != qs.n || r != qs.r || (p, q) != qs.signature {
        return Err(PelError::InvalidModule("instance data disagree with the quotient".into()));
    }
    let nr = n * r;
    let mut rels = qs.relations.clone();
    let one = qs.template.one_like();
    let mone = one.negate();
    for i in 1..=n {
        for l in 1..=n {
            for j in 1..=r {
                for k in j + 1..=r {
                    let mut v = TensorVector::new();
                    v.add_term(PairLabel { i, j, l, k }, &one);
                    v.add_term(PairLabel { i, j: k, l, k: j }, &mone);
                    rels.push(v);
                }
            }
        }
    }
    let a = relation_matrix(n, r, &rels, &qs.template);
    let cl = classes(&a)?;
    let reps: Vec<(usize, usize)> = (1..=r)
        .flat_map(|j| (j..=r).map(move |k| (j, k)))
        .filter(|&(j, k)| match kind {
            InstanceType::A => j <= p && k > p,
            InstanceType::C => true,
        })
        .collect();
    if reps.len() != cl.free_cols.len() {
        return Err(PelError::NotInjective);
    }
    let mut total = 0i64;
    for i in 1..=n {
        let l = if n + 2 - i == n + 1 { 1 } else { n + 2 - i };
        let rows: Vec<Vec<LocalSeriesElement>> =
            reps.iter().map(|&(j, k)| cl.free_vector(pair_index(nr, r, &PairLabel { i, j, l, k }))).collect();
        if rows.is_empty() {
            continue;
        }
        let m = RingMatrix::from_rows(rows, &qs.template).expect("rectangular");
        let s = smith_normal_form(&m).map_err(PelError::insufficient)?;
        for e in s.exponents() {
            match e {
                Valuation::Finite(v) => total += v,
                Valuation::Infinite => return Err(PelError::NotInjective),
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(n: u32, q: u32, r: usize, p: usize, mode: BarMode) -> (SignedBasisModule, SignedBasisModule) {
        let d = Arc::new(CyclicAlgebraDescriptor::new(n, q, 1, 0, 8).unwrap());
        let m = SignedBasisModule::new(&d, r, p, r - p, false, mode).unwrap();
        let mt = m.dual();
        (m, mt)
    }

    fn exponent(n: u32, q: u32, r: usize, p: usize, mode: BarMode, kind: InstanceType) -> (QuotientStructure, i64) {
        let (m, mt) = setup(n, q, r, p, mode);
        let x = separating_element(&m).unwrap();
        let rels = relation_generators(&m, &mt, &[x]).unwrap();
        let qs = quotient_structure(&m, &rels).unwrap();
        let e = image_exponent(&qs, kind, n as usize, r, p, r - p).unwrap();
        (qs, e)
    }

    #[test]
    fn quaternion_type_c() {
        let (qs, e) = exponent(2, 3, 1, 1, BarMode::Power, InstanceType::C);
        assert_eq!(qs.free_rank, 1);
        assert_eq!(qs.twists.len(), 1);
        assert_eq!(e, 1);
    }

    #[test]
    fn type_a_small() {
        let (qs, e) = exponent(2, 3, 2, 1, BarMode::Split, InstanceType::A);
        assert_eq!(qs.free_rank, 2);
        assert_eq!(e, 1);
    }

    #[test]
    fn split_has_no_twist() {
        let (qs, e) = exponent(1, 3, 2, 1, BarMode::Split, InstanceType::A);
        assert_eq!(qs.free_rank, 2);
        assert!(qs.twists.is_empty());
        assert_eq!(e, 0);
    }
}
