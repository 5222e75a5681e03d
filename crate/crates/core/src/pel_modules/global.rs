//! The quotient (W ⊗ W)/R over the ring of integers of a quadratic field,
//! computed over ℤ.

use crate::algebra_core::{smith_normal_form, RingMatrix};

/// O_F = ℤ[ω] for F = ℚ(√d), d squarefree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadraticRing {
    pub d: i64,
}

impl QuadraticRing {
    pub fn new(d: i64) -> Option<Self> {
        if d == 0 || d == 1 {
            return None;
        }
        let squarefree = (2..).take_while(|k: &i64| k * k <= d.abs()).all(|k| d % (k * k) != 0);
        squarefree.then_some(Self { d })
    }

    fn one_mod_four(&self) -> bool {
        self.d.rem_euclid(4) == 1
    }

    /// Field discriminant: d or 4d.
    pub fn discriminant(&self) -> i64 {
        if self.one_mod_four() {
            self.d
        } else {
            4 * self.d
        }
    }

    /// ω² as (c0, c1) meaning c0 + c1·ω.
    fn omega_squared(&self) -> (i64, i64) {
        if self.one_mod_four() {
            ((self.d - 1) / 4, 1)
        } else {
            (self.d, 0)
        }
    }

    /// Galois conjugate of ω.
    pub fn omega_bar(&self) -> (i64, i64) {
        if self.one_mod_four() {
            (1, -1)
        } else {
            (0, -1)
        }
    }

    pub fn mul(&self, a: (i64, i64), b: (i64, i64)) -> (i64, i64) {
        let (s0, s1) = self.omega_squared();
        let cc = a.1 * b.1;
        (a.0 * b.0 + cc * s0, a.0 * b.1 + a.1 * b.0 + cc * s1)
    }

    pub fn conj(&self, a: (i64, i64)) -> (i64, i64) {
        let wb = self.omega_bar();
        (a.0 + a.1 * wb.0, a.1 * wb.1)
    }
}

type Term = ((usize, usize), (i64, i64));

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalRankReport {
    pub p: usize,
    pub q: usize,
    /// Rank over O_F of the quotient.
    pub rank: usize,
    pub n_r_exists: bool,
    pub n_r: Option<usize>,
    /// Nontrivial integer elementary divisors (absolute values > 1).
    pub torsion: Vec<i64>,
    /// |disc|, which must kill every torsion divisor.
    pub annihilator: i64,
    pub torsion_annihilated: bool,
}

/// Rank, n_r and torsion of (W ⊗_{O_F} W)/R for W of signature (p, q).
pub fn global_rank_lemma(p: usize, q: usize, ring: QuadraticRing) -> GlobalRankReport {
    let r = p + q;
    let omega = (0i64, 1i64);
    let omega_bar = ring.omega_bar();
    // χ_a(ω): ω on the first p vectors, ω̄ on the rest
    let chi = |a: usize, x: (i64, i64)| if a < p { x } else { ring.conj(x) };
    let cols = 2 * r * r;
    let col = |a: usize, b: usize, part: usize| 2 * (a * r + b) + part;
    let mut rows: Vec<Vec<i64>> = Vec::new();
    // ((row, column) of the tensor entry, coefficient in O_F)
    let mut push = |c: &[Term]| {
        for mult in [(1i64, 0i64), omega] {
            let mut row = vec![0i64; cols];
            for &((a, b), coef) in c {
                let v = ring.mul(coef, mult);
                row[col(a, b, 0)] += v.0;
                row[col(a, b, 1)] += v.1;
            }
            if row.iter().any(|&x| x != 0) {
                rows.push(row);
            }
        }
    };
    for a in 0..r {
        for b in 0..r {
            let ca = chi(a, omega);
            let cb = chi(b, omega_bar);
            push(&[((a, b), (ca.0 - cb.0, ca.1 - cb.1))]);
            if a < b {
                push(&[((a, b), (1, 0)), ((b, a), (-1, 0))]);
            }
        }
    }
    let disc = ring.discriminant().abs();
    if cols == 0 {
        return GlobalRankReport {
            p,
            q,
            rank: 0,
            n_r_exists: true,
            n_r: Some(0),
            torsion: vec![],
            annihilator: disc,
            torsion_annihilated: true,
        };
    }
    let (free_cols, torsion, v) = if rows.is_empty() {
        ((0..cols).collect::<Vec<_>>(), vec![], RingMatrix::identity(cols, &0i64))
    } else {
        let m = RingMatrix::from_rows(rows, &0i64).expect("rectangular");
        let s = smith_normal_form(&m).expect("exact integers");
        let mut free = Vec::new();
        let mut tors = Vec::new();
        for c in 0..cols {
            match s.diagonal.get(c) {
                Some(&d) if d != 0 => {
                    if d.abs() > 1 {
                        tors.push(d.abs());
                    }
                }
                _ => free.push(c),
            }
        }
        (free, tors, s.v)
    };
    let rank = free_cols.len() / 2;
    // multiplicity of each basis vector among unordered pairs with a free class
    let mut mult = vec![0usize; r];
    for a in 0..r {
        for b in a..r {
            let nonzero =
                (0..2).any(|part| free_cols.iter().any(|&c| *v.get(col(a, b, part), c) != 0));
            if nonzero {
                mult[a] += 1;
                mult[b] += 1;
            }
        }
    }
    let equal = mult.windows(2).all(|w| w[0] == w[1]);
    let n_r_exists = equal && (rank > 0 || r == 0);
    let torsion_annihilated = torsion.iter().all(|t| disc % t == 0);
    GlobalRankReport {
        p,
        q,
        rank,
        n_r_exists,
        n_r: if n_r_exists { Some(mult.first().copied().unwrap_or(0)) } else { None },
        torsion,
        annihilator: disc,
        torsion_annihilated,
    }
}
