use std::sync::Arc;

use pelks_core::algebra_core::*;
use proptest::prelude::*;

fn field(p: u32, a: u32, d: u32) -> Arc<FiniteField> {
    FiniteField::new(p, a, d).unwrap()
}

fn series(f: &Arc<FiniteField>, start: i64, raw: &[u32], prec: i64) -> LocalSeriesElement {
    let coeffs: Vec<FiniteFieldElement> = raw.iter().map(|&c| FiniteFieldElement::from_int(f, c as i64)).collect();
    LocalSeriesElement::from_coefficients(f, start, &coeffs, prec)
}

fn leibniz3(m: &RingMatrix<LocalSeriesElement>) -> LocalSeriesElement {
    let g = |i: usize, j: usize| m.get(i, j).clone();
    let t = |a: usize, b: usize, c: usize| g(0, a).mul(&g(1, b)).mul(&g(2, c));
    t(0, 1, 2).add(&t(1, 2, 0)).add(&t(2, 0, 1)).sub(&t(2, 1, 0)).sub(&t(0, 2, 1)).sub(&t(1, 0, 2))
}

#[test]
fn prime_field_is_fixed_by_frobenius() {
    let f = field(5, 1, 1);
    for x in FiniteFieldElement::all(&f) {
        for k in 1..4 {
            assert_eq!(frobenius(&x, k), x);
        }
    }
}

#[test]
fn frobenius_on_f4() {
    let f = field(2, 1, 2);
    let zeta = FiniteFieldElement::x(&f);
    // F_4 = F_2[x]/(x² + x + 1): ζ² = ζ + 1
    let zeta_plus_one = FiniteFieldElement::from_coefficients(&f, &[1, 1]).unwrap();
    assert_eq!(frobenius(&zeta, 1), zeta_plus_one);
    for x in FiniteFieldElement::all(&f) {
        assert_eq!(frobenius(&frobenius(&x, 1), 1), x);
    }
}

#[test]
fn frobenius_order_is_degree_over_gcd() {
    for (p, a, d) in [(2u32, 1u32, 4u32), (3, 1, 3), (2, 2, 2), (5, 1, 2)] {
        let f = field(p, a, d);
        let zeta = FiniteFieldElement::primitive(&f);
        for fr in 1..=d {
            let period = d / gcd(d, fr);
            let mut y = zeta.clone();
            for step in 1..=period {
                y = frobenius(&y, fr);
                assert_eq!(y == zeta, step == period, "p={p} d={d} f={fr} step {step}");
            }
        }
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn field_axioms_exhaustive_up_to_sixteen() {
    let fields = [(2, 1, 1), (3, 1, 1), (2, 1, 2), (5, 1, 1), (7, 1, 1), (2, 1, 3), (3, 1, 2), (11, 1, 1), (13, 1, 1), (2, 1, 4), (2, 2, 2)];
    for (p, a, d) in fields {
        let f = field(p, a, d);
        let all = FiniteFieldElement::all(&f);
        assert_eq!(all.len() as u32, f.order());
        assert!(f.order() <= 16);
        let zero = FiniteFieldElement::zero(&f);
        let one = FiniteFieldElement::one(&f);
        for x in &all {
            assert_eq!(x.add(&zero), *x);
            assert_eq!(x.mul(&one), *x);
            assert!(x.add(&x.neg()).is_zero());
            if !x.is_zero() {
                assert!(x.mul(&x.inv().unwrap()).is_one());
            } else {
                assert!(x.inv().is_err());
            }
            for y in &all {
                assert_eq!(x.add(y), y.add(x));
                assert_eq!(x.mul(y), y.mul(x));
                for z in &all {
                    assert_eq!(x.add(y).add(z), x.add(&y.add(z)));
                    assert_eq!(x.mul(y).mul(z), x.mul(&y.mul(z)));
                    assert_eq!(x.mul(&y.add(z)), x.mul(y).add(&x.mul(z)));
                }
            }
        }
    }
}

#[test]
fn series_valuation_examples() {
    let f = field(3, 1, 2);
    let pi = LocalSeriesElement::pi(&f, 10);
    assert_eq!(series_valuation(&pi.mul(&pi)), Valuation::Finite(2));
    assert_eq!(series_valuation(&LocalSeriesElement::zero(&f, 10)), Valuation::Infinite);
    let one_plus_pi = LocalSeriesElement::one(&f, 10).add(&pi);
    assert_eq!(series_valuation(&one_plus_pi), Valuation::Finite(0));
}

#[test]
fn snf_examples() {
    let f = field(2, 1, 2);
    let s = |start, raw: &[u32]| series(&f, start, raw, 8);
    let one = s(0, &[1]);
    let zero = LocalSeriesElement::zero(&f, 8);
    let pi = s(1, &[1]);

    let id = RingMatrix::identity(3, &one);
    let d = smith_normal_form(&id).unwrap();
    assert!(d.verify(&id));
    assert_eq!(d.exponents(), vec![Valuation::Finite(0); 3]);

    let diag = RingMatrix::from_rows(vec![vec![pi.clone(), zero.clone()], vec![zero.clone(), one.clone()]], &one).unwrap();
    let d = smith_normal_form(&diag).unwrap();
    assert!(d.verify(&diag));
    assert_eq!(d.exponents(), vec![Valuation::Finite(0), Valuation::Finite(1)]);

    let a = RingMatrix::from_rows(vec![vec![pi.clone(), one.clone()], vec![zero.clone(), pi.clone()]], &one).unwrap();
    let d = smith_normal_form(&a).unwrap();
    assert!(d.verify(&a));
    // minors oracle: gcd of 1×1 minors has valuation 0, the 2×2 minor π² has valuation 2
    let min_entry = a.entries().filter_map(|e| e.valuation().finite()).min().unwrap();
    let det = a.get(0, 0).mul(a.get(1, 1)).sub(&a.get(0, 1).mul(a.get(1, 0)));
    let det_v = det.valuation().finite().unwrap();
    assert_eq!(d.exponents(), vec![Valuation::Finite(min_entry), Valuation::Finite(det_v - min_entry)]);
    assert_eq!(d.exponents(), vec![Valuation::Finite(0), Valuation::Finite(2)]);
}

#[test]
fn integer_snf_example() {
    let a = RingMatrix::from_rows(vec![vec![2i64, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]], &0).unwrap();
    let d = smith_normal_form(&a).unwrap();
    assert!(d.verify(&a));
    assert_eq!(d.diagonal, vec![2, 6, 12]);
}

#[test]
fn unresolved_zero_below_pivot_is_reported() {
    let f = field(2, 1, 1);
    let pivot = series(&f, 2, &[1], 8);
    let vague_zero = LocalSeriesElement::zero(&f, 1);
    let a = RingMatrix::from_rows(vec![vec![pivot, vague_zero]], &LocalSeriesElement::zero(&f, 8)).unwrap();
    assert!(matches!(smith_normal_form(&a), Err(SnfError::InsufficientPrecision { .. })));
}

fn random_matrix(f: &Arc<FiniteField>, rows: usize, cols: usize, raw: &[u32], prec: i64) -> RingMatrix<LocalSeriesElement> {
    let zero = LocalSeriesElement::zero(f, prec);
    RingMatrix::from_fn(rows, cols, &zero, |i, j| {
        let k = (i * cols + j) * 3;
        let start = (raw[k] % 3) as i64;
        series(f, start, &raw[k + 1..k + 3], prec)
    })
}

/// Product of elementary operations: row additions with unit-free multipliers, swaps and unit scalings.
fn unimodular(f: &Arc<FiniteField>, n: usize, ops: &[u32], prec: i64) -> RingMatrix<LocalSeriesElement> {
    let one = LocalSeriesElement::one(f, prec);
    let mut m = RingMatrix::identity(n, &one);
    for w in ops.chunks(4) {
        let (a, b) = (w[0] as usize % n, w[1] as usize % n);
        match w[2] % 3 {
            0 if a != b => m.add_row_multiple(a, b, &series(f, (w[3] % 2) as i64, &[w[3], 1], prec)),
            1 => m.swap_rows(a, b),
            _ => m.scale_row(a, &series(f, 0, &[1 + w[3] % (f.order() - 1), w[3]], prec)),
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn certified_decomposition_holds(raw in proptest::collection::vec(0u32..9, 36), rows in 1usize..4, cols in 1usize..4) {
        let f = field(3, 1, 2);
        let a = random_matrix(&f, rows, cols, &raw, 12);
        let d = smith_normal_form(&a).unwrap();
        prop_assert!(d.verify(&a));
        let ex = d.exponents();
        prop_assert!(ex.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn divisors_invariant_under_unimodular_change(raw in proptest::collection::vec(0u32..9, 27), l in proptest::collection::vec(0u32..30, 24), r in proptest::collection::vec(0u32..30, 24)) {
        let f = field(3, 1, 1);
        let prec = 16;
        let a = random_matrix(&f, 3, 3, &raw, prec);
        let u = unimodular(&f, 3, &l, prec);
        let v = unimodular(&f, 3, &r, prec);
        let b = u.mul(&a).unwrap().mul(&v).unwrap();
        let da = smith_normal_form(&a).unwrap().exponents();
        let db = smith_normal_form(&b).unwrap().exponents();
        prop_assert_eq!(da, db);
    }

    #[test]
    fn exponent_sum_is_determinant_valuation(raw in proptest::collection::vec(0u32..9, 27)) {
        let f = field(2, 1, 2);
        let a = random_matrix(&f, 3, 3, &raw, 14);
        let det = leibniz3(&a);
        let ex = smith_normal_form(&a).unwrap().exponents();
        match det.valuation() {
            Valuation::Finite(v) => {
                let total: i64 = ex.iter().map(|e| e.finite().unwrap()).sum();
                prop_assert_eq!(total, v);
            }
            Valuation::Infinite => prop_assert!(ex.iter().any(|e| e.is_infinite())),
        }
    }

    #[test]
    fn valuation_is_additive(a in proptest::collection::vec(0u32..4, 4), b in proptest::collection::vec(0u32..4, 4), sa in 0i64..3, sb in 0i64..3) {
        let f = field(2, 1, 2);
        let x = series(&f, sa, &a, 12);
        let y = series(&f, sb, &b, 12);
        if let (Some(vx), Some(vy)) = (x.valuation().finite(), y.valuation().finite()) {
            prop_assert_eq!(x.mul(&y).valuation(), Valuation::Finite(vx + vy));
        }
    }
}
