use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use pelks_core::algebra_core::{smith_normal_form, LocalSeriesElement, RingElement, RingMatrix};
use pelks_core::cyclic_algebra::CyclicAlgebraDescriptor;
use pelks_core::pel_modules::*;

fn module(n: u32, q: u32, r: usize, p: usize, mode: BarMode) -> SignedBasisModule {
    let d = Arc::new(CyclicAlgebraDescriptor::new(n, q, 1, 0, 8).unwrap());
    SignedBasisModule::new(&d, r, p, r - p, false, mode).unwrap()
}

fn quotient(m: &SignedBasisModule) -> QuotientStructure {
    let x = separating_element(m).unwrap();
    let rels = relation_generators(m, &m.dual(), &[x]).unwrap();
    quotient_structure(m, &rels).unwrap()
}

fn pl(i: usize, j: usize, l: usize, k: usize) -> PairLabel {
    PairLabel { i, j, l, k }
}

/// Membership oracle: v lies in the row span iff appending it leaves the SNF divisors unchanged.
fn in_span(m: &SignedBasisModule, rels: &[TensorVector], v: &TensorVector) -> bool {
    let nr = m.rank();
    let r = m.r();
    let t = m.descriptor().zero_series();
    let idx = |p: &PairLabel| ((p.i - 1) * r + p.j - 1) * nr + (p.l - 1) * r + p.k - 1;
    let build = |vs: &[TensorVector]| {
        let mut a = RingMatrix::zeros(vs.len(), nr * nr, &t);
        for (row, tv) in vs.iter().enumerate() {
            for (p, c) in &tv.coeffs {
                a.set(row, idx(p), c.clone());
            }
        }
        smith_normal_form(&a).unwrap().exponents().into_iter().filter(|e| !e.is_infinite()).collect::<Vec<_>>()
    };
    let base = build(rels);
    let mut ext = rels.to_vec();
    ext.push(v.clone());
    build(&ext) == base
}

fn single(p: PairLabel, c: &LocalSeriesElement) -> TensorVector {
    let mut v = TensorVector::new();
    v.add_term(p, c);
    v
}

#[test]
fn action_u_on_first_row_gives_pi() {
    let m = module(2, 3, 1, 1, BarMode::Power);
    let (c, e) = act(&Generator::U, Label { i: 1, j: 1 }, &m).unwrap();
    assert_eq!(e, Label { i: 2, j: 1 });
    assert!(c.eq_within(&m.descriptor().pi()));
}

#[test]
fn action_x_on_first_row_is_identity_twist() {
    let m = module(2, 3, 2, 1, BarMode::Split);
    let x = separating_element(&m).unwrap();
    let (c, e) = act(&Generator::Scalar(x.clone()), Label { i: 1, j: 1 }, &m).unwrap();
    assert_eq!(e, Label { i: 1, j: 1 });
    assert!(c.eq_within(&x.x));
}

#[test]
fn dual_u_steps_down() {
    let m = module(2, 3, 1, 1, BarMode::Power).dual();
    let (c, e) = act(&Generator::U, Label { i: 2, j: 1 }, &m).unwrap();
    assert_eq!(e, Label { i: 1, j: 1 });
    assert!(c.eq_within(&m.descriptor().one_series()));
}

#[test]
fn label_out_of_range() {
    let m = module(2, 3, 1, 1, BarMode::Power);
    assert!(matches!(act(&Generator::U, Label { i: 3, j: 1 }, &m), Err(PelError::LabelOutOfRange { .. })));
}

#[test]
fn action_tables_respect_algebra_relations() {
    for (n, mode) in [(2, BarMode::Power), (3, BarMode::Power), (2, BarMode::Split)] {
        let base = module(n, 5, 2, 1, mode);
        for m in [base.clone(), base.dual()] {
            let d = m.descriptor().clone();
            let x = separating_element(&m).unwrap();
            let tx = ScalarElement { x: d.tau(&x.x), xbar: d.tau(&x.xbar) };
            let tinv = ScalarElement { x: d.tau_pow(&x.x, n - 1), xbar: d.tau_pow(&x.xbar, n - 1) };
            for e in m.labels() {
                // u^n acts as π
                let mut c = d.one_series();
                let mut cur = e;
                for _ in 0..n {
                    let (c1, e1) = act(&Generator::U, cur, &m).unwrap();
                    c = c.mul(&c1);
                    cur = e1;
                }
                assert_eq!(cur, e);
                assert!(c.eq_within(&d.pi()));
                let (cu, eu) = act(&Generator::U, e, &m).unwrap();
                let (cx, _) = act(&Generator::Scalar(x.clone()), e, &m).unwrap();
                if !m.is_dual() {
                    // u·(x·e) = τ(x)·(u·e)
                    let (ctx, _) = act(&Generator::Scalar(tx.clone()), eu, &m).unwrap();
                    assert!(cx.mul(&cu).eq_within(&cu.mul(&ctx)));
                } else {
                    // (e·x)·u = (e·u)·τ⁻¹(x)
                    let (cti, _) = act(&Generator::Scalar(tinv.clone()), eu, &m).unwrap();
                    assert!(cx.mul(&cu).eq_within(&cu.mul(&cti)));
                }
            }
        }
    }
}

#[test]
fn quaternion_relation_span_matches_example() {
    for q in [2, 3, 5] {
        let m = module(2, q, 1, 1, BarMode::Power);
        let d = m.descriptor().clone();
        let x = separating_element(&m).unwrap();
        let rels = relation_generators(&m, &m.dual(), &[x]).unwrap();
        let one = d.one_series();
        // x ⊗ y', y ⊗ x', x ⊗ x' − π y ⊗ y'
        assert!(in_span(&m, &rels, &single(pl(1, 1, 2, 1), &one)));
        assert!(in_span(&m, &rels, &single(pl(2, 1, 1, 1), &one)));
        let mut t = single(pl(1, 1, 1, 1), &one);
        t.add_term(pl(2, 1, 2, 1), &d.pi().negate());
        assert!(in_span(&m, &rels, &t));
        assert!(!in_span(&m, &rels, &single(pl(2, 1, 2, 1), &one)));
        let qs = quotient_structure(&m, &rels).unwrap();
        assert_eq!(qs.free_rank, 1);
        assert_eq!(qs.twists, vec![Twist { lhs: pl(1, 1, 1, 1), rhs: pl(2, 1, 2, 1), exponent: 1 }]);
    }
}

#[test]
fn type_a_mismatched_layers_lie_in_span() {
    let m = module(2, 3, 2, 1, BarMode::Split);
    let x = separating_element(&m).unwrap();
    let rels = relation_generators(&m, &m.dual(), &[x]).unwrap();
    let one = m.descriptor().one_series();
    for i in 1..=2 {
        for l in 1..=2 {
            if (i + l - 2) % 2 == 0 {
                continue;
            }
            for j in 1..=2 {
                for k in 1..=2 {
                    assert!(in_span(&m, &rels, &single(pl(i, j, l, k), &one)));
                }
            }
        }
    }
}

#[test]
fn type_a_survivors_follow_layer_pattern() {
    let m = module(2, 3, 2, 1, BarMode::Split);
    let qs = quotient(&m);
    assert_eq!(qs.free_rank, 2);
    assert!(qs.torsion.is_empty());
    let expected: BTreeSet<PairLabel> = [pl(1, 1, 1, 2), pl(1, 2, 1, 1), pl(2, 1, 2, 2), pl(2, 2, 2, 1)].into();
    assert_eq!(qs.survivors.iter().copied().collect::<BTreeSet<_>>(), expected);
    assert_eq!(qs.twists.len(), 2);
}

#[test]
fn split_instance_keeps_only_mismatched_pairs() {
    let m = module(1, 3, 2, 1, BarMode::Split);
    let qs = quotient(&m);
    assert_eq!(qs.free_rank, 2);
    assert!(qs.twists.is_empty());
    assert_eq!(qs.survivors, vec![pl(1, 1, 1, 2), pl(1, 2, 1, 1)]);
}

#[test]
fn free_rank_is_two_pq() {
    for (r, p) in [(2, 1), (4, 2)] {
        let qs = quotient(&module(2, 3, r, p, BarMode::Split));
        assert_eq!(qs.free_rank, 2 * p * (r - p));
    }
}

#[test]
fn exponents_type_c() {
    let t = Instant::now();
    for q in [2, 3, 5] {
        let qs = quotient(&module(2, q, 1, 1, BarMode::Power));
        assert_eq!(image_exponent(&qs, InstanceType::C, 2, 1, 1, 0).unwrap(), 1);
    }
    for r in 2..=3 {
        let qs = quotient(&module(2, 3, r, r, BarMode::Power));
        assert_eq!(image_exponent(&qs, InstanceType::C, 2, r, r, 0).unwrap(), (r * (r + 1) / 2) as i64);
    }
    let qs = quotient(&module(3, 2, 1, 1, BarMode::Power));
    assert_eq!(image_exponent(&qs, InstanceType::C, 3, 1, 1, 0).unwrap(), 1);
    eprintln!("type C exponents in {:?}", t.elapsed());
}

#[test]
fn exponents_type_a() {
    let t = Instant::now();
    let qs = quotient(&module(2, 3, 2, 1, BarMode::Split));
    assert_eq!(image_exponent(&qs, InstanceType::A, 2, 2, 1, 1).unwrap(), 1);
    let qs = quotient(&module(2, 3, 4, 2, BarMode::Split));
    assert_eq!(image_exponent(&qs, InstanceType::A, 2, 4, 2, 2).unwrap(), 4);
    eprintln!("type A exponents in {:?}", t.elapsed());
}

#[test]
fn split_exponent_is_zero() {
    for r in [2, 4] {
        let qs = quotient(&module(1, 3, r, r / 2, BarMode::Split));
        assert_eq!(image_exponent(&qs, InstanceType::A, 1, r, r / 2, r / 2).unwrap(), 0);
    }
    let qs = quotient(&module(1, 3, 2, 2, BarMode::Power));
    assert_eq!(image_exponent(&qs, InstanceType::C, 1, 2, 2, 0).unwrap(), 0);
}

#[test]
fn unbalanced_type_a_has_no_psi() {
    let qs = quotient(&module(2, 3, 3, 2, BarMode::Split));
    assert!(matches!(image_exponent(&qs, InstanceType::A, 2, 3, 2, 1), Err(PelError::SignatureMismatch { p: 2, q: 1 })));
}

#[test]
fn f4_cannot_separate_in_split_mode() {
    let m = module(2, 2, 2, 1, BarMode::Split);
    assert!(matches!(separating_element(&m), Err(PelError::DegenerateTestElement(_))));
    let d = m.descriptor();
    let bad = m.scalar_pair(d.one_series(), d.one_series());
    assert!(matches!(relation_generators(&m, &m.dual(), &[bad]), Err(PelError::DegenerateTestElement(_))));
}

#[test]
fn quotient_independent_of_separating_element() {
    let m = module(2, 5, 2, 1, BarMode::Split);
    let d = m.descriptor().clone();
    let f = d.residue_field().clone();
    let zeta = pelks_core::algebra_core::FiniteFieldElement::primitive(&f);
    let cands: Vec<ScalarElement> = (1..24u64)
        .flat_map(|a| (1..24u64).map(move |b| (a, b)))
        .map(|(a, b)| m.scalar_pair(d.constant(&zeta.pow(a)), d.constant(&zeta.pow(b))))
        .filter(|s| separates(&m, s))
        .take(2)
        .collect();
    assert_eq!(cands.len(), 2);
    let q1 = quotient_structure(&m, &relation_generators(&m, &m.dual(), &cands[..1]).unwrap()).unwrap();
    let q2 = quotient_structure(&m, &relation_generators(&m, &m.dual(), &cands[1..]).unwrap()).unwrap();
    assert_eq!(q1.free_rank, q2.free_rank);
    assert_eq!(q1.torsion, q2.torsion);
    assert_eq!(q1.survivors, q2.survivors);
    assert_eq!(q1.twists, q2.twists);
}

#[test]
fn image_exponent_invariant_under_block_relabeling() {
    let m = module(2, 3, 4, 2, BarMode::Split);
    let x = separating_element(&m).unwrap();
    let rels = relation_generators(&m, &m.dual(), &[x]).unwrap();
    // permutations preserving the blocks {1,2} and {3,4}
    for perm in [[2, 1, 3, 4], [1, 2, 4, 3], [2, 1, 4, 3]] {
        let moved: Vec<TensorVector> = rels.iter().map(|v| v.relabel(&perm)).collect();
        let qs = quotient_structure(&m, &moved).unwrap();
        assert_eq!(image_exponent(&qs, InstanceType::A, 2, 4, 2, 2).unwrap(), 4);
    }
}

#[test]
fn global_rank_lemma_sweep() {
    for d in [-1, -3, -5, -7] {
        let ring = QuadraticRing::new(d).unwrap();
        for p in 0..=4 {
            for q in 0..=4 {
                let rep = global_rank_lemma(p, q, ring);
                assert_eq!(rep.rank, p * q, "rank p={p} q={q} d={d}");
                assert_eq!(rep.n_r_exists, p == q, "n_r p={p} q={q} d={d}");
                if p == q {
                    assert_eq!(rep.n_r, Some(p));
                }
                assert!(rep.torsion_annihilated, "torsion {:?} for d={d}", rep.torsion);
            }
        }
    }
}

#[test]
fn global_rank_lemma_examples() {
    let ring = QuadraticRing::new(-1).unwrap();
    let r = global_rank_lemma(1, 1, ring);
    assert_eq!((r.rank, r.n_r), (1, Some(1)));
    let r = global_rank_lemma(2, 1, ring);
    assert_eq!((r.rank, r.n_r_exists), (2, false));
    assert_eq!(r.annihilator, 4);
}

#[test]
fn span_contains_agrees_with_divisor_oracle() {
    for (n, q, r, p, mode) in [(2, 3, 1, 1, BarMode::Power), (2, 5, 1, 1, BarMode::Power), (2, 3, 2, 1, BarMode::Split)] {
        let m = module(n, q, r, p, mode);
        let x = separating_element(&m).unwrap();
        let rels = relation_generators(&m, &m.dual(), &[x]).unwrap();
        let d = m.descriptor().clone();
        let nr = m.rank();
        for i in 1..=nr / r {
            for j in 1..=r {
                for l in 1..=nr / r {
                    for k in 1..=r {
                        for c in [d.one_series(), d.pi()] {
                            let v = single(pl(i, j, l, k), &c);
                            assert_eq!(span_contains(&m, &rels, &v).unwrap(), in_span(&m, &rels, &v), "{:?}", pl(i, j, l, k));
                        }
                    }
                }
            }
        }
        let mut t = single(pl(1, 1, 1, 1), &d.one_series());
        t.add_term(pl(2, 1, 2, 1), &d.pi().negate());
        assert_eq!(span_contains(&m, &rels, &t).unwrap(), in_span(&m, &rels, &t));
    }
}
