use approx::assert_relative_eq;
use num_complex::Complex;
use pelks_core::numeric::{identity, max_abs, min_hermitian_eigenvalue, random_unitary, CMat};
use pelks_core::symmetric_domains::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn matrix(p: &DomainPoint<f64>) -> &CMat<f64> {
    match p {
        DomainPoint::Siegel(z) => z.matrix(),
        DomainPoint::Hermitian(z) => z.matrix(),
        DomainPoint::Bounded(u) => u.matrix(),
    }
}

fn rel(a: &CMat<f64>, b: &CMat<f64>) -> f64 {
    max_abs(&(a - b)) / (1.0 + max_abs(b))
}

fn samples(rng: &mut ChaCha8Rng) -> Vec<(DomainGroupElement<f64>, DomainGroupElement<f64>, DomainPoint<f64>)> {
    vec![
        (random_symplectic(2, rng), random_symplectic(2, rng), DomainPoint::Siegel(random_siegel_point(2, rng))),
        (random_unitary_j(2, rng), random_unitary_j(2, rng), DomainPoint::Hermitian(random_hermitian_point(2, rng))),
        (random_unitary_ab(2, 1, rng), random_unitary_ab(2, 1, rng), DomainPoint::Bounded(random_bounded_point(2, 1, 0.9, rng))),
    ]
}

#[test]
fn points_enforce_their_invariants() {
    let asym = CMat::from_row_slice(2, 2, &[c(0.0, 1.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
    assert!(SiegelPoint::new(asym).is_err());
    assert!(HermitianPoint::new(CMat::from_element(1, 1, c(3.0, -0.5))).is_err());
    assert!(BoundedPoint::new(CMat::from_element(1, 2, c(0.8, 0.0))).is_err());
    assert!(BoundedPoint::new(CMat::from_element(1, 2, c(0.5, 0.0))).is_ok());
}

#[test]
fn identity_acts_trivially() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (g, _, z) in samples(&mut rng) {
        let id = DomainGroupElement::identity(g.matrix().nrows(), g.tag());
        let w = moebius_act(&id, &z).unwrap();
        assert!(rel(matrix(&w), matrix(&z)) < 1e-14);
    }
}

#[test]
fn inversion_fixes_i() {
    for r in 1..=3 {
        let mut g = CMat::<f64>::zeros(2 * r, 2 * r);
        for k in 0..r {
            g[(k, r + k)] = c(-1.0, 0.0);
            g[(r + k, k)] = c(1.0, 0.0);
        }
        let g = DomainGroupElement::new(g, DomainTag::Symplectic).unwrap();
        let z = SiegelPoint::<f64>::i_identity(r);
        // −Z⁻¹ at Z = i·1 is i·1
        let w = moebius_act(&g, &DomainPoint::Siegel(z.clone())).unwrap();
        assert!(rel(matrix(&w), z.matrix()) < 1e-14);
    }
}

#[test]
fn action_is_associative_and_preserves_domains() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        for (g1, g2, z) in samples(&mut rng) {
            let lhs = moebius_act(&g1.compose(&g2).unwrap(), &z).unwrap();
            let rhs = moebius_act(&g1, &moebius_act(&g2, &z).unwrap()).unwrap();
            assert!(rel(matrix(&lhs), matrix(&rhs)) < 1e-10);
        }
    }
}

#[test]
fn ill_conditioned_denominator_is_reported() {
    // diag(A, A⁻ᵀ) with A = diag(1e7, 1e-7): CZ + D = A⁻ᵀ has condition 1e14
    let mut g = CMat::<f64>::zeros(4, 4);
    g[(0, 0)] = c(1e7, 0.0);
    g[(1, 1)] = c(1e-7, 0.0);
    g[(2, 2)] = c(1e-7, 0.0);
    g[(3, 3)] = c(1e7, 0.0);
    let g = DomainGroupElement::new(g, DomainTag::Symplectic).unwrap();
    let z = DomainPoint::Siegel(SiegelPoint::i_identity(2));
    assert!(matches!(moebius_act(&g, &z), Err(DomainError::NearSingularDenominator(_))));
}

#[test]
fn tags_must_match() {
    let g = DomainGroupElement::<f64>::identity(4, DomainTag::Symplectic);
    let z = DomainPoint::Hermitian(HermitianPoint::i_identity(2));
    assert_eq!(moebius_act(&g, &z).unwrap_err(), DomainError::TagMismatch);
}

#[test]
fn non_group_elements_are_rejected() {
    let g = identity::<f64>(4) * c(2.0, 0.0);
    assert!(matches!(DomainGroupElement::new(g, DomainTag::Symplectic), Err(DomainError::NotInGroup(_))));
}

#[test]
fn cayley_origin_roundtrip_and_positivity() {
    let z = cayley(&BoundedPoint::<f64>::origin(3, 3)).unwrap();
    assert!(rel(z.matrix(), HermitianPoint::<f64>::i_identity(3).matrix()) < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for b in 1..=3 {
        for _ in 0..50 {
            let u = random_bounded_point::<f64, _>(b, b, 0.99, &mut rng);
            let z = cayley(&u).unwrap();
            assert!(min_hermitian_eigenvalue(&z.y()) > 0.0);
            let back = cayley_inverse(&z).unwrap();
            assert!(max_abs(&(back.matrix() - u.matrix())) < 1e-12);
        }
    }
}

#[test]
fn cayley_rejects_boundary_points() {
    // U = 1 − 1e-15 is inside numerically but 1 − U*U falls under the membership floor
    assert!(BoundedPoint::new(CMat::from_element(1, 1, c(1.0 - 1e-15, 0.0))).is_err());
}

#[test]
fn stabilizers_fix_base_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in 1..=3 {
        for _ in 0..20 {
            let k = random_unitary::<f64, _>(n, &mut rng);
            let g = siegel_stabilizer(&k).unwrap();
            let z = SiegelPoint::i_identity(n);
            let w = moebius_act(&g, &DomainPoint::Siegel(z.clone())).unwrap();
            assert!(rel(matrix(&w), z.matrix()) < 1e-12);

            let k1 = random_unitary::<f64, _>(n, &mut rng);
            let k2 = random_unitary::<f64, _>(n, &mut rng);
            let h = hermitian_stabilizer(&k1, &k2).unwrap();
            let zi = HermitianPoint::i_identity(n);
            let w = moebius_act(&h, &DomainPoint::Hermitian(zi.clone())).unwrap();
            assert!(rel(matrix(&w), zi.matrix()) < 1e-12);

            let bs = bounded_stabilizer(&k1, &k2).unwrap();
            let w = moebius_act(&bs, &DomainPoint::Bounded(BoundedPoint::origin(n, n))).unwrap();
            assert!(max_abs(matrix(&w)) < 1e-14);

            // Cayley intertwines the two stabilizers
            let u = random_bounded_point::<f64, _>(n, n, 0.9, &mut rng);
            let DomainPoint::Bounded(ku) = moebius_act(&bs, &DomainPoint::Bounded(u.clone())).unwrap() else { panic!() };
            let lhs = cayley(&ku).unwrap();
            let rhs = moebius_act(&h, &DomainPoint::Hermitian(cayley(&u).unwrap())).unwrap();
            assert!(rel(lhs.matrix(), matrix(&rhs)) < 1e-10);
        }
    }
}

#[test]
fn petersson_closed_forms() {
    let z = CMat::from_element(1, 1, c(0.7, 2.5));
    assert_relative_eq!(petersson_norm(PeterssonType::C, std::slice::from_ref(&z), 1).unwrap(), 5.0, max_relative = 1e-14);
    for r in [2usize, 4, 6] {
        let zi = HermitianPoint::<f64>::i_identity(r / 2).matrix().clone();
        let v = petersson_norm(PeterssonType::A, &[zi], r).unwrap();
        assert_relative_eq!(v, 2f64.powf((r * r) as f64 / 4.0), max_relative = 1e-14);
    }
    let bad = CMat::from_element(1, 1, c(0.0, -1.0));
    assert!(petersson_norm(PeterssonType::C, &[bad], 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn type_c_petersson_scales_with_y(seed in any::<u64>(), scale in 0.1f64..10.0, g in 1usize..3, r in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<CMat<f64>> = (0..g).map(|_| random_siegel_point::<f64, _>(r, &mut rng).matrix().clone()).collect();
        let scaled: Vec<CMat<f64>> = pts.iter().map(|z| z.map(|w| c(w.re, w.im * scale))).collect();
        let a = petersson_norm(PeterssonType::C, &pts, r).unwrap();
        let b = petersson_norm(PeterssonType::C, &scaled, r).unwrap();
        let expected = scale.powf((g * r * (r + 1)) as f64 / 2.0);
        prop_assert!((b / a / expected - 1.0).abs() < 1e-10);
    }
}
