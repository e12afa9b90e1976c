use super::*;
use proptest::prelude::*;
use std::f64::consts::FRAC_PI_2;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_vec(spec: &LieAlgebraSpec, rng: &mut ChaCha8Rng) -> AlgebraVector {
    AlgebraVector(DVector::from_fn(spec.dim(), |_, _| StandardNormal.sample(rng)))
}

fn shipped() -> Vec<LieAlgebraSpec> {
    vec![
        LieAlgebraSpec::so(3).unwrap(),
        LieAlgebraSpec::so(4).unwrap(),
        LieAlgebraSpec::so(5).unwrap(),
        LieAlgebraSpec::su(2).unwrap(),
        LieAlgebraSpec::su(3).unwrap(),
        LieAlgebraSpec::su(4).unwrap(),
    ]
}

/// Coordinates via the trace form, independent of the least-squares path.
/// Valid because shipped bases are orthogonal for −Re tr(XY).
fn trace_coords(spec: &LieAlgebraSpec, m: &CMatrix) -> DVector<f64> {
    DVector::from_fn(spec.dim(), |k, _| {
        let b = &spec.basis()[k];
        -(m * b).trace().re / -(b * b).trace().re
    })
}

#[test]
fn so3_bracket_is_cross_product() {
    let so3 = LieAlgebraSpec::so(3).unwrap();
    let e = |k| so3.basis_vector(k);
    let close = |a: AlgebraVector, b: AlgebraVector| (a.0 - b.0).amax() < 1e-15;
    assert!(close(so3.bracket(&e(0), &e(1)).unwrap(), e(2)));
    assert!(close(so3.bracket(&e(1), &e(2)).unwrap(), e(0)));
    assert!(close(so3.bracket(&e(2), &e(0)).unwrap(), e(1)));
    let x = so3.vector(&[0.3, -1.2, 0.7]).unwrap();
    let y = so3.vector(&[2.0, 0.5, -0.4]).unwrap();
    let cross = x.0.cross(&y.0);
    assert!((so3.bracket(&x, &y).unwrap().0 - cross).norm() < 1e-15);
}

#[test]
fn bracket_with_itself_vanishes() {
    for spec in shipped() {
        let x = random_vec(&spec, &mut rng(1));
        assert!(spec.bracket(&x, &x).unwrap().0.amax() < 1e-14, "{}", spec.name());
    }
}

#[test]
fn bracket_matches_matrix_commutator_oracle() {
    for spec in shipped() {
        let mut r = rng(7);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let x = random_vec(&spec, &mut r);
            let y = random_vec(&spec, &mut r);
            let (mx, my) = (spec.to_matrix(&x), spec.to_matrix(&y));
            let oracle = trace_coords(&spec, &(&mx * &my - &my * &mx));
            worst = worst.max((spec.bracket(&x, &y).unwrap().0 - oracle).amax());
        }
        assert!(worst < 1e-12, "{}: {worst:e}", spec.name());
    }
}

#[test]
fn structure_constants_satisfy_identities() {
    for spec in shipped() {
        let v = spec.validate();
        assert_eq!(v.antisymmetry, 0.0, "{}", spec.name());
        assert!(v.jacobi < 1e-12, "{}: {:e}", spec.name(), v.jacobi);
        assert!(v.ad_invariance < 1e-12, "{}: {:e}", spec.name(), v.ad_invariance);
        assert!(v.min_gram_eigenvalue > 0.0);
        assert!(v.commutator_residual < 1e-12);
    }
}

#[test]
fn ranks_and_dimensions_of_shipped_algebras() {
    let expect = [(3, 1), (6, 2), (10, 2), (3, 1), (8, 2), (15, 3)];
    for (spec, (d, r)) in shipped().iter().zip(expect) {
        assert_eq!((spec.dim(), spec.rank()), (d, r), "{}", spec.name());
        assert_eq!(spec.invariant_polynomials().unwrap().len(), r);
    }
}

#[test]
fn gram_is_identity_for_normalized_bases() {
    for spec in shipped() {
        let id = DMatrix::<f64>::identity(spec.dim(), spec.dim());
        assert!((spec.gram() - id).amax() < 1e-12, "{}", spec.name());
    }
    let so3 = LieAlgebraSpec::so(3).unwrap();
    assert!((so3.inner(&so3.basis_vector(0), &so3.basis_vector(0)).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn inner_is_positive_and_ad_invariant() {
    for spec in shipped() {
        let mut r = rng(11);
        for _ in 0..50 {
            let (x, y, z) = (random_vec(&spec, &mut r), random_vec(&spec, &mut r), random_vec(&spec, &mut r));
            assert!(spec.inner(&x, &x).unwrap() > 0.0);
            let lhs = spec.inner(&spec.bracket(&z, &x).unwrap(), &y).unwrap();
            let rhs = -spec.inner(&x, &spec.bracket(&z, &y).unwrap()).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}

#[test]
fn dimension_mismatch_is_an_input_error() {
    let so3 = LieAlgebraSpec::so(3).unwrap();
    let bad = AlgebraVector::zeros(4);
    assert!(matches!(so3.bracket(&bad, &so3.zero()), Err(Error::DimensionMismatch { expected: 3, found: 4 })));
    assert!(so3.inner(&so3.zero(), &bad).is_err());
}

#[test]
fn ad_operator_properties() {
    let so3 = LieAlgebraSpec::so(3).unwrap();
    assert_eq!(so3.ad_operator(&so3.zero()), DMatrix::zeros(3, 3));
    let (ker, info) = numeric::kernel(&so3.ad_operator(&so3.basis_vector(2)), numeric::RANK_TOL, None);
    assert_eq!(info.rank, 2);
    assert!((ker[(2, 0)].abs() - 1.0).abs() < 1e-14);
    for spec in shipped() {
        let mut r = rng(3);
        for _ in 0..20 {
            let x = random_vec(&spec, &mut r);
            let y = random_vec(&spec, &mut r);
            assert!(spec.ad_operator(&x).trace().abs() < 1e-12);
            assert!((spec.ad_operator(&x) * &y.0 - spec.bracket(&x, &y).unwrap().0).amax() < 1e-14);
        }
    }
}

#[test]
fn group_adjoint_rotates_so3() {
    let so3 = LieAlgebraSpec::so(3).unwrap();
    let e = |k| so3.basis_vector(k);
    let y = so3.group_adjoint(&e(2), FRAC_PI_2, &e(0)).unwrap();
    assert!((y.0 - e(1).0).amax() < 1e-12);
    let y0 = so3.group_adjoint(&e(2), 0.0, &e(0)).unwrap();
    assert_eq!(y0, e(0));
}

#[test]
fn invariants_of_so3_and_su3() {
    let so3 = LieAlgebraSpec::so(3).unwrap();
    let x = so3.vector(&[0.4, -1.1, 2.0]).unwrap();
    let p = so3.invariant_values(&x);
    assert_eq!(p.len(), 1);
    assert!((p[0] - so3.inner(&x, &x).unwrap()).abs() < 1e-13);

    let su3 = LieAlgebraSpec::su(3).unwrap();
    let polys = su3.invariant_polynomials().unwrap();
    assert_eq!(polys.iter().map(|p| p.degree).collect::<Vec<_>>(), vec![2, 3]);
    // Jacobian of (p1, p2) at a regular point.
    let x = su3.vector(&[1.0, 0.5, 0.2, -0.3, 0.1, 0.4, -0.6, 0.25]).unwrap();
    let mut jac = DMatrix::zeros(2, 8);
    for (row, poly) in polys.iter().enumerate() {
        jac.set_row(row, &su3.invariant_gradient(poly, &x).0.transpose());
    }
    assert_eq!(numeric::numerical_rank(&jac, numeric::RANK_TOL, None).rank, 2);
    // Values are real on g.
    for poly in polys {
        assert!(poly.eval(&su3.to_matrix(&x)).im.abs() < 1e-13);
    }
}

#[test]
fn invariant_gradient_lies_in_centralizer() {
    let su3 = LieAlgebraSpec::su(3).unwrap();
    let x = random_vec(&su3, &mut rng(5));
    for poly in su3.invariant_polynomials().unwrap() {
        let g = su3.invariant_gradient(poly, &x);
        assert!(su3.bracket(&g, &x).unwrap().0.amax() < 1e-11);
    }
}

#[test]
fn power_trace_backend_is_invariant() {
    let su3 = LieAlgebraSpec::su_with(3, InvariantBackend::PowerTraces).unwrap();
    let mut r = rng(19);
    let x = random_vec(&su3, &mut r);
    let xi = random_vec(&su3, &mut r);
    let y = su3.group_adjoint(&xi, 0.8, &x).unwrap();
    for (a, b) in su3.invariant_values(&x).iter().zip(su3.invariant_values(&y)) {
        assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
    }
}

#[test]
fn pfaffian_invariant_of_so4_is_ad_invariant() {
    let so4 = LieAlgebraSpec::so(4).unwrap();
    let mut r = rng(23);
    let x = random_vec(&so4, &mut r);
    let xi = random_vec(&so4, &mut r);
    let y = so4.group_adjoint(&xi, 1.3, &x).unwrap();
    let (px, py) = (so4.invariant_values(&x), so4.invariant_values(&y));
    assert!(matches!(so4.invariant_polynomials().unwrap()[1].kind, InvariantKind::Pfaffian));
    for (a, b) in px.iter().zip(&py) {
        assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
    }
}

#[test]
fn theta_bracket_examples() {
    let su3 = LieAlgebraSpec::su(3).unwrap();
    let mut r = rng(29);
    let z = |r: &mut ChaCha8Rng| ComplexAlgebraVector::new(random_vec(&su3, r), random_vec(&su3, r));
    let (z1, z2) = (z(&mut r), z(&mut r));
    let pure1 = ComplexAlgebraVector::new(su3.zero(), z1.im.clone());
    let pure2 = ComplexAlgebraVector::new(su3.zero(), z2.im.clone());
    let t = theta_bracket(&su3, &pure1, &pure2).unwrap();
    assert_eq!(t.re.0.amax(), 0.0);
    assert_eq!(t.im.0.amax(), 0.0);
    let s = theta_bracket(&su3, &z1, &z1).unwrap();
    assert!(s.re.0.amax() < 1e-14 && s.im.0.amax() < 1e-14);
    let t12 = theta_bracket(&su3, &z1, &z2).unwrap();
    assert_eq!(t12.re, su3.bracket(&z1.re, &z2.re).unwrap());
}

#[test]
fn lie_poisson_examples() {
    let su3 = LieAlgebraSpec::su(3).unwrap();
    let mut r = rng(31);
    let mut z = || ComplexAlgebraVector::new(random_vec(&su3, &mut r), random_vec(&su3, &mut r));
    let (mu, gf, gg) = (z(), z(), z());
    let b = random_vec(&su3, &mut rng(32));
    for kind in [BracketKind::G0, BracketKind::Theta, BracketKind::Ib] {
        let same = lie_poisson(&su3, kind, &mu, &gf, &gf, Some(&b)).unwrap();
        assert!(same.abs() < 1e-12);
        let fg = lie_poisson(&su3, kind, &mu, &gf, &gg, Some(&b)).unwrap();
        let gfv = lie_poisson(&su3, kind, &mu, &gg, &gf, Some(&b)).unwrap();
        assert!((fg + gfv).abs() < 1e-12);
    }
    // Functions of η only: gradients have zero re slot.
    let ef = ComplexAlgebraVector::new(su3.zero(), gf.im.clone());
    let eg = ComplexAlgebraVector::new(su3.zero(), gg.im.clone());
    assert!(lie_poisson(&su3, BracketKind::Theta, &mu, &ef, &eg, None).unwrap().abs() < 1e-14);
    // g0 − gθ = ⟨ξ, −[∇_η f, ∇_η g]⟩, with ∇_η = −im slot.
    let g0 = lie_poisson(&su3, BracketKind::G0, &mu, &gf, &gg, None).unwrap();
    let th = lie_poisson(&su3, BracketKind::Theta, &mu, &gf, &gg, None).unwrap();
    let (bf, bg) = (-&gf.im, -&gg.im);
    let expect = -su3.inner(&mu.re, &su3.bracket(&bf, &bg).unwrap()).unwrap();
    assert!((g0 - th - expect).abs() < 1e-12);
    assert!(matches!(lie_poisson(&su3, BracketKind::Ib, &mu, &gf, &gg, None), Err(Error::Input(_))));
}

#[test]
fn theta_lie_poisson_satisfies_jacobi_on_linear_functions() {
    // For linear f, g the bracket {f, g} is linear with gradient [∇f, ∇g]_θ,
    // so the Jacobi identity reduces to the Jacobi identity of g_θ paired with μ.
    for spec in [LieAlgebraSpec::so(3).unwrap(), LieAlgebraSpec::su(3).unwrap()] {
        let mut r = rng(37);
        let mut z = || ComplexAlgebraVector::new(random_vec(&spec, &mut r), random_vec(&spec, &mut r));
        for _ in 0..20 {
            let (mu, u, v, w) = (z(), z(), z(), z());
            let t = |a: &ComplexAlgebraVector, b: &ComplexAlgebraVector| theta_bracket(&spec, a, b).unwrap();
            let lp = |g: &ComplexAlgebraVector, h: &ComplexAlgebraVector| lie_poisson(&spec, BracketKind::Theta, &mu, g, h, None).unwrap();
            let jac = lp(&t(&u, &v), &w) + lp(&t(&v, &w), &u) + lp(&t(&w, &u), &v);
            assert!(jac.abs() < 1e-8);
        }
    }
}

#[test]
fn json_descriptors() {
    let so3 = AlgebraDescriptor::from_json(r#"{"family": "so", "n": 3}"#).unwrap();
    assert_eq!(so3.name(), "so(3)");
    let su2 = AlgebraDescriptor::from_json(
        r#"{"name": "su2-explicit", "invariant_degrees": [2], "basis": [
            [[[0, 0.5], 0], [0, [0, -0.5]]],
            [[0, 0.5], [-0.5, 0]],
            [[0, [0, 0.5]], [[0, 0.5], 0]]
        ]}"#,
    )
    .unwrap();
    assert_eq!((su2.dim(), su2.rank()), (3, 1));
    assert_eq!(su2.invariant_polynomials().unwrap().len(), 1);
    let v = su2.validate();
    assert!(v.jacobi < 1e-12 && v.ad_invariance < 1e-12);
    // Round trip through the descriptor.
    let again = su2.descriptor().build().unwrap();
    assert_eq!(again.dim(), 3);
}

#[test]
fn explicit_basis_without_invariants_is_a_config_error() {
    let so3 = LieAlgebraSpec::so(3).unwrap();
    let spec = LieAlgebraSpec::from_basis("bare", so3.basis().to_vec(), None).unwrap();
    assert!(matches!(spec.invariant_polynomials(), Err(Error::Config(_))));
}

#[test]
fn non_closed_basis_aborts_construction() {
    let so3 = LieAlgebraSpec::so(3).unwrap();
    let basis = so3.basis()[..2].to_vec();
    assert!(matches!(LieAlgebraSpec::from_basis("open", basis, None), Err(Error::Construction { .. })));
}

#[test]
fn abelian_algebra_is_rejected() {
    assert!(LieAlgebraSpec::so(2).is_err());
    let diag = vec![CMatrix::from_diagonal(&DVector::from_vec(vec![Complex::new(0.0, 1.0), Complex::new(0.0, -1.0)]))];
    assert!(matches!(LieAlgebraSpec::from_basis("u1", diag, None), Err(Error::Config(_))));
}

proptest! {
    #[test]
    fn adjoint_preserves_inner_and_invariants(seed in 0u64..10_000, t in -3.0f64..3.0) {
        for spec in [LieAlgebraSpec::so(3).unwrap(), LieAlgebraSpec::su(3).unwrap()] {
            let mut r = rng(seed);
            let xi = random_vec(&spec, &mut r);
            let y = random_vec(&spec, &mut r);
            let z = spec.group_adjoint(&xi, t, &y).unwrap();
            let n0 = spec.inner(&y, &y).unwrap();
            prop_assert!((spec.inner(&z, &z).unwrap() - n0).abs() < 1e-12 * (1.0 + n0));
            for (a, b) in spec.invariant_values(&y).iter().zip(spec.invariant_values(&z)) {
                prop_assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
            }
        }
    }
}
