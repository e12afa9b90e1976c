use std::sync::Arc;

use super::*;
use crate::dynamics::MagneticSetup;
use crate::integrals::{default_lambda_grid, family_semidirect, s2_pendulum_family, FamilyKind, Member};
use crate::liealg::lie_poisson;
use crate::liealg::BracketKind;

fn so3_ctx() -> OrbitContext {
    let so3 = Arc::new(LieAlgebraSpec::so(3).unwrap());
    let a = so3.basis_vector(2);
    OrbitContext::new(so3, a).unwrap()
}

fn su3_ctx(a: &[f64]) -> OrbitContext {
    let su3 = Arc::new(LieAlgebraSpec::su(3).unwrap());
    let mut coords = vec![0.0; 8];
    coords[..2].copy_from_slice(a);
    OrbitContext::new(su3.clone(), su3.vector(&coords).unwrap()).unwrap()
}

/// A regular element of the Cartan subalgebra, which contains ann(a) for the seeds used here.
fn cartan_b(ctx: &OrbitContext) -> AlgebraVector {
    let spec = ctx.algebra();
    let mut coords = vec![0.0; spec.dim()];
    if spec.is_so3() {
        coords[2] = 0.9;
    } else {
        coords[0] = 0.3;
        coords[1] = -0.8;
    }
    spec.vector(&coords).unwrap()
}

#[test]
fn pencil_forms_are_antisymmetric_and_bilinear() {
    let ctx = su3_ctx(&[1.0, 0.5]);
    let spec = ctx.algebra();
    let b = cartan_b(&ctx);
    let (pt, _) = ctx.random_phase_point(0);
    let mu = theta_map(spec, &pt, 0.7);
    let form = pencil_form(spec, &mu, 0.3, -1.2, &b).unwrap();
    assert_eq!(form.antisymmetry_residual(), 0.0);
    assert!(form.matrix.iter().all(|v| v.is_finite()));
    let f = ComplexAlgebraVector::new(ctx.random_orbit_point(1).x, ctx.random_orbit_point(2).x);
    let g = ComplexAlgebraVector::new(ctx.random_orbit_point(3).x, ctx.random_orbit_point(4).x);
    let direct = 0.3 * lie_poisson(spec, BracketKind::Theta, &mu, &f, &g, None).unwrap()
        - 1.2 * (lie_poisson(spec, BracketKind::G0, &mu, &f, &g, None).unwrap() + lie_poisson(spec, BracketKind::Ib, &mu, &f, &g, Some(&b)).unwrap());
    assert!((form.apply(&f, &g) - direct).abs() < 1e-12);
    let zero = PencilForm { matrix: DMatrix::zeros(16, 16), ..form };
    assert_eq!(form_rank(&zero, RANK_TOL).rank, 0);
}

#[test]
fn so3_pencil_kernels() {
    let ctx = so3_ctx();
    let spec = ctx.algebra();
    let mu = orbit_base(&ctx, 1.0);
    let form = pencil_form(spec, &mu, 1.0, 0.0, &cartan_b(&ctx)).unwrap();
    let (ker, info) = numeric::kernel(&form.matrix, RANK_TOL, None);
    assert_eq!(info.rank, 4);
    // ker Λ_{1,0} = ann(a) + i ann(a); ann(a) is spanned by the third basis vector.
    for c in ker.column_iter() {
        assert!(c[0].abs() + c[1].abs() + c[3].abs() + c[4].abs() < 1e-12);
    }
    let form = pencil_form(spec, &mu, -1.0, 1.0, &cartan_b(&ctx)).unwrap();
    assert_eq!(6 - form_rank(&form, RANK_TOL).rank, 2);
}

#[test]
fn condition_a1_holds() {
    for (ctx, rank) in [(so3_ctx(), 4), (su3_ctx(&[1.0, 0.5]), 12)] {
        let report = condition_a1(&ctx, 0.7, &cartan_b(&ctx), &default_lambda_grid(ctx.algebra())).unwrap();
        assert_eq!(report.expected_rank, rank);
        assert!(report.holds, "{report:?}");
        assert!(report.samples.iter().any(|s| (s.lambda1, s.lambda2) == (-1.0, 1.0)));
    }
}

#[test]
fn condition_a2_holds_for_regular_b() {
    for (ctx, dim_k) in [(so3_ctx(), 2), (su3_ctx(&[1.0, 0.5]), 4)] {
        let report = condition_a2(&ctx, 0.7, &cartan_b(&ctx)).unwrap();
        assert_eq!(report.dim_k, dim_k, "{report:?}");
        assert!(report.holds && report.b_regular && report.warnings.is_empty(), "{report:?}");
        let degenerate = condition_a2(&ctx, 0.7, &ctx.algebra().zero()).unwrap();
        assert_eq!(degenerate.dim_k, 2 * ctx.ann_dim());
        assert_eq!(degenerate.dim_k, degenerate.kernel_dim);
        assert!(!degenerate.holds && !degenerate.b_regular);
    }
}

#[test]
fn rank_is_constant_along_the_pencil() {
    let ctx = su3_ctx(&[1.0, 0.5]);
    let spec = ctx.algebra();
    let lambdas: Vec<f64> = (0..10).map(|k| 0.25 + 0.3 * k as f64).collect();
    for seed in 0..5 {
        let mu = theta_map(spec, &ctx.random_phase_point(seed).0, 0.7);
        let ranks = rank_profile(spec, &mu, &cartan_b(&ctx), &lambdas);
        assert!(ranks.iter().all(|r| r.rank == 12 && !r.ambiguous), "{ranks:?}");
    }
}

#[test]
fn shifted_invariants_commute_under_the_v_pencil() {
    for ctx in [so3_ctx(), su3_ctx(&[1.0, 0.5]), su3_ctx(&[0.0, 1.0])] {
        let spec = ctx.algebra();
        let r = spec.rank();
        for seed in 0..5 {
            let x = ctx.random_orbit_point(seed).x;
            let eta = project(spec, &ctx.cotangent_sample(&x, seed), &ctx.ann_seed().vectors, true);
            let grads: Vec<AlgebraVector> = [0.0, 0.5, 1.4, -0.8]
                .iter()
                .flat_map(|&l| (1..=r).map(move |j| (j, l)))
                .map(|(j, l)| shifted_invariant_gradient(&ctx, j, l, &eta).unwrap())
                .collect();
            for eps in [0.0, 0.5, 1.0] {
                for f in &grads {
                    assert!(v_pencil_bracket(spec, &eta, eps, ctx.seed(), f, f).abs() < 1e-14);
                    for g in &grads {
                        assert!(v_pencil_bracket(spec, &eta, eps, ctx.seed(), f, g).abs() < 1e-10);
                    }
                }
            }
            let (f, g) = (&ctx.random_orbit_point(50).x, &ctx.random_orbit_point(51).x);
            let slope = v_pencil_bracket(spec, &eta, 1.0, ctx.seed(), f, g) - v_pencil_bracket(spec, &eta, 0.0, ctx.seed(), f, g);
            assert!((slope - a_bracket(spec, ctx.seed(), f, g)).abs() < 1e-12);
        }
    }
}

#[test]
fn ddim_dind_examples() {
    let so3 = so3_ctx();
    let setup = MagneticSetup::new(1.0, cartan_b(&so3));
    let pair = s2_pendulum_family(so3.algebra(), &setup).unwrap();
    let r = ddim_dind(so3.algebra(), &pair, &so3.random_phase_point(0).0);
    assert_eq!((r.ddim, r.dind), (2, 2));

    let su3 = su3_ctx(&[1.0, 0.5]);
    let spec = su3.algebra();
    let family = family_semidirect(spec, &cartan_b(&su3), &default_lambda_grid(spec), 0.7).unwrap();
    let r = ddim_dind(spec, &family, &su3.random_phase_point(0).0);
    assert_eq!((r.ddim, r.dind), (6, 6), "{r:?}");

    let constant = IntegralFamily::new(FamilyKind::Custom, 0.7, vec![Member::Constant { value: 3.0 }]).unwrap();
    let r = ddim_dind(spec, &constant, &su3.random_phase_point(0).0);
    assert_eq!((r.ddim, r.dind), (0, 0));
}

#[test]
fn completeness_reports() {
    let so3 = so3_ctx();
    let setup = MagneticSetup::new(1.0, cartan_b(&so3));
    let pair = s2_pendulum_family(so3.algebra(), &setup).unwrap();
    let report = completeness_report(&pair, &so3, 20, 0);
    assert!(report.verdict && report.ddim + report.dind == 4, "{report:?}");

    let su3 = su3_ctx(&[1.0, 0.5]);
    let spec = su3.algebra();
    let grid = default_lambda_grid(spec);
    let family = family_semidirect(spec, &cartan_b(&su3), &grid, 0.7).unwrap();
    let report = completeness_report(&family, &su3, 20, 0);
    assert!(report.verdict && report.ddim + report.dind == 12 && report.outliers.is_empty(), "{report:?}");
    assert!(report.min_gap_ddim > 1e3 && report.min_gap_bracket > 1e3, "{report:?}");

    let truncated = family.restrict_lambdas(&grid[..1]);
    let report = completeness_report(&truncated, &su3, 20, 0);
    assert!(!report.verdict && report.ddim + report.dind < 12, "{report:?}");

    let sequential = completeness_report_with(&family, &su3, 8, 3, Exec::Sequential);
    let parallel = completeness_report_with(&family, &su3, 8, 3, Exec::Parallel);
    assert_eq!(sequential, parallel);
}

#[test]
fn dropping_members_never_overshoots() {
    let su3 = su3_ctx(&[1.0, 0.5]);
    let spec = su3.algebra();
    let family = family_semidirect(spec, &cartan_b(&su3), &default_lambda_grid(spec), 0.7).unwrap();
    let pt = su3.random_phase_point(4).0;
    let mut previous = 0;
    for n in 1..=family.len() {
        let sub = IntegralFamily { members: family.members[..n].to_vec(), ..family.clone() };
        let r = ddim_dind(spec, &sub, &pt);
        assert!(r.ddim >= previous && r.ddim <= previous + 1);
        assert!(r.ddim + r.dind <= 12 && r.dind <= r.ddim);
        previous = r.ddim;
    }
    assert_eq!(previous, 6);
}

#[test]
fn singular_orbit_completeness() {
    let ctx = su3_ctx(&[0.0, 1.0]);
    let spec = ctx.algebra();
    let family = family_semidirect(spec, &cartan_b(&ctx), &default_lambda_grid(spec), 0.7).unwrap();
    let report = completeness_report(&family, &ctx, 20, 0);
    assert_eq!(report.phase_dim, 8);
    assert!(report.verdict, "{report:?}");
    assert!(!report.warnings.is_empty());
}

#[test]
fn tori_dimensions() {
    let so3 = so3_ctx();
    let report = tori_dimension(&so3, &[0.5, 1.0], 20, 0).unwrap();
    assert_eq!(report.dimension, 1);
    assert!(report.epsilon_independent);
    let su3 = su3_ctx(&[1.0, 0.5]);
    let report = tori_dimension(&su3, &[0.0, 0.7, 2.0], 20, 0).unwrap();
    assert_eq!(report.dimension, 2);
    assert!(report.epsilon_independent && report.warnings.is_empty(), "{report:?}");
    let at = tori_dimension_at(&su3, su3.seed()).unwrap();
    assert_eq!(at.dimension, 0);
    assert!(!at.generic);
}
