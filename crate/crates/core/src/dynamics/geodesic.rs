use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{Error, Result};
use crate::orbit::{OrbitContext, PhasePoint, Witness};

/// Closed-form magnetic geodesic through (x0, p0) with x0 = Ad_{g0} a.
///
/// With W = Ad_{g0}, ξ = W⁻¹[x0, p0] and ζ = ξ + εa, the curve is
/// x(t) = W exp(t ad_ζ) a = Ad_{g0 exp(tζ)} a. The momentum
/// Φ_ε = [x, p] + εx is conserved, so p(t) is recovered from [x(t), p(t)] = Φ_ε − εx(t).
pub fn exact_magnetic_geodesic(
    ctx: &OrbitContext,
    x0: &crate::AlgebraVector,
    p0: &crate::AlgebraVector,
    witness: Option<&Witness>,
    epsilon: f64,
    t: f64,
) -> Result<PhasePoint> {
    let w = witness.ok_or_else(|| Error::Unsupported("closed-form geodesic needs the group element that produced x0".into()))?;
    let spec = ctx.algebra();
    spec.check(x0)?;
    spec.check(p0)?;
    let m0 = spec.br(x0, p0);
    let xi = crate::AlgebraVector(&w.ad_inv * &m0.0);
    let zeta = &xi + &ctx.seed().scale(epsilon);
    let y = spec.adjoint_matrix(&zeta, t) * &ctx.seed().0;
    let x = crate::AlgebraVector(&w.ad * y);
    let phi = &m0 + &x0.scale(epsilon);
    let p = ctx.recover_p(&x, &(&phi - &x.scale(epsilon)))?;
    Ok(PhasePoint::new(x, p))
}

/// Circle on the unit sphere of R³ fitted to sample points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleFit {
    pub normal: [f64; 3],
    pub center: [f64; 3],
    /// Euclidean radius in the fitted plane.
    pub chordal_radius: f64,
    /// Distance of the fitted plane from the origin.
    pub plane_offset: f64,
    /// Great-circle radius: the angle between the plane normal and the points.
    pub intrinsic_radius: f64,
    /// Largest distance of a point from the fitted circle.
    pub residual: f64,
}

/// Total-least-squares plane followed by an algebraic circle fit in that plane.
pub fn fit_circle(points: &[Vector3<f64>]) -> Result<CircleFit> {
    if points.len() < 3 {
        return Err(Error::Input("circle fit needs at least three points".into()));
    }
    let unit: Vec<Vector3<f64>> = points.iter().map(|p| p.normalize()).collect();
    let n = unit.len() as f64;
    let centroid = unit.iter().sum::<Vector3<f64>>() / n;
    // Principal axes of the 3×3 scatter matrix; the SVD of the tall point
    // matrix occasionally fails to converge on long trajectories.
    let scatter = unit.iter().fold(Matrix3::zeros(), |acc, p| {
        let d = p - centroid;
        acc + d * d.transpose()
    });
    let eig = SymmetricEigen::new(scatter);
    let order = {
        let mut o = [0usize, 1, 2];
        o.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        o
    };
    let axis = |k: usize| eig.eigenvectors.column(order[k]).into_owned();
    let (e1, e2, normal) = (axis(0), axis(1), axis(2));

    // Kåsa fit: u² + v² + D u + E v + F = 0 in least squares.
    let uv: Vec<(f64, f64)> = unit.iter().map(|p| ((p - centroid).dot(&e1), (p - centroid).dot(&e2))).collect();
    let mut normal_eq = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for &(u, v) in &uv {
        let row = Vector3::new(u, v, 1.0);
        normal_eq += row * row.transpose();
        rhs -= row * (u * u + v * v);
    }
    let sol = normal_eq
        .cholesky()
        .map(|c| c.solve(&rhs))
        .ok_or_else(|| Error::Numerical("circle fit points are collinear".into()))?;
    let (cu, cv) = (-sol[0] / 2.0, -sol[1] / 2.0);
    let chordal = (cu * cu + cv * cv - sol[2]).max(0.0).sqrt();
    let center = centroid + e1 * cu + e2 * cv;
    let offset = center.dot(&normal).abs();
    let residual = unit
        .iter()
        .map(|p| {
            let off_plane = (p - center).dot(&normal);
            let in_plane = (p - center) - normal * off_plane;
            off_plane.abs().max((in_plane.norm() - chordal).abs())
        })
        .fold(0.0, f64::max);
    Ok(CircleFit {
        normal: normal.into(),
        center: center.into(),
        chordal_radius: chordal,
        plane_offset: offset,
        // atan2 stays well conditioned near great circles, where arcsin does not.
        intrinsic_radius: chordal.atan2(offset),
        residual,
    })
}

/// Intrinsic radius of the circle traced by x(t) on the so(3) unit orbit.
pub fn measure_circle_radius(traj: &Trajectory) -> Result<f64> {
    if traj.algebra_dim() != 3 {
        return Err(Error::Unsupported("circle radius is defined on so(3) orbits only".into()));
    }
    let points: Vec<Vector3<f64>> = traj.states.iter().map(|s| Vector3::new(s[0], s[1], s[2])).collect();
    let fit = fit_circle(&points)?;
    if fit.residual > 1e-4 {
        return Err(Error::Shape { residual: fit.residual });
    }
    Ok(fit.intrinsic_radius)
}
