//! The adjoint orbit O(a) ⊂ g and its cotangent bundle, realized as
//! T*O(a) = {(x, p) : x = Ad_g a, p ∈ ann(x)^⊥} ⊂ g × g.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liealg::{AlgebraVector, LieAlgebraSpec};
use crate::numeric::{self, RankInfo};

/// Default relative threshold for kernel detection of ad_x.
pub const KERNEL_TOL: f64 = 1e-9;

/// Tolerance of the phase-point membership and cotangent checks.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Orthonormal basis of ann(x) = ker ad_x together with the rank decision.
#[derive(Debug, Clone)]
pub struct AnnBasis {
    pub vectors: Vec<AlgebraVector>,
    pub rank: RankInfo,
    /// Set when a singular value lies within a factor 10 of the threshold.
    pub degenerate: bool,
}

impl AnnBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }
}

/// Re-orthonormalize Euclidean-orthonormal columns w.r.t. the invariant inner product.
fn gram_orthonormal(spec: &LieAlgebraSpec, cols: &DMatrix<f64>) -> Vec<AlgebraVector> {
    if cols.ncols() == 0 {
        return Vec::new();
    }
    let s = cols.transpose() * spec.gram() * cols;
    let chol = s.cholesky().expect("gram restricted to a subspace is positive definite");
    let l_inv_t = chol.l().try_inverse().expect("cholesky factor is invertible").transpose();
    let basis = cols * l_inv_t;
    basis.column_iter().map(|c| AlgebraVector(c.into_owned())).collect()
}

/// Orthonormal basis of ann(x), with the kernel detected by singular values
/// below `tol` times the largest singular value of ad_x.
pub fn ann_basis(spec: &LieAlgebraSpec, x: &AlgebraVector, tol: f64) -> Result<AnnBasis> {
    spec.check(x)?;
    if x.0.amax() == 0.0 {
        return Err(Error::Input("ann_basis needs a nonzero element".into()));
    }
    let (ker, rank) = numeric::kernel(&spec.ad_operator(x), tol, None);
    let smax = rank.singular_values.first().copied().unwrap_or(0.0);
    let degenerate = rank
        .singular_values
        .iter()
        .any(|&s| s > tol * smax / 10.0 && s < tol * smax * 10.0);
    Ok(AnnBasis {
        vectors: gram_orthonormal(spec, &ker),
        rank,
        degenerate,
    })
}

/// Orthogonal projection of `y` onto span(basis), or onto its orthogonal
/// complement. The basis must be orthonormal for ⟨·,·⟩.
pub fn project(spec: &LieAlgebraSpec, y: &AlgebraVector, basis: &[AlgebraVector], onto_complement: bool) -> AlgebraVector {
    let mut onto = spec.zero();
    for v in basis {
        onto += &v.scale(spec.ip(y, v));
    }
    if onto_complement {
        y - &onto
    } else {
        onto
    }
}

/// A point of the embedded cotangent bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: AlgebraVector,
    pub p: AlgebraVector,
}

impl PhasePoint {
    pub fn new(x: AlgebraVector, p: AlgebraVector) -> Self {
        Self { x, p }
    }

    /// Flat state vector `[x; p]`.
    pub fn to_state(&self) -> DVector<f64> {
        let d = self.x.dim();
        let mut v = DVector::zeros(2 * d);
        v.rows_mut(0, d).copy_from(&self.x.0);
        v.rows_mut(d, d).copy_from(&self.p.0);
        v
    }

    pub fn from_state(v: &DVector<f64>) -> Self {
        let d = v.len() / 2;
        Self::new(AlgebraVector(v.rows(0, d).into_owned()), AlgebraVector(v.rows(d, d).into_owned()))
    }
}

/// Serialized form of a phase point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePointRecord {
    pub algebra: String,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// Invariant values p_j(a) of the orbit seed.
    pub seed_invariants: Vec<f64>,
}

/// Coordinate matrix of Ad_{g0} for the group element used to sample a point,
/// kept so that closed-form curves through the point can be evaluated.
#[derive(Debug, Clone)]
pub struct Witness {
    pub ad: DMatrix<f64>,
    pub ad_inv: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct OrbitSample {
    pub x: AlgebraVector,
    pub witness: Witness,
}

/// Residuals of the two phase-point constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintResiduals {
    /// max_j |p_j(x) − p_j(a)| / max(1, |p_j(a)|)
    pub orbit: f64,
    /// |pr_ann(x) p|
    pub cotangent: f64,
}

impl ConstraintResiduals {
    pub fn max(&self) -> f64 {
        self.orbit.max(self.cotangent)
    }
}

/// The orbit O(a) with cached data about its seed.
#[derive(Debug, Clone)]
pub struct OrbitContext {
    algebra: Arc<LieAlgebraSpec>,
    seed: AlgebraVector,
    ann_seed: AnnBasis,
    orbit_dim: usize,
    kernel_tol: f64,
    seed_invariants: Vec<f64>,
}

impl OrbitContext {
    pub fn new(algebra: Arc<LieAlgebraSpec>, seed: AlgebraVector) -> Result<Self> {
        Self::with_tol(algebra, seed, KERNEL_TOL)
    }

    pub fn with_tol(algebra: Arc<LieAlgebraSpec>, seed: AlgebraVector, kernel_tol: f64) -> Result<Self> {
        algebra.invariant_polynomials()?;
        let ann_seed = ann_basis(&algebra, &seed, kernel_tol)?;
        let orbit_dim = algebra.dim() - ann_seed.dim();
        if !orbit_dim.is_multiple_of(2) {
            return Err(Error::Numerical(format!("odd orbit dimension {orbit_dim}; kernel detection failed")));
        }
        let seed_invariants = algebra.invariant_values(&seed);
        Ok(Self {
            algebra,
            seed,
            ann_seed,
            orbit_dim,
            kernel_tol,
            seed_invariants,
        })
    }

    pub fn algebra(&self) -> &LieAlgebraSpec {
        &self.algebra
    }

    pub fn algebra_arc(&self) -> &Arc<LieAlgebraSpec> {
        &self.algebra
    }

    pub fn seed(&self) -> &AlgebraVector {
        &self.seed
    }

    pub fn ann_seed(&self) -> &AnnBasis {
        &self.ann_seed
    }

    pub fn ann_dim(&self) -> usize {
        self.ann_seed.dim()
    }

    pub fn orbit_dim(&self) -> usize {
        self.orbit_dim
    }

    /// Dimension of T*O(a).
    pub fn phase_dim(&self) -> usize {
        2 * self.orbit_dim
    }

    pub fn kernel_tol(&self) -> f64 {
        self.kernel_tol
    }

    pub fn seed_invariants(&self) -> &[f64] {
        &self.seed_invariants
    }

    /// True when a is a regular element of g.
    pub fn is_regular(&self) -> bool {
        self.ann_dim() == self.algebra.rank()
    }

    /// Orthonormal basis of ann(x) of the dimension found at the seed.
    ///
    /// The dimension is fixed rather than detected because off-orbit stages of
    /// an integrator can make a singular x slightly regular, which would
    /// change the detected kernel discontinuously.
    pub fn ann_at(&self, x: &AlgebraVector) -> Vec<AlgebraVector> {
        let cols = numeric::smallest_right_singular(&self.algebra.ad_operator(x), self.ann_dim());
        gram_orthonormal(&self.algebra, &cols)
    }

    /// x = Ad_{exp ξ} a with ξ componentwise standard normal.
    pub fn random_orbit_point(&self, rng_seed: u64) -> OrbitSample {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let d = self.algebra.dim();
        let xi = AlgebraVector(DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng)));
        let ad = self.algebra.adjoint_matrix(&xi, 1.0);
        let ad_inv = self.algebra.adjoint_matrix(&xi, -1.0);
        let x = AlgebraVector(&ad * &self.seed.0);
        OrbitSample { x, witness: Witness { ad, ad_inv } }
    }

    /// Gaussian vector projected onto ann(x)^⊥.
    pub fn cotangent_sample(&self, x: &AlgebraVector, rng_seed: u64) -> AlgebraVector {
        // Distinct stream from `random_orbit_point` for equal seeds.
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed ^ 0x9e37_79b9_7f4a_7c15);
        let v = AlgebraVector(DVector::from_fn(self.algebra.dim(), |_, _| StandardNormal.sample(&mut rng)));
        self.project_cotangent(x, &v)
    }

    /// Projection of an arbitrary vector onto the cotangent space ann(x)^⊥.
    pub fn project_cotangent(&self, x: &AlgebraVector, v: &AlgebraVector) -> AlgebraVector {
        project(&self.algebra, v, &self.ann_at(x), true)
    }

    /// A random phase point: orbit sample plus cotangent sample.
    pub fn random_phase_point(&self, rng_seed: u64) -> (PhasePoint, Witness) {
        let sample = self.random_orbit_point(rng_seed);
        let p = self.cotangent_sample(&sample.x, rng_seed);
        (PhasePoint::new(sample.x, p), sample.witness)
    }

    /// The unique p ∈ ann(x)^⊥ with [x, p] = m.
    pub fn recover_p(&self, x: &AlgebraVector, m: &AlgebraVector) -> Result<AlgebraVector> {
        let spec = &*self.algebra;
        spec.check(x)?;
        spec.check(m)?;
        let ann = self.ann_at(x);
        let along = project(spec, m, &ann, false);
        let residual = spec.norm(&along);
        if residual > 1e-8 * spec.norm(m).max(1.0) {
            return Err(Error::InconsistentMomentum { residual });
        }
        let p = AlgebraVector(numeric::pinv_solve(&spec.ad_operator(x), &m.0, self.kernel_tol));
        Ok(project(spec, &p, &ann, true))
    }

    pub fn orbit_residual(&self, x: &AlgebraVector) -> f64 {
        self.algebra
            .invariant_values(x)
            .iter()
            .zip(&self.seed_invariants)
            .map(|(v, s)| (v - s).abs() / s.abs().max(1.0))
            .fold(0.0, f64::max)
    }

    pub fn cotangent_residual(&self, x: &AlgebraVector, p: &AlgebraVector) -> f64 {
        self.algebra.norm(&project(&self.algebra, p, &self.ann_at(x), false))
    }

    pub fn residuals(&self, pt: &PhasePoint) -> ConstraintResiduals {
        ConstraintResiduals {
            orbit: self.orbit_residual(&pt.x),
            cotangent: self.cotangent_residual(&pt.x, &pt.p),
        }
    }

    /// Both phase-point invariants at [`MEMBERSHIP_TOL`].
    pub fn contains(&self, pt: &PhasePoint) -> bool {
        self.residuals(pt).max() < MEMBERSHIP_TOL
    }

    /// Pull a drifted point back onto T*O(a): one Gauss-Newton step on the
    /// invariant residuals, then p is re-projected onto ann(x)^⊥.
    ///
    /// Gradients of invariants at x lie in ann(x), the normal space of the
    /// orbit, so the correction moves x transversally to the orbit.
    pub fn project_phase_point(&self, pt: &mut PhasePoint) {
        let spec = &*self.algebra;
        let polys = spec.invariant_polynomials().expect("checked at construction");
        let d = spec.dim();
        let r = polys.len();
        let values = spec.invariant_values(&pt.x);
        let mut jac = DMatrix::zeros(r, d);
        let mut res = DVector::zeros(r);
        for (j, poly) in polys.iter().enumerate() {
            let grad = spec.invariant_gradient(poly, &pt.x);
            let partials = spec.gram() * &grad.0;
            jac.set_row(j, &partials.transpose());
            res[j] = values[j] - self.seed_invariants[j];
        }
        let delta = numeric::pinv_solve(&jac, &res, 1e-10);
        pt.x.0 -= delta;
        pt.p = self.project_cotangent(&pt.x, &pt.p);
    }

    pub fn record(&self, pt: &PhasePoint) -> PhasePointRecord {
        PhasePointRecord {
            algebra: self.algebra.name().to_string(),
            x: pt.x.as_slice().to_vec(),
            p: pt.p.as_slice().to_vec(),
            seed_invariants: self.seed_invariants.clone(),
        }
    }

    pub fn from_record(&self, rec: &PhasePointRecord) -> Result<PhasePoint> {
        if rec.algebra != self.algebra.name() {
            return Err(Error::Input(format!("phase point belongs to {}, not {}", rec.algebra, self.algebra.name())));
        }
        Ok(PhasePoint::new(self.algebra.vector(&rec.x)?, self.algebra.vector(&rec.p)?))
    }

    /// Smallest dim ann(x) over `samples` orbit points, used as the reference
    /// for genericity decisions.
    pub fn minimal_ann_dim(&self, samples: usize) -> usize {
        (0..samples as u64)
            .filter_map(|s| ann_basis(&self.algebra, &self.random_orbit_point(s).x, self.kernel_tol).ok())
            .map(|b| b.dim())
            .min()
            .unwrap_or(self.ann_dim())
    }
}
