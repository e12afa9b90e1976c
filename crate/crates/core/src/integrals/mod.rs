//! Conserved quantities: the momentum map Φ_ε, Hamiltonians, the map Θ_ε into
//! g_θ, argument-shift families, the semidirect family and the Lax pair.
//!
//! Every family member is a function of μ = ξ + iη ∈ g_θ. On phase space it is
//! evaluated through μ = Θ_ε(x, p), which is how the families are pulled back.

mod lax;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dynamics::{relative_drift, MagneticSetup, StateKind, Trajectory};
use crate::error::{Error, Result};
use crate::liealg::{AlgebraVector, ComplexAlgebraVector, InvariantPolynomial, LieAlgebraSpec};
use crate::numeric::C64;
use crate::orbit::PhasePoint;

pub use lax::{lax_residual, lax_spectrum, spectral_distance, LaxPair};

/// Φ_ε(x, p) = [x, p] + εx.
pub fn momentum_map(spec: &LieAlgebraSpec, pt: &PhasePoint, epsilon: f64) -> AlgebraVector {
    &spec.br(&pt.x, &pt.p) + &pt.x.scale(epsilon)
}

/// H_0 = ½⟨[x, p], [x, p]⟩.
pub fn normal_hamiltonian(spec: &LieAlgebraSpec, pt: &PhasePoint) -> f64 {
    let m = spec.br(&pt.x, &pt.p);
    0.5 * spec.ip(&m, &m)
}

/// H_ε = ½⟨Φ_ε, Φ_ε⟩.
pub fn magnetic_hamiltonian(spec: &LieAlgebraSpec, pt: &PhasePoint, epsilon: f64) -> f64 {
    let m = momentum_map(spec, pt, epsilon);
    0.5 * spec.ip(&m, &m)
}

/// H = ½⟨[x, p], [x, p]⟩ − κ⟨b, x⟩.
pub fn pendulum_hamiltonian(spec: &LieAlgebraSpec, pt: &PhasePoint, setup: &MagneticSetup) -> f64 {
    normal_hamiltonian(spec, pt) - spec.ip(&setup.effective_b(), &pt.x)
}

/// Θ_ε(x, p) = Φ_ε(x, p) + ix.
pub fn theta_map(spec: &LieAlgebraSpec, pt: &PhasePoint, epsilon: f64) -> ComplexAlgebraVector {
    ComplexAlgebraVector::new(momentum_map(spec, pt, epsilon), pt.x.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Re,
    Im,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    ShiftAc,
    SemidirectB,
    MomentumComponents,
    Hamiltonian,
    S2Linear,
    Custom,
}

/// One scalar function on g_θ, with the data needed to recompute it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Member {
    /// p_j(ξ + λc).
    Shift { j: usize, lambda: f64, c: AlgebraVector },
    /// Re or Im of p_j(λξ + i(η + λ²b)).
    Semidirect { j: usize, lambda: f64, part: Part, b: AlgebraVector },
    /// ½|ξ − εη|² − ⟨b, η⟩, the pendulum Hamiltonian on the Θ_ε image.
    Hamiltonian { epsilon: f64, b: AlgebraVector },
    /// ⟨v, ξ⟩.
    Linear { v: AlgebraVector },
    /// The k-th coordinate of ξ.
    Coordinate { k: usize },
    Constant { value: f64 },
}

/// Step of the central differences used when no exact gradient exists.
pub const FD_STEP: f64 = 1e-6;

/// Central-difference gradient with one Richardson extrapolation, in the
/// convention re = ∇_ξ f, im = −∇_η f.
pub fn fd_gradient(spec: &LieAlgebraSpec, f: impl Fn(&ComplexAlgebraVector) -> f64, mu: &ComplexAlgebraVector) -> ComplexAlgebraVector {
    let d = spec.dim();
    let base = mu.to_real();
    let central = |i: usize, h: f64| {
        let mut up = base.clone();
        let mut down = base.clone();
        up[i] += h;
        down[i] -= h;
        (f(&ComplexAlgebraVector::from_real(&up)) - f(&ComplexAlgebraVector::from_real(&down))) / (2.0 * h)
    };
    let partials = DVector::from_fn(2 * d, |i, _| (4.0 * central(i, FD_STEP / 2.0) - central(i, FD_STEP)) / 3.0);
    let re = spec.raise(&partials.rows(0, d).into_owned());
    let im = spec.raise(&partials.rows(d, d).into_owned());
    ComplexAlgebraVector::new(re, -&im)
}

fn poly(spec: &LieAlgebraSpec, j: usize) -> &InvariantPolynomial {
    &spec.invariant_polynomials().expect("families are built on algebras with invariants")[j - 1]
}

/// Complex partials w_k = ∂P/∂z_k of P at the complex element re + i·im.
fn complex_partials(spec: &LieAlgebraSpec, p: &InvariantPolynomial, re: &AlgebraVector, im: &AlgebraVector) -> Option<Vec<C64>> {
    let g = p.matrix_gradient(&spec.to_complex_matrix(re, im))?;
    Some(spec.matrix_gradient_coords(&g))
}

fn raise_parts(spec: &LieAlgebraSpec, w: &[C64], f: impl Fn(C64) -> f64) -> AlgebraVector {
    spec.raise(&DVector::from_iterator(w.len(), w.iter().map(|z| f(*z))))
}

impl Member {
    pub fn value(&self, spec: &LieAlgebraSpec, mu: &ComplexAlgebraVector) -> f64 {
        match self {
            Member::Shift { j, lambda, c } => {
                let arg = &mu.re + &c.scale(*lambda);
                poly(spec, *j).eval(&spec.to_matrix(&arg)).re
            }
            Member::Semidirect { j, lambda, part, b } => {
                let (re, im) = semidirect_argument(mu, *lambda, b);
                let v = poly(spec, *j).eval(&spec.to_complex_matrix(&re, &im));
                match part {
                    Part::Re => v.re,
                    Part::Im => v.im,
                }
            }
            Member::Hamiltonian { epsilon, b } => {
                let kinetic = &mu.re - &mu.im.scale(*epsilon);
                0.5 * spec.ip(&kinetic, &kinetic) - spec.ip(b, &mu.im)
            }
            Member::Linear { v } => spec.ip(v, &mu.re),
            Member::Coordinate { k } => mu.re.0[*k],
            Member::Constant { value } => *value,
        }
    }

    /// Value at Θ_ε(pt).
    pub fn value_at(&self, spec: &LieAlgebraSpec, pt: &PhasePoint, epsilon: f64) -> f64 {
        self.value(spec, &theta_map(spec, pt, epsilon))
    }

    /// Whether [`Member::gradient`] is exact rather than a finite difference.
    pub fn has_exact_gradient(&self, spec: &LieAlgebraSpec) -> bool {
        match self {
            Member::Shift { j, .. } | Member::Semidirect { j, .. } => poly(spec, *j).has_exact_gradient(),
            _ => true,
        }
    }

    /// Gradient at μ as ∇_ξ f − i∇_η f.
    pub fn gradient(&self, spec: &LieAlgebraSpec, mu: &ComplexAlgebraVector) -> ComplexAlgebraVector {
        let d = spec.dim();
        match self {
            Member::Shift { j, lambda, c } => {
                let arg = &mu.re + &c.scale(*lambda);
                match complex_partials(spec, poly(spec, *j), &arg, &spec.zero()) {
                    Some(w) => ComplexAlgebraVector::new(raise_parts(spec, &w, |z| z.re), spec.zero()),
                    None => fd_gradient(spec, |m| self.value(spec, m), mu),
                }
            }
            Member::Semidirect { j, lambda, part, b } => {
                let (re, im) = semidirect_argument(mu, *lambda, b);
                // ∂P/∂ξ_k = λ w_k and ∂P/∂η_k = i w_k.
                match complex_partials(spec, poly(spec, *j), &re, &im) {
                    Some(w) => match part {
                        Part::Re => ComplexAlgebraVector::new(
                            raise_parts(spec, &w, |z| lambda * z.re),
                            raise_parts(spec, &w, |z| z.im),
                        ),
                        Part::Im => ComplexAlgebraVector::new(
                            raise_parts(spec, &w, |z| lambda * z.im),
                            raise_parts(spec, &w, |z| -z.re),
                        ),
                    },
                    None => fd_gradient(spec, |m| self.value(spec, m), mu),
                }
            }
            Member::Hamiltonian { epsilon, b } => {
                let kinetic = &mu.re - &mu.im.scale(*epsilon);
                ComplexAlgebraVector::new(kinetic.scale(1.0), &kinetic.scale(*epsilon) + b)
            }
            Member::Linear { v } => ComplexAlgebraVector::new(v.clone(), spec.zero()),
            Member::Coordinate { k } => ComplexAlgebraVector::new(spec.raise(&DVector::from_fn(d, |i, _| f64::from(i == *k))), spec.zero()),
            Member::Constant { .. } => ComplexAlgebraVector::zeros(d),
        }
    }

    pub fn j(&self) -> Option<usize> {
        match self {
            Member::Shift { j, .. } | Member::Semidirect { j, .. } => Some(*j),
            _ => None,
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self {
            Member::Shift { lambda, .. } | Member::Semidirect { lambda, .. } => Some(*lambda),
            _ => None,
        }
    }

    pub fn part(&self) -> Option<Part> {
        match self {
            Member::Semidirect { part, .. } => Some(*part),
            _ => None,
        }
    }
}

fn semidirect_argument(mu: &ComplexAlgebraVector, lambda: f64, b: &AlgebraVector) -> (AlgebraVector, AlgebraVector) {
    (mu.re.scale(lambda), &mu.im + &b.scale(lambda * lambda))
}

/// `n` Chebyshev nodes on [0.2, 2.0], ascending.
pub fn chebyshev_grid(n: usize) -> Vec<f64> {
    let (lo, hi) = (0.2, 2.0);
    let mut grid: Vec<f64> = (0..n)
        .map(|k| {
            let theta = std::f64::consts::PI * (2 * k + 1) as f64 / (2 * n) as f64;
            0.5 * (lo + hi) + 0.5 * (hi - lo) * theta.cos()
        })
        .collect();
    grid.sort_by(f64::total_cmp);
    grid
}

/// Default λ grid: rank + 2 Chebyshev nodes.
pub fn default_lambda_grid(spec: &LieAlgebraSpec) -> Vec<f64> {
    chebyshev_grid(spec.rank() + 2)
}

/// A finite set of functions on g_θ pulled back to phase space by Θ_ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralFamily {
    pub kind: FamilyKind,
    pub epsilon: f64,
    pub lambda_grid: Vec<f64>,
    pub members: Vec<Member>,
}

impl IntegralFamily {
    pub fn new(kind: FamilyKind, epsilon: f64, members: Vec<Member>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Input("a family needs at least one member".into()));
        }
        Ok(Self { kind, epsilon, lambda_grid: Vec::new(), members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn values(&self, spec: &LieAlgebraSpec, mu: &ComplexAlgebraVector) -> Vec<f64> {
        self.members.iter().map(|m| m.value(spec, mu)).collect()
    }

    pub fn values_at(&self, spec: &LieAlgebraSpec, pt: &PhasePoint) -> Vec<f64> {
        self.values(spec, &theta_map(spec, pt, self.epsilon))
    }

    pub fn gradients(&self, spec: &LieAlgebraSpec, mu: &ComplexAlgebraVector) -> Vec<ComplexAlgebraVector> {
        self.members.iter().map(|m| m.gradient(spec, mu)).collect()
    }

    /// Keep only members whose λ lies in `grid`; members without λ are kept.
    pub fn restrict_lambdas(&self, grid: &[f64]) -> Self {
        let members = self
            .members
            .iter()
            .filter(|m| m.lambda().is_none_or(|l| grid.contains(&l)))
            .cloned()
            .collect();
        Self { members, lambda_grid: grid.to_vec(), ..self.clone() }
    }

    /// Drift of every member along a trajectory of either state kind.
    pub fn drift_report(&self, spec: &LieAlgebraSpec, traj: &Trajectory) -> Vec<DriftEntry> {
        let images: Vec<ComplexAlgebraVector> = (0..traj.len())
            .map(|i| match traj.kind {
                StateKind::Phase => theta_map(spec, &traj.phase_point(i), self.epsilon),
                StateKind::Semidirect => traj.complex_state(i),
            })
            .collect();
        self.members
            .iter()
            .map(|m| {
                let values: Vec<f64> = images.iter().map(|mu| m.value(spec, mu)).collect();
                let drift = relative_drift(values.iter().copied());
                DriftEntry {
                    kind: self.kind,
                    j: m.j(),
                    lambda: m.lambda(),
                    part: m.part(),
                    value_t0: values[0],
                    max_drift_abs: drift.abs,
                    max_drift_rel: drift.rel,
                }
            })
            .collect()
    }
}

/// One row of a family drift report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftEntry {
    pub kind: FamilyKind,
    pub j: Option<usize>,
    pub lambda: Option<f64>,
    pub part: Option<Part>,
    pub value_t0: f64,
    pub max_drift_abs: f64,
    pub max_drift_rel: f64,
}

/// Shifted invariants p_j(Φ_ε + λc) for j ≤ r and λ in the grid.
pub fn family_shift(spec: &LieAlgebraSpec, c: &AlgebraVector, lambda_grid: &[f64], epsilon: f64) -> Result<IntegralFamily> {
    spec.check(c)?;
    if c.0.amax() == 0.0 {
        return Err(Error::Input("the shift direction c must be nonzero".into()));
    }
    let polys = spec.invariant_polynomials()?;
    let members = lambda_grid
        .iter()
        .flat_map(|&lambda| polys.iter().map(move |p| Member::Shift { j: p.index, lambda, c: c.clone() }))
        .collect();
    let mut family = IntegralFamily::new(FamilyKind::ShiftAc, epsilon, members)?;
    family.lambda_grid = lambda_grid.to_vec();
    Ok(family)
}

/// Re and Im of p_j(λΦ_ε + i(x + λ²b)) for j ≤ r and λ in the grid.
pub fn family_semidirect(spec: &LieAlgebraSpec, b: &AlgebraVector, lambda_grid: &[f64], epsilon: f64) -> Result<IntegralFamily> {
    spec.check(b)?;
    if lambda_grid.is_empty() {
        return Err(Error::Input("the λ grid must be nonempty".into()));
    }
    let polys = spec.invariant_polynomials()?;
    let mut members = Vec::new();
    for &lambda in lambda_grid {
        for p in polys {
            for part in [Part::Re, Part::Im] {
                members.push(Member::Semidirect { j: p.index, lambda, part, b: b.clone() });
            }
        }
    }
    let mut family = IntegralFamily::new(FamilyKind::SemidirectB, epsilon, members)?;
    family.lambda_grid = lambda_grid.to_vec();
    Ok(family)
}

/// The coordinates of Φ_ε.
pub fn momentum_components(spec: &LieAlgebraSpec, epsilon: f64) -> IntegralFamily {
    let members = (0..spec.dim()).map(|k| Member::Coordinate { k }).collect();
    IntegralFamily::new(FamilyKind::MomentumComponents, epsilon, members).expect("algebras are nonzero")
}

/// The pendulum Hamiltonian as a member: ½|ξ − εη|² − κ⟨b, η⟩.
pub fn hamiltonian_member(setup: &MagneticSetup) -> Member {
    Member::Hamiltonian { epsilon: setup.epsilon, b: setup.effective_b() }
}

/// f = ⟨b, Φ_ε⟩ on T*S², i.e. ⟨b, x × p + εx⟩.
pub fn s2_linear_integral(spec: &LieAlgebraSpec, b: &AlgebraVector) -> Result<Member> {
    if !spec.is_so3() {
        return Err(Error::Unsupported(format!("the linear integral exists on so(3) only, not {}", spec.name())));
    }
    spec.check(b)?;
    Ok(Member::Linear { v: b.clone() })
}

/// The commuting pair {H, ⟨b, Φ_ε⟩} of the magnetic spherical pendulum.
pub fn s2_pendulum_family(spec: &LieAlgebraSpec, setup: &MagneticSetup) -> Result<IntegralFamily> {
    let f = s2_linear_integral(spec, &setup.b)?;
    IntegralFamily::new(FamilyKind::S2Linear, setup.epsilon, vec![hamiltonian_member(setup), f])
}
