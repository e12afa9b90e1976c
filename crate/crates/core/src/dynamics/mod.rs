//! Vector fields of the magnetic geodesic flow and the magnetic pendulum on
//! T*O(a), the semidirect form on g_θ, a fixed-step RK4 integrator with
//! periodic re-projection, and the closed-form magnetic geodesic.

mod geodesic;
mod integrator;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::integrals;
use crate::liealg::{AlgebraVector, ComplexAlgebraVector, LieAlgebraSpec};
use crate::orbit::{project, OrbitContext, PhasePoint};
use crate::par::Exec;

pub use geodesic::{exact_magnetic_geodesic, fit_circle, measure_circle_radius, CircleFit};
pub use integrator::{integrate, relative_drift, Drift, StateKind, StepDiagnostics, Trajectory, TrajectorySummary, DIVERGENCE_TOL};

/// Strength ε of the magnetic term and the potential direction b.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagneticSetup {
    pub epsilon: f64,
    /// Zero for the pure magnetic geodesic flow.
    pub b: AlgebraVector,
    /// Multiplier on b.
    pub kappa: f64,
}

impl MagneticSetup {
    pub fn new(epsilon: f64, b: AlgebraVector) -> Self {
        Self { epsilon, b, kappa: 1.0 }
    }

    /// b = 0.
    pub fn geodesic(spec: &LieAlgebraSpec, epsilon: f64) -> Self {
        Self::new(epsilon, spec.zero())
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    /// κ·b, the vector entering the equations.
    pub fn effective_b(&self) -> AlgebraVector {
        self.b.scale(self.kappa)
    }

    pub fn has_potential(&self) -> bool {
        self.kappa != 0.0 && self.b.0.amax() > 0.0
    }

    pub fn check(&self, spec: &LieAlgebraSpec) -> Result<()> {
        spec.check(&self.b)
    }
}

/// ẋ = [x, [p, x]], ṗ = [p, [p, x]].
pub fn geodesic_field(spec: &LieAlgebraSpec, pt: &PhasePoint) -> (AlgebraVector, AlgebraVector) {
    let px = spec.br(&pt.p, &pt.x);
    (spec.br(&pt.x, &px), spec.br(&pt.p, &px))
}

/// ẋ = [x, [p, x]], ṗ = [p, [p, x]] + ε[x, p] + κb − pr_ann(x)(κb).
pub fn pendulum_field(ctx: &OrbitContext, pt: &PhasePoint, setup: &MagneticSetup) -> (AlgebraVector, AlgebraVector) {
    let spec = ctx.algebra();
    let (dx, mut dp) = geodesic_field(spec, pt);
    if setup.epsilon != 0.0 {
        dp += &spec.br(&pt.x, &pt.p).scale(setup.epsilon);
    }
    if setup.has_potential() {
        let b = setup.effective_b();
        dp += &project(spec, &b, &ctx.ann_at(&pt.x), true);
    }
    (dx, dp)
}

/// d/dt (ξ + iη) = [η, b] + i[ξ, η].
pub fn semidirect_field(spec: &LieAlgebraSpec, zeta: &ComplexAlgebraVector, b: &AlgebraVector) -> ComplexAlgebraVector {
    ComplexAlgebraVector::new(spec.br(&zeta.im, b), spec.br(&zeta.re, &zeta.im))
}

/// An autonomous ODE on a flat state vector.
pub trait VectorField: Sync {
    fn state_dim(&self) -> usize;

    fn kind(&self) -> StateKind;

    fn eval(&self, y: &DVector<f64>) -> DVector<f64>;

    /// Pull a drifted state back onto the constraint set.
    fn project(&self, _y: &mut DVector<f64>) {}

    fn diagnostics(&self, y: &DVector<f64>) -> StepDiagnostics;
}

fn phase_state(dx: AlgebraVector, dp: AlgebraVector) -> DVector<f64> {
    PhasePoint::new(dx, dp).to_state()
}

fn phase_diagnostics(ctx: &OrbitContext, pt: &PhasePoint, energy: f64) -> StepDiagnostics {
    let r = ctx.residuals(pt);
    StepDiagnostics {
        energy,
        res_orbit: r.orbit,
        res_cotangent: r.cotangent,
    }
}

/// Magnetic geodesic flow; the recorded energy is H_0 = ½⟨[x,p],[x,p]⟩.
#[derive(Debug, Clone, Copy)]
pub struct GeodesicFlow<'a> {
    pub ctx: &'a OrbitContext,
    pub epsilon: f64,
}

impl VectorField for GeodesicFlow<'_> {
    fn state_dim(&self) -> usize {
        2 * self.ctx.algebra().dim()
    }

    fn kind(&self) -> StateKind {
        StateKind::Phase
    }

    fn eval(&self, y: &DVector<f64>) -> DVector<f64> {
        let pt = PhasePoint::from_state(y);
        let spec = self.ctx.algebra();
        let (dx, mut dp) = geodesic_field(spec, &pt);
        if self.epsilon != 0.0 {
            dp += &spec.br(&pt.x, &pt.p).scale(self.epsilon);
        }
        phase_state(dx, dp)
    }

    fn project(&self, y: &mut DVector<f64>) {
        let mut pt = PhasePoint::from_state(y);
        self.ctx.project_phase_point(&mut pt);
        *y = pt.to_state();
    }

    fn diagnostics(&self, y: &DVector<f64>) -> StepDiagnostics {
        let pt = PhasePoint::from_state(y);
        phase_diagnostics(self.ctx, &pt, integrals::normal_hamiltonian(self.ctx.algebra(), &pt))
    }
}

/// Magnetic pendulum; the recorded energy is ½⟨[x,p],[x,p]⟩ − κ⟨b,x⟩.
#[derive(Debug, Clone, Copy)]
pub struct PendulumFlow<'a> {
    pub ctx: &'a OrbitContext,
    pub setup: &'a MagneticSetup,
}

impl VectorField for PendulumFlow<'_> {
    fn state_dim(&self) -> usize {
        2 * self.ctx.algebra().dim()
    }

    fn kind(&self) -> StateKind {
        StateKind::Phase
    }

    fn eval(&self, y: &DVector<f64>) -> DVector<f64> {
        let (dx, dp) = pendulum_field(self.ctx, &PhasePoint::from_state(y), self.setup);
        phase_state(dx, dp)
    }

    fn project(&self, y: &mut DVector<f64>) {
        let mut pt = PhasePoint::from_state(y);
        self.ctx.project_phase_point(&mut pt);
        *y = pt.to_state();
    }

    fn diagnostics(&self, y: &DVector<f64>) -> StepDiagnostics {
        let pt = PhasePoint::from_state(y);
        phase_diagnostics(self.ctx, &pt, integrals::pendulum_hamiltonian(self.ctx.algebra(), &pt, self.setup))
    }
}

/// Semidirect form on g_θ; the recorded energy is h = ½⟨ξ,ξ⟩ − ⟨b,η⟩.
#[derive(Debug, Clone, Copy)]
pub struct SemidirectFlow<'a> {
    pub spec: &'a LieAlgebraSpec,
    pub b: &'a AlgebraVector,
}

impl VectorField for SemidirectFlow<'_> {
    fn state_dim(&self) -> usize {
        2 * self.spec.dim()
    }

    fn kind(&self) -> StateKind {
        StateKind::Semidirect
    }

    fn eval(&self, y: &DVector<f64>) -> DVector<f64> {
        semidirect_field(self.spec, &ComplexAlgebraVector::from_real(y), self.b).to_real()
    }

    fn diagnostics(&self, y: &DVector<f64>) -> StepDiagnostics {
        let z = ComplexAlgebraVector::from_real(y);
        StepDiagnostics {
            energy: 0.5 * self.spec.ip(&z.re, &z.re) - self.spec.ip(self.b, &z.im),
            res_orbit: 0.0,
            res_cotangent: 0.0,
        }
    }
}

/// Measured and predicted circle radius for one ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusSample {
    pub epsilon: f64,
    pub measured: f64,
    /// arctan(1/|ε|)
    pub expected: f64,
}

/// Circle radius of the so(3) magnetic geodesic through `pt` for each ε.
pub fn radius_scan(
    ctx: &OrbitContext,
    pt: &PhasePoint,
    epsilons: &[f64],
    h: f64,
    t_end: f64,
    project_every: usize,
    exec: Exec,
) -> Result<Vec<RadiusSample>> {
    exec.map(epsilons, |&epsilon| {
        let traj = integrate(&GeodesicFlow { ctx, epsilon }, &pt.to_state(), t_end, h, project_every)?;
        Ok(RadiusSample {
            epsilon,
            measured: measure_circle_radius(&traj)?,
            expected: (1.0 / epsilon.abs()).atan(),
        })
    })
    .into_iter()
    .collect()
}
