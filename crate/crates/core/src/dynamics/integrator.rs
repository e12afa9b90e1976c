use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::VectorField;
use crate::error::{Error, Result};
use crate::liealg::ComplexAlgebraVector;
use crate::orbit::PhasePoint;

/// Constraint residual above which integration aborts.
pub const DIVERGENCE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    /// `[x; p]` on T*O(a).
    Phase,
    /// `[ξ; η]` on g_θ.
    Semidirect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub energy: f64,
    pub res_orbit: f64,
    pub res_cotangent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub abs: f64,
    /// abs / max(|f(0)|, 1)
    pub rel: f64,
}

/// Largest deviation of a sampled quantity from its initial value.
pub fn relative_drift(values: impl IntoIterator<Item = f64>) -> Drift {
    let mut it = values.into_iter();
    let Some(v0) = it.next() else {
        return Drift { abs: 0.0, rel: 0.0 };
    };
    let abs = it.fold(0.0_f64, |acc, v| acc.max((v - v0).abs()));
    Drift { abs, rel: abs / v0.abs().max(1.0) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub steps: usize,
    pub h: f64,
    pub t_end: f64,
    pub energy_t0: f64,
    pub energy_drift: Drift,
    pub max_res_orbit: f64,
    pub max_res_cotangent: f64,
}

/// Sampled solution of an ODE, one record per step including t = 0.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub kind: StateKind,
    pub h: f64,
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Half the state length: the algebra dimension.
    pub fn algebra_dim(&self) -> usize {
        self.states.first().map_or(0, |s| s.len() / 2)
    }

    pub fn phase_point(&self, i: usize) -> PhasePoint {
        PhasePoint::from_state(&self.states[i])
    }

    pub fn complex_state(&self, i: usize) -> ComplexAlgebraVector {
        ComplexAlgebraVector::from_real(&self.states[i])
    }

    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("trajectories hold the initial state")
    }

    pub fn energies(&self) -> impl Iterator<Item = f64> + '_ {
        self.diagnostics.iter().map(|d| d.energy)
    }

    pub fn summary(&self) -> TrajectorySummary {
        TrajectorySummary {
            steps: self.len() - 1,
            h: self.h,
            t_end: self.times.last().copied().unwrap_or(0.0),
            energy_t0: self.diagnostics[0].energy,
            energy_drift: relative_drift(self.energies()),
            max_res_orbit: self.diagnostics.iter().map(|d| d.res_orbit).fold(0.0, f64::max),
            max_res_cotangent: self.diagnostics.iter().map(|d| d.res_cotangent).fold(0.0, f64::max),
        }
    }

    /// CSV with header `t,x_1..x_d,p_1..p_d,H,res_orbit,res_cotangent`; the
    /// semidirect form uses `xi_k`, `eta_k` for the two halves.
    pub fn to_csv(&self) -> String {
        let d = self.algebra_dim();
        let (a, b) = match self.kind {
            StateKind::Phase => ("x", "p"),
            StateKind::Semidirect => ("xi", "eta"),
        };
        let mut header = vec!["t".to_string()];
        header.extend((1..=d).map(|k| format!("{a}_{k}")));
        header.extend((1..=d).map(|k| format!("{b}_{k}")));
        header.extend(["H", "res_orbit", "res_cotangent"].map(String::from));
        let mut out = header.join(",");
        out.push('\n');
        for ((t, y), diag) in self.times.iter().zip(&self.states).zip(&self.diagnostics) {
            let mut row = vec![format!("{t:.6}")];
            row.extend(y.iter().map(|v| format!("{v:.17e}")));
            row.push(format!("{:.17e}", diag.energy));
            row.push(format!("{:.3e}", diag.res_orbit));
            row.push(format!("{:.3e}", diag.res_cotangent));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn rk4_step<F: VectorField + ?Sized>(field: &F, y: &DVector<f64>, h: f64) -> DVector<f64> {
    let k1 = field.eval(y);
    let k2 = field.eval(&(y + &k1 * (h / 2.0)));
    let k3 = field.eval(&(y + &k2 * (h / 2.0)));
    let k4 = field.eval(&(y + &k3 * h));
    y + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0)
}

/// Classical RK4 with step `h` up to `t_end`, re-projecting every
/// `project_every` steps (0 disables projection). The last step is shortened
/// if `t_end` is not a multiple of `h`.
pub fn integrate<F: VectorField + ?Sized>(field: &F, y0: &DVector<f64>, t_end: f64, h: f64, project_every: usize) -> Result<Trajectory> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Input(format!("step size must be positive, got {h}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Input(format!("t_end must be positive, got {t_end}")));
    }
    Error::check_dim(field.state_dim(), y0.len())?;
    let steps = (t_end / h - 1e-9).ceil().max(1.0) as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut diagnostics = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(y0.clone());
    diagnostics.push(field.diagnostics(y0));
    let mut y = y0.clone();
    for n in 1..=steps {
        let t_prev = (n - 1) as f64 * h;
        let t = if n == steps { t_end } else { n as f64 * h };
        y = rk4_step(field, &y, t - t_prev);
        if project_every > 0 && n % project_every == 0 {
            field.project(&mut y);
        }
        let diag = field.diagnostics(&y);
        let residual = diag.res_orbit.max(diag.res_cotangent);
        if !y.iter().all(|v| v.is_finite()) || residual.is_nan() || residual > DIVERGENCE_TOL {
            return Err(Error::Divergence { step: n, residual });
        }
        times.push(t);
        states.push(y.clone());
        diagnostics.push(diag);
    }
    Ok(Trajectory { kind: field.kind(), h, times, states, diagnostics })
}
