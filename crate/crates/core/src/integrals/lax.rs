use itertools::Itertools;
use nalgebra::Complex;

use super::momentum_map;
use crate::error::{Error, Result};
use crate::liealg::{AlgebraVector, LieAlgebraSpec};
use crate::numeric::{CMatrix, C64};
use crate::orbit::PhasePoint;

/// L(λ) = λΦ_ε + i(x + λ²b), A(λ) = Φ_ε + iλb in the defining representation.
#[derive(Debug, Clone)]
pub struct LaxPair<'a> {
    spec: &'a LieAlgebraSpec,
    phi: AlgebraVector,
    x: AlgebraVector,
    b: AlgebraVector,
}

impl<'a> LaxPair<'a> {
    pub fn new(spec: &'a LieAlgebraSpec, pt: &PhasePoint, epsilon: f64, b: &AlgebraVector) -> Result<Self> {
        spec.check(&pt.x)?;
        spec.check(&pt.p)?;
        spec.check(b)?;
        Ok(Self { spec, phi: momentum_map(spec, pt, epsilon), x: pt.x.clone(), b: b.clone() })
    }

    pub fn l(&self, lambda: f64) -> CMatrix {
        self.spec.to_complex_matrix(&self.phi.scale(lambda), &(&self.x + &self.b.scale(lambda * lambda)))
    }

    pub fn a(&self, lambda: f64) -> CMatrix {
        self.spec.to_complex_matrix(&self.phi, &self.b.scale(lambda))
    }

    /// [A(λ), L(λ)], which equals L̇(λ) along the pendulum flow.
    pub fn commutator(&self, lambda: f64) -> CMatrix {
        let (l, a) = (self.l(lambda), self.a(lambda));
        &a * &l - &l * &a
    }
}

/// Eigenvalues of L(λ) sorted lexicographically by (re, im).
pub fn lax_spectrum(spec: &LieAlgebraSpec, pt: &PhasePoint, epsilon: f64, b: &AlgebraVector, lambda: f64) -> Result<Vec<C64>> {
    let l = LaxPair::new(spec, pt, epsilon, b)?.l(lambda);
    let n = l.nrows();
    let schur = l
        .try_schur(1e-15, 10_000)
        .ok_or_else(|| Error::Numerical("Schur iteration for the Lax matrix did not converge".into()))?;
    let (_, t) = schur.unpack();
    let mut eig: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(eig)
}

/// Distance between two eigenvalue multisets: the best matching under the
/// max norm for up to six values, elementwise on the sorted lists otherwise.
pub fn spectral_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len(), "spectra of different sizes");
    let paired = |perm: &[usize]| perm.iter().enumerate().map(|(i, &j)| (a[i] - b[j]).norm()).fold(0.0, f64::max);
    if a.len() <= 6 {
        (0..b.len()).permutations(b.len()).map(|p| paired(&p)).fold(f64::INFINITY, f64::min)
    } else {
        paired(&(0..b.len()).collect::<Vec<_>>())
    }
}

/// max |(L(t+h) − L(t−h))/2h − [A, L](t)| from three consecutive states.
#[allow(clippy::too_many_arguments)]
pub fn lax_residual(
    spec: &LieAlgebraSpec,
    before: &PhasePoint,
    at: &PhasePoint,
    after: &PhasePoint,
    h: f64,
    epsilon: f64,
    b: &AlgebraVector,
    lambda: f64,
) -> Result<f64> {
    let l_minus = LaxPair::new(spec, before, epsilon, b)?.l(lambda);
    let l_plus = LaxPair::new(spec, after, epsilon, b)?.l(lambda);
    let derivative = (l_plus - l_minus) / Complex::new(2.0 * h, 0.0);
    let rhs = LaxPair::new(spec, at, epsilon, b)?.commutator(lambda);
    Ok((derivative - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max))
}
