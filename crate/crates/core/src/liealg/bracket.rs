//! Brackets on g ⊕ ig: the contraction g_θ, the complexification g_0, and the
//! three Lie-Poisson forms built from them.
//!
//! Gradients are passed in the form ∇_ξ f − i∇_η f, i.e. the `re` slot holds
//! ∇_ξ f and the `im` slot holds −∇_η f. With that convention every bracket is
//! the pairing of the base point with a Lie bracket of the two gradients.

use serde::{Deserialize, Serialize};

use super::{AlgebraVector, ComplexAlgebraVector, LieAlgebraSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketKind {
    /// Lie-Poisson bracket of the complexification g_0.
    G0,
    /// Lie-Poisson bracket of the contraction g_θ.
    Theta,
    /// The frozen-argument bracket (ib, [·, ·]_{g_0}).
    Ib,
}

/// Scalar product (ξ1 + iη1, ξ2 + iη2) = ⟨ξ1, ξ2⟩ − ⟨η1, η2⟩.
pub fn pairing(spec: &LieAlgebraSpec, z1: &ComplexAlgebraVector, z2: &ComplexAlgebraVector) -> f64 {
    spec.ip(&z1.re, &z2.re) - spec.ip(&z1.im, &z2.im)
}

/// [ξ1 + iη1, ξ2 + iη2]_θ = [ξ1, ξ2] + i([η1, ξ2] + [ξ1, η2]).
pub fn theta_bracket(spec: &LieAlgebraSpec, z1: &ComplexAlgebraVector, z2: &ComplexAlgebraVector) -> Result<ComplexAlgebraVector> {
    for v in [&z1.re, &z1.im, &z2.re, &z2.im] {
        spec.check(v)?;
    }
    Ok(theta_br(spec, z1, z2))
}

pub(crate) fn theta_br(spec: &LieAlgebraSpec, z1: &ComplexAlgebraVector, z2: &ComplexAlgebraVector) -> ComplexAlgebraVector {
    let re = spec.br(&z1.re, &z2.re);
    let im = spec.br(&z1.im, &z2.re) + spec.br(&z1.re, &z2.im);
    ComplexAlgebraVector::new(re, im)
}

pub(crate) fn g0_br(spec: &LieAlgebraSpec, z1: &ComplexAlgebraVector, z2: &ComplexAlgebraVector) -> ComplexAlgebraVector {
    let re = spec.br(&z1.re, &z2.re) - spec.br(&z1.im, &z2.im);
    let im = spec.br(&z1.re, &z2.im) + spec.br(&z1.im, &z2.re);
    ComplexAlgebraVector::new(re, im)
}

/// Value of the selected Lie-Poisson bracket at μ on two gradients.
pub fn lie_poisson(
    spec: &LieAlgebraSpec,
    kind: BracketKind,
    mu: &ComplexAlgebraVector,
    gf: &ComplexAlgebraVector,
    gg: &ComplexAlgebraVector,
    b: Option<&AlgebraVector>,
) -> Result<f64> {
    for v in [&mu.re, &mu.im, &gf.re, &gf.im, &gg.re, &gg.im] {
        spec.check(v)?;
    }
    match kind {
        BracketKind::Theta => Ok(pairing(spec, mu, &theta_br(spec, gf, gg))),
        BracketKind::G0 => Ok(pairing(spec, mu, &g0_br(spec, gf, gg))),
        BracketKind::Ib => {
            let b = b.ok_or_else(|| Error::Input("the ib bracket needs a vector b".into()))?;
            spec.check(b)?;
            Ok(ib_value(spec, b, gf, gg))
        }
    }
}

pub(crate) fn ib_value(spec: &LieAlgebraSpec, b: &AlgebraVector, gf: &ComplexAlgebraVector, gg: &ComplexAlgebraVector) -> f64 {
    -spec.ip(b, &g0_br(spec, gf, gg).im)
}
