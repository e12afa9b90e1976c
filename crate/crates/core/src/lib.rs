//! Simulation and integrability certification for magnetic geodesic flows and
//! magnetic pendulums on adjoint orbits of compact Lie groups.
//!
//! The crate is organized bottom-up:
//!
//! - [`liealg`]: matrix Lie algebras, invariant polynomials, the contraction
//!   g_θ and its Lie-Poisson brackets.
//! - [`orbit`]: the adjoint orbit O(a) ⊂ g and its cotangent bundle embedded in
//!   g × g.
//! - [`dynamics`]: vector fields, a projected RK4 integrator and the
//!   closed-form magnetic geodesic.
//! - [`integrals`]: momentum maps, Hamiltonians, argument-shift families and
//!   the Lax pair.
//! - [`poisson`]: Poisson pencils, rank conditions and completeness reports.

pub mod dynamics;
pub mod error;
pub mod integrals;
pub mod liealg;
pub mod numeric;
pub mod orbit;
pub mod par;
pub mod poisson;

pub use error::{Error, Result};
pub use liealg::{AlgebraVector, ComplexAlgebraVector, LieAlgebraSpec};
pub use orbit::{OrbitContext, PhasePoint};
pub use par::Exec;
