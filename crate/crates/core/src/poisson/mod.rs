//! Poisson pencils on g_θ and numerical integrability certification.
//!
//! Bilinear forms are assembled on the 2d coordinate gradients of g ⊕ ig: the
//! first d basis vectors sit in the ξ slot and the last d in the η slot, with
//! the sign convention of [`crate::liealg::lie_poisson`]. A gradient
//! `ComplexAlgebraVector` therefore maps to its stacked coordinates `[re; im]`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::integrals::{theta_map, IntegralFamily};
use crate::liealg::{g0_br, ib_value, pairing, theta_br, AlgebraVector, ComplexAlgebraVector, LieAlgebraSpec};
use crate::numeric::{self, RankInfo, RANK_TOL};
use crate::orbit::{ann_basis, project, OrbitContext, PhasePoint};
use crate::par::Exec;

/// Gap required by the certification checks. Ordinary rank decisions only
/// flag gaps below [`numeric::MIN_GAP`].
pub const CERTIFY_GAP: f64 = 1e4;

fn unit_gradient(d: usize, i: usize) -> ComplexAlgebraVector {
    let mut z = ComplexAlgebraVector::zeros(d);
    if i < d {
        z.re.0[i] = 1.0;
    } else {
        z.im.0[i - d] = 1.0;
    }
    z
}

fn assemble(d: usize, entry: impl Fn(&ComplexAlgebraVector, &ComplexAlgebraVector) -> f64) -> DMatrix<f64> {
    let basis: Vec<_> = (0..2 * d).map(|i| unit_gradient(d, i)).collect();
    let mut m = DMatrix::zeros(2 * d, 2 * d);
    for i in 0..2 * d {
        for j in i + 1..2 * d {
            let v = entry(&basis[i], &basis[j]);
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    m
}

/// Matrix of {·,·}_{g_θ} at μ.
pub fn theta_form(spec: &LieAlgebraSpec, mu: &ComplexAlgebraVector) -> DMatrix<f64> {
    assemble(spec.dim(), |f, g| pairing(spec, mu, &theta_br(spec, f, g)))
}

/// Matrix of {·,·}_{g_0} + {·,·}_{ib} at μ.
pub fn frozen_form(spec: &LieAlgebraSpec, mu: &ComplexAlgebraVector, b: &AlgebraVector) -> DMatrix<f64> {
    assemble(spec.dim(), |f, g| pairing(spec, mu, &g0_br(spec, f, g)) + ib_value(spec, b, f, g))
}

/// Λ_{λ1,λ2} = λ1{·,·}_{g_θ} + λ2({·,·}_{g_0} + {·,·}_{ib}) at μ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PencilForm {
    pub mu: ComplexAlgebraVector,
    pub lambda1: f64,
    pub lambda2: f64,
    pub b: AlgebraVector,
    pub matrix: DMatrix<f64>,
}

pub fn pencil_form(spec: &LieAlgebraSpec, mu: &ComplexAlgebraVector, lambda1: f64, lambda2: f64, b: &AlgebraVector) -> Result<PencilForm> {
    for v in [&mu.re, &mu.im, b] {
        spec.check(v)?;
    }
    let d = spec.dim();
    let mut matrix = DMatrix::zeros(2 * d, 2 * d);
    if lambda1 != 0.0 {
        matrix += theta_form(spec, mu) * lambda1;
    }
    if lambda2 != 0.0 {
        matrix += frozen_form(spec, mu, b) * lambda2;
    }
    Ok(PencilForm { mu: mu.clone(), lambda1, lambda2, b: b.clone(), matrix })
}

impl PencilForm {
    /// Λ(gf, gg) for arbitrary gradients.
    pub fn apply(&self, gf: &ComplexAlgebraVector, gg: &ComplexAlgebraVector) -> f64 {
        (gf.to_real().transpose() * &self.matrix * gg.to_real())[(0, 0)]
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        numeric::max_abs(&(&self.matrix + self.matrix.transpose()))
    }
}

/// Rank with singular values ≥ `tol` × the largest one, with the gap.
pub fn form_rank(form: &PencilForm, tol: f64) -> RankInfo {
    numeric::numerical_rank(&form.matrix, tol, None)
}

/// The base point εa + ia of the Θ_ε-image orbit.
pub fn orbit_base(ctx: &OrbitContext, epsilon: f64) -> ComplexAlgebraVector {
    ComplexAlgebraVector::new(ctx.seed().scale(epsilon), ctx.seed().clone())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PencilSample {
    pub lambda1: f64,
    pub lambda2: f64,
    pub rank: RankInfo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A1Report {
    pub expected_rank: usize,
    pub samples: Vec<PencilSample>,
    pub min_gap: f64,
    pub holds: bool,
}

/// Rank of Λ_{λ1,λ2} at μ = εa + ia on (1,0), (−1,1) and (1,λ) for λ in the grid.
pub fn condition_a1(ctx: &OrbitContext, epsilon: f64, b: &AlgebraVector, lambda_grid: &[f64]) -> Result<A1Report> {
    let spec = ctx.algebra();
    let mu = orbit_base(ctx, epsilon);
    let expected_rank = 2 * spec.dim() - 2 * spec.rank();
    let theta = theta_form(spec, &mu);
    let frozen = frozen_form(spec, &mu, b);
    let mut pairs = vec![(1.0, 0.0), (-1.0, 1.0)];
    pairs.extend(lambda_grid.iter().map(|&l| (1.0, l)));
    let samples: Vec<PencilSample> = pairs
        .into_iter()
        .map(|(lambda1, lambda2)| PencilSample {
            lambda1,
            lambda2,
            rank: numeric::numerical_rank(&(&theta * lambda1 + &frozen * lambda2), RANK_TOL, None),
        })
        .collect();
    spec.check(b)?;
    let min_gap = samples.iter().map(|s| s.rank.gap).fold(f64::INFINITY, f64::min);
    let holds = samples.iter().all(|s| s.rank.rank == expected_rank) && min_gap > CERTIFY_GAP;
    Ok(A1Report { expected_rank, samples, min_gap, holds })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A2Report {
    /// dim ker Λ_{1,0} at εa + ia.
    pub kernel_dim: usize,
    /// dim K, the part of ker Λ_{1,0} that Λ_{0,1} annihilates against ker Λ_{1,0}.
    pub dim_k: usize,
    pub expected: usize,
    pub b_regular: bool,
    pub kernel_rank: RankInfo,
    pub restricted_rank: RankInfo,
    pub holds: bool,
    pub warnings: Vec<String>,
}

/// dim{z ∈ ker Λ_{1,0} : Λ_{0,1}(z, ker Λ_{1,0}) = 0} at εa + ia, compared with 2r.
pub fn condition_a2(ctx: &OrbitContext, epsilon: f64, b: &AlgebraVector) -> Result<A2Report> {
    let spec = ctx.algebra();
    spec.check(b)?;
    let mu = orbit_base(ctx, epsilon);
    let theta = theta_form(spec, &mu);
    let frozen = frozen_form(spec, &mu, b);
    let (n, kernel_rank) = numeric::kernel(&theta, RANK_TOL, None);
    let restricted = n.transpose() * &frozen * &n;
    let scale = frozen.singular_values().max();
    let restricted_rank = numeric::numerical_rank(&restricted, RANK_TOL, Some(scale));
    let kernel_dim = n.ncols();
    let dim_k = kernel_dim - restricted_rank.rank;
    let expected = 2 * spec.rank();
    let b_regular = b.0.amax() > 0.0 && ann_basis(spec, b, ctx.kernel_tol())?.dim() == spec.rank();
    let mut warnings = Vec::new();
    if !b_regular {
        warnings.push("b is not a regular element; the condition requires a regular b".into());
    }
    for (what, info) in [("ker Λ_{1,0}", &kernel_rank), ("restricted Λ_{0,1}", &restricted_rank)] {
        if info.ambiguous {
            warnings.push(format!("ambiguous rank of {what}: gap {:.2e}", info.gap));
        }
    }
    let gaps_ok = kernel_rank.gap > CERTIFY_GAP && (restricted_rank.rank == 0 || restricted_rank.gap > CERTIFY_GAP);
    Ok(A2Report {
        kernel_dim,
        dim_k,
        expected,
        b_regular,
        holds: dim_k == expected && b_regular && gaps_ok,
        kernel_rank,
        restricted_rank,
        warnings,
    })
}

/// {f, g}^ε_v(η) = −⟨η + εa, [∇f, ∇g]⟩.
pub fn v_pencil_bracket(spec: &LieAlgebraSpec, eta: &AlgebraVector, epsilon: f64, a: &AlgebraVector, gf: &AlgebraVector, gg: &AlgebraVector) -> f64 {
    -spec.ip(&(eta + &a.scale(epsilon)), &spec.br(gf, gg))
}

/// {f, g}^a_v(η) = −⟨a, [∇f, ∇g]⟩, the ε-derivative of [`v_pencil_bracket`].
pub fn a_bracket(spec: &LieAlgebraSpec, a: &AlgebraVector, gf: &AlgebraVector, gg: &AlgebraVector) -> f64 {
    -spec.ip(a, &spec.br(gf, gg))
}

/// Gradient on v = ann(a)^⊥ of the shifted invariant η ↦ p_j(η + λa).
pub fn shifted_invariant_gradient(ctx: &OrbitContext, j: usize, lambda: f64, eta: &AlgebraVector) -> Result<AlgebraVector> {
    let spec = ctx.algebra();
    let poly = spec
        .invariant_polynomials()?
        .get(j.wrapping_sub(1))
        .ok_or_else(|| crate::Error::Input(format!("no invariant with index {j}")))?;
    let g = spec.invariant_gradient(poly, &(eta + &ctx.seed().scale(lambda)));
    Ok(project(spec, &g, &ctx.ann_seed().vectors, true))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdimDind {
    pub ddim: usize,
    pub dind: usize,
    pub differential_rank: RankInfo,
    pub bracket_rank: RankInfo,
}

fn normalized_gradient_rows(spec: &LieAlgebraSpec, family: &IntegralFamily, mu: &ComplexAlgebraVector) -> DMatrix<f64> {
    let rows: Vec<_> = family
        .gradients(spec, mu)
        .into_iter()
        .map(|g| g.to_real())
        .filter(|v| v.amax() > 0.0)
        .map(|v| v.normalize())
        .collect();
    let mut m = DMatrix::zeros(rows.len(), 2 * spec.dim());
    for (i, r) in rows.iter().enumerate() {
        m.set_row(i, &r.transpose());
    }
    m
}

/// Differential dimension and index of a family at Θ_ε(pt).
///
/// The tangent space of the coadjoint orbit through μ is the image of the
/// g_θ Poisson tensor M, so ddim = rank(G M) for the gradient rows G, and
/// dind = ddim − rank(G M Gᵀ).
pub fn ddim_dind(spec: &LieAlgebraSpec, family: &IntegralFamily, pt: &PhasePoint) -> DdimDind {
    ddim_dind_at(spec, family, &theta_map(spec, pt, family.epsilon))
}

pub fn ddim_dind_at(spec: &LieAlgebraSpec, family: &IntegralFamily, mu: &ComplexAlgebraVector) -> DdimDind {
    let g = normalized_gradient_rows(spec, family, mu);
    let m = theta_form(spec, mu);
    let gm = &g * &m;
    let differential_rank = numeric::numerical_rank(&gm, RANK_TOL, None);
    let bracket_rank = numeric::numerical_rank(&(&gm * g.transpose()), RANK_TOL, Some(numeric::max_abs(&gm)));
    let ddim = differential_rank.rank;
    DdimDind {
        ddim,
        dind: ddim.saturating_sub(bracket_rank.rank),
        differential_rank,
        bracket_rank,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub seed: u64,
    pub ddim: usize,
    pub dind: usize,
    pub gap_ddim: f64,
    pub gap_bracket: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub algebra: String,
    pub family_kind: crate::integrals::FamilyKind,
    pub members: usize,
    pub epsilon: f64,
    pub ddim: usize,
    pub dind: usize,
    pub phase_dim: usize,
    pub corank: usize,
    pub verdict: bool,
    pub samples: usize,
    /// Samples agreeing with the modal (ddim, dind).
    pub modal_count: usize,
    /// Seeds of samples disagreeing with the modal value.
    pub outliers: Vec<u64>,
    pub rank_tol: f64,
    /// Smallest singular-value gaps over the modal samples.
    pub min_gap_ddim: f64,
    pub min_gap_bracket: f64,
    pub warnings: Vec<String>,
    pub per_sample: Vec<SampleOutcome>,
}

/// ddim/dind at `samples` random phase points (seeds `seed0..seed0+samples`),
/// the modal value, and the test ddim + dind = dim T*O(a).
pub fn completeness_report(family: &IntegralFamily, ctx: &OrbitContext, samples: usize, seed0: u64) -> CompletenessReport {
    completeness_report_with(family, ctx, samples, seed0, Exec::default())
}

pub fn completeness_report_with(family: &IntegralFamily, ctx: &OrbitContext, samples: usize, seed0: u64, exec: Exec) -> CompletenessReport {
    let spec = ctx.algebra();
    let per_sample: Vec<SampleOutcome> = exec.map_range(samples, |i| {
        let seed = seed0 + i as u64;
        let (pt, _) = ctx.random_phase_point(seed);
        let r = ddim_dind(spec, family, &pt);
        SampleOutcome {
            seed,
            ddim: r.ddim,
            dind: r.dind,
            gap_ddim: r.differential_rank.gap,
            gap_bracket: r.bracket_rank.gap,
        }
    });
    let mut votes: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for s in &per_sample {
        *votes.entry((s.ddim, s.dind)).or_default() += 1;
    }
    let ((ddim, dind), modal_count) = votes.iter().max_by_key(|(k, &v)| (v, std::cmp::Reverse(**k))).map_or(((0, 0), 0), |(k, v)| (*k, *v));
    let outliers: Vec<u64> = per_sample.iter().filter(|s| (s.ddim, s.dind) != (ddim, dind)).map(|s| s.seed).collect();
    let modal = per_sample.iter().filter(|s| (s.ddim, s.dind) == (ddim, dind));
    let min_gap_ddim = modal.clone().map(|s| s.gap_ddim).fold(f64::INFINITY, f64::min);
    let min_gap_bracket = modal.map(|s| s.gap_bracket).fold(f64::INFINITY, f64::min);
    let mut warnings = Vec::new();
    if !outliers.is_empty() {
        warnings.push(format!("non-constant ranks across samples; outlier seeds {outliers:?}"));
    }
    if min_gap_ddim < numeric::MIN_GAP || min_gap_bracket < numeric::MIN_GAP {
        warnings.push(format!("ambiguous rank decision: gaps {min_gap_ddim:.2e}, {min_gap_bracket:.2e}"));
    }
    if !ctx.is_regular() {
        warnings.push("singular orbit: commutativity of the invariant part rests on the symmetric-space case".into());
    }
    let phase_dim = ctx.phase_dim();
    CompletenessReport {
        algebra: spec.name().to_string(),
        family_kind: family.kind,
        members: family.len(),
        epsilon: family.epsilon,
        ddim,
        dind,
        phase_dim,
        corank: 0,
        verdict: ddim + dind == phase_dim,
        samples,
        modal_count,
        outliers,
        rank_tol: RANK_TOL,
        min_gap_ddim,
        min_gap_bracket,
        warnings,
        per_sample,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToriAt {
    pub ann_eta: usize,
    pub intersection: usize,
    pub dimension: usize,
    pub generic: bool,
}

/// dim ann(η) − dim(ann(a) ∩ ann(η)) for a single η.
pub fn tori_dimension_at(ctx: &OrbitContext, eta: &AlgebraVector) -> Result<ToriAt> {
    let spec = ctx.algebra();
    let ann_eta = ann_basis(spec, eta, ctx.kernel_tol())?.dim();
    let d = spec.dim();
    let mut stacked = DMatrix::zeros(2 * d, d);
    stacked.view_mut((0, 0), (d, d)).copy_from(&spec.ad_operator(ctx.seed()));
    stacked.view_mut((d, 0), (d, d)).copy_from(&spec.ad_operator(eta));
    let intersection = d - numeric::numerical_rank(&stacked, ctx.kernel_tol(), None).rank;
    let along_ann = spec.inner(&project(spec, eta, &ctx.ann_seed().vectors, false), eta)?.abs().sqrt();
    let generic = ann_eta == spec.rank() && along_ann <= 1e-9 * spec.inner(eta, eta)?.sqrt();
    Ok(ToriAt { ann_eta, intersection, dimension: ann_eta - intersection, generic })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToriReport {
    pub dimension: usize,
    /// Modal dimension at η + εa for each probed ε.
    pub by_epsilon: Vec<(f64, usize)>,
    pub epsilon_independent: bool,
    pub non_generic_samples: usize,
    pub warnings: Vec<String>,
}

/// Predicted invariant-torus dimension, by modal vote over random η ∈ ann(a)^⊥.
pub fn tori_dimension(ctx: &OrbitContext, epsilons: &[f64], samples: usize, seed0: u64) -> Result<ToriReport> {
    let spec = ctx.algebra();
    let etas: Vec<AlgebraVector> = (0..samples as u64)
        .map(|s| {
            let x = ctx.random_orbit_point(seed0 + s).x;
            project(spec, &ctx.cotangent_sample(&x, seed0 + s), &ctx.ann_seed().vectors, true)
        })
        .collect();
    let modal = |shift: f64| -> Result<(usize, usize)> {
        let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
        let mut non_generic = 0;
        for eta in &etas {
            let at = tori_dimension_at(ctx, &(eta + &ctx.seed().scale(shift)))?;
            *votes.entry(at.dimension).or_default() += 1;
            if ann_basis(spec, eta, ctx.kernel_tol())?.dim() != spec.rank() {
                non_generic += 1;
            }
        }
        let dim = votes.iter().max_by_key(|(_, &v)| v).map_or(0, |(k, _)| *k);
        Ok((dim, non_generic))
    };
    let (dimension, non_generic_samples) = modal(0.0)?;
    let by_epsilon = epsilons.iter().map(|&e| modal(e).map(|(d, _)| (e, d))).collect::<Result<Vec<_>>>()?;
    let epsilon_independent = by_epsilon.iter().all(|(_, d)| *d == dimension);
    let mut warnings = Vec::new();
    if non_generic_samples > 0 {
        warnings.push(format!("{non_generic_samples} of {samples} samples had non-generic annihilators"));
    }
    Ok(ToriReport { dimension, by_epsilon, epsilon_independent, non_generic_samples, warnings })
}

/// Ranks of Λ_{1,λ} at μ over a λ grid.
pub fn rank_profile(spec: &LieAlgebraSpec, mu: &ComplexAlgebraVector, b: &AlgebraVector, lambdas: &[f64]) -> Vec<RankInfo> {
    rank_profile_with(spec, mu, b, lambdas, Exec::default())
}

pub fn rank_profile_with(spec: &LieAlgebraSpec, mu: &ComplexAlgebraVector, b: &AlgebraVector, lambdas: &[f64], exec: Exec) -> Vec<RankInfo> {
    let theta = theta_form(spec, mu);
    let frozen = frozen_form(spec, mu, b);
    exec.map(lambdas, |&l| numeric::numerical_rank(&(&theta + &frozen * l), RANK_TOL, None))
}

#[cfg(test)]
mod tests;
