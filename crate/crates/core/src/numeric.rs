//! Dense linear-algebra helpers shared by the modules: numerical rank with gap
//! reporting, kernels, and the complex matrix alias.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Relative singular-value threshold used for every rank decision.
pub const RANK_TOL: f64 = 1e-8;

/// A gap below this value marks a rank decision as ambiguous.
pub const MIN_GAP: f64 = 10.0;

/// Outcome of a numerical rank decision.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RankInfo {
    pub rank: usize,
    /// Ratio between the smallest retained and the largest discarded singular
    /// value. Discarded values are floored at machine precision times the
    /// reference scale, so exact zeros give a large but finite gap.
    pub gap: f64,
    pub ambiguous: bool,
    /// Singular values in descending order.
    pub singular_values: Vec<f64>,
    /// Absolute threshold actually applied.
    pub threshold: f64,
}

fn sorted_svd(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    // Pad to a square matrix so that the full right-singular basis is available.
    let (r, c) = m.shape();
    let padded = if r < c {
        let mut p = DMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut v = DMatrix::zeros(c, order.len());
    for (col, &i) in order.iter().enumerate() {
        v.set_column(col, &v_t.row(i).transpose());
    }
    (values, v)
}

fn decide(values: &[f64], rel_tol: f64, reference: Option<f64>) -> RankInfo {
    let smax = values.first().copied().unwrap_or(0.0);
    let scale = reference.unwrap_or(0.0).max(smax);
    let threshold = rel_tol * scale;
    let rank = if scale == 0.0 {
        0
    } else {
        values.iter().filter(|&&s| s > threshold).count()
    };
    let floor = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    let upper = if rank == 0 { scale } else { values[rank - 1] };
    let lower = values.get(rank).copied().unwrap_or(0.0).max(floor);
    let gap = if scale == 0.0 { f64::INFINITY } else { upper / lower };
    RankInfo {
        rank,
        gap,
        ambiguous: gap < MIN_GAP,
        singular_values: values.to_vec(),
        threshold,
    }
}

/// Numerical rank by singular values above `rel_tol` times the larger of the
/// largest singular value and `reference`.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64, reference: Option<f64>) -> RankInfo {
    if m.nrows() == 0 || m.ncols() == 0 {
        return decide(&[], rel_tol, reference);
    }
    let (values, _) = sorted_svd(m);
    decide(&values, rel_tol, reference)
}

/// Right kernel of `m` (columns of the returned matrix, Euclidean-orthonormal)
/// together with the rank decision that produced it.
pub fn kernel(m: &DMatrix<f64>, rel_tol: f64, reference: Option<f64>) -> (DMatrix<f64>, RankInfo) {
    let (values, v) = sorted_svd(m);
    let info = decide(&values, rel_tol, reference);
    let n = m.ncols();
    let k = n - info.rank.min(n);
    (v.columns(n - k, k).into_owned(), info)
}

/// The `k` right singular vectors of `m` with the smallest singular values.
pub fn smallest_right_singular(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let (_, v) = sorted_svd(m);
    let n = v.ncols();
    v.columns(n - k, k).into_owned()
}

/// Moore-Penrose pseudo-inverse applied to a vector.
pub fn pinv_solve(m: &DMatrix<f64>, rhs: &DVector<f64>, rel_tol: f64) -> DVector<f64> {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = (rel_tol * smax).max(f64::MIN_POSITIVE);
    svd.solve(rhs, eps).expect("both factors were computed")
}

/// Maximum absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Write a real matrix as CSV without header.
pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:e}", m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
