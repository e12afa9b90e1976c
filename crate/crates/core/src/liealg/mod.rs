//! Finite-dimensional arithmetic for compact matrix Lie algebras.
//!
//! A [`LieAlgebraSpec`] is built from a basis of matrices in a defining
//! representation. Structure constants are recovered by least-squares
//! projection of basis commutators, and the invariant inner product is the
//! negative Killing form rescaled so that its smallest diagonal entry is 1.

mod bracket;
mod invariant;
mod vector;

pub use bracket::{lie_poisson, pairing, theta_bracket, BracketKind};
pub(crate) use bracket::{g0_br, ib_value, theta_br};
pub use invariant::{pfaffian, InvariantBackend, InvariantKind, InvariantPolynomial};
pub use vector::{AlgebraVector, ComplexAlgebraVector};

use nalgebra::{Complex, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{self, CMatrix, C64};

/// Commutator residual above which construction is aborted.
pub const STRUCTURE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgebraFamily {
    So(usize),
    Su(usize),
    Explicit,
}

/// A compact semisimple Lie algebra given by a matrix basis.
#[derive(Debug, Clone)]
pub struct LieAlgebraSpec {
    name: String,
    family: AlgebraFamily,
    dim: usize,
    rank: usize,
    basis: Vec<CMatrix>,
    structure: Vec<f64>,
    ad_basis: Vec<DMatrix<f64>>,
    gram: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
    invariants: Vec<InvariantPolynomial>,
    /// Pseudo-inverse of the flattened basis, for matrix → coordinates.
    coord_pinv: DMatrix<f64>,
}

/// Residuals of the defining identities, as checked by [`LieAlgebraSpec::validate`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub antisymmetry: f64,
    pub jacobi: f64,
    pub ad_invariance: f64,
    pub min_gram_eigenvalue: f64,
    pub commutator_residual: f64,
}

fn real(v: f64) -> C64 {
    Complex::new(v, 0.0)
}

fn imag(v: f64) -> C64 {
    Complex::new(0.0, v)
}

fn flatten(m: &CMatrix) -> DVector<f64> {
    let n2 = m.len();
    let mut v = DVector::zeros(2 * n2);
    for (k, z) in m.iter().enumerate() {
        v[k] = z.re;
        v[n2 + k] = z.im;
    }
    v
}

impl LieAlgebraSpec {
    /// so(n), n ≥ 3, with basis E_kj − E_jk; for n = 3 the basis is ordered and
    /// signed so that the bracket is the cross product.
    pub fn so(n: usize) -> Result<Self> {
        Self::so_with(n, InvariantBackend::default())
    }

    pub fn so_with(n: usize, backend: InvariantBackend) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config(format!("so({n}) is not semisimple; need n >= 3")));
        }
        let pair = |j: usize, k: usize, sign: f64| {
            let mut m = CMatrix::zeros(n, n);
            m[(k, j)] = real(sign);
            m[(j, k)] = real(-sign);
            m
        };
        let basis = if n == 3 {
            vec![pair(1, 2, 1.0), pair(0, 2, -1.0), pair(0, 1, 1.0)]
        } else {
            let mut b = Vec::new();
            for j in 0..n {
                for k in j + 1..n {
                    b.push(pair(j, k, 1.0));
                }
            }
            b
        };
        let mut invariants = Vec::new();
        for (idx, k) in (1..=(n - 1) / 2).map(|m| 2 * m).enumerate() {
            invariants.push(InvariantPolynomial::new(idx + 1, backend_kind(backend, k), n));
        }
        if n.is_multiple_of(2) {
            let idx = invariants.len() + 1;
            invariants.push(InvariantPolynomial::new(idx, InvariantKind::Pfaffian, n));
        }
        Self::build(format!("so({n})"), AlgebraFamily::So(n), basis, invariants)
    }

    /// su(n), n ≥ 2. The first n−1 basis elements span the diagonal Cartan
    /// subalgebra; all basis elements are orthonormal for −tr(XY).
    pub fn su(n: usize) -> Result<Self> {
        Self::su_with(n, InvariantBackend::default())
    }

    pub fn su_with(n: usize, backend: InvariantBackend) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("su({n}) is trivial; need n >= 2")));
        }
        let mut basis = Vec::new();
        for m in 1..n {
            let norm = ((m * (m + 1)) as f64).sqrt();
            let mut h = CMatrix::zeros(n, n);
            for i in 0..m {
                h[(i, i)] = imag(1.0 / norm);
            }
            h[(m, m)] = imag(-(m as f64) / norm);
            basis.push(h);
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for j in 0..n {
            for k in j + 1..n {
                let mut a = CMatrix::zeros(n, n);
                a[(j, k)] = real(s);
                a[(k, j)] = real(-s);
                basis.push(a);
                let mut b = CMatrix::zeros(n, n);
                b[(j, k)] = imag(s);
                b[(k, j)] = imag(s);
                basis.push(b);
            }
        }
        let invariants = (2..=n)
            .enumerate()
            .map(|(idx, k)| InvariantPolynomial::new(idx + 1, backend_kind(backend, k), n))
            .collect();
        Self::build(format!("su({n})"), AlgebraFamily::Su(n), basis, invariants)
    }

    /// An algebra from an explicit list of basis matrices. `invariant_degrees`
    /// selects characteristic-polynomial coefficients as invariants; without
    /// it, operations that need invariants report a configuration error.
    pub fn from_basis(name: &str, basis: Vec<CMatrix>, invariant_degrees: Option<&[usize]>) -> Result<Self> {
        let n = basis.first().map(|b| b.nrows()).unwrap_or(0);
        let invariants = invariant_degrees
            .unwrap_or(&[])
            .iter()
            .enumerate()
            .map(|(idx, &k)| InvariantPolynomial::new(idx + 1, InvariantKind::CharCoefficient(k), n))
            .collect();
        Self::build(name.to_string(), AlgebraFamily::Explicit, basis, invariants)
    }

    fn build(name: String, family: AlgebraFamily, basis: Vec<CMatrix>, invariants: Vec<InvariantPolynomial>) -> Result<Self> {
        let d = basis.len();
        if d == 0 {
            return Err(Error::Config("empty basis".into()));
        }
        let n = basis[0].nrows();
        if basis.iter().any(|b| b.nrows() != n || b.ncols() != n) {
            return Err(Error::Config("basis matrices must be square and of equal size".into()));
        }
        let mut flat = DMatrix::zeros(2 * n * n, d);
        for (k, b) in basis.iter().enumerate() {
            flat.set_column(k, &flatten(b));
        }
        let info = numeric::numerical_rank(&flat, 1e-12, None);
        if info.rank < d {
            return Err(Error::Config(format!("basis is linearly dependent (rank {} < {d})", info.rank)));
        }
        let coord_pinv = flat
            .clone()
            .pseudo_inverse(1e-14)
            .map_err(|e| Error::Numerical(e.to_string()))?;

        let mut structure = vec![0.0; d * d * d];
        for i in 0..d {
            for j in i + 1..d {
                let comm = &basis[i] * &basis[j] - &basis[j] * &basis[i];
                let target = flatten(&comm);
                let c = &coord_pinv * &target;
                let residual = (&flat * &c - &target).norm() / target.norm().max(1.0);
                if residual > STRUCTURE_TOL {
                    return Err(Error::Construction { what: "basis is not closed under the commutator;", residual });
                }
                for k in 0..d {
                    structure[(i * d + j) * d + k] = c[k];
                    structure[(j * d + i) * d + k] = -c[k];
                }
            }
        }
        let ad_basis: Vec<DMatrix<f64>> = (0..d)
            .map(|i| DMatrix::from_fn(d, d, |l, k| structure[(i * d + k) * d + l]))
            .collect();

        // Negative Killing form, rescaled.
        let mut gram = DMatrix::from_fn(d, d, |i, j| -(&ad_basis[i] * &ad_basis[j]).trace());
        let min_diag = (0..d).map(|i| gram[(i, i)]).fold(f64::INFINITY, f64::min);
        if min_diag <= 0.0 {
            return Err(Error::Config(format!("{name}: negative Killing form is not positive definite (compact semisimple algebra required)")));
        }
        gram /= min_diag;
        let gram = (&gram + gram.transpose()) * 0.5;
        let chol = gram.clone().cholesky().ok_or_else(|| {
            Error::Config(format!("{name}: negative Killing form is not positive definite (compact semisimple algebra required)"))
        })?;
        let gram_inv = chol.inverse();

        let mut spec = Self {
            name,
            family,
            dim: d,
            rank: 0,
            basis,
            structure,
            ad_basis,
            gram,
            gram_inv,
            invariants,
            coord_pinv,
        };
        spec.rank = spec.generic_centralizer_dim();
        Ok(spec)
    }

    /// dim ann(x) at a pseudo-random (hence regular) element.
    fn generic_centralizer_dim(&self) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0b17);
        let x = AlgebraVector(DVector::from_fn(self.dim, |_, _| StandardNormal.sample(&mut rng)));
        let (_, info) = numeric::kernel(&self.ad_operator(&x), numeric::RANK_TOL, None);
        self.dim - info.rank
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> AlgebraFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Size n of the defining n×n matrices.
    pub fn matrix_size(&self) -> usize {
        self.basis[0].nrows()
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn gram_inv(&self) -> &DMatrix<f64> {
        &self.gram_inv
    }

    /// C[i][j][k] with [e_i, e_j] = Σ_k C[i][j][k] e_k.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.structure[(i * self.dim + j) * self.dim + k]
    }

    pub fn is_so3(&self) -> bool {
        self.family == AlgebraFamily::So(3)
    }

    pub fn zero(&self) -> AlgebraVector {
        AlgebraVector::zeros(self.dim)
    }

    pub fn basis_vector(&self, k: usize) -> AlgebraVector {
        AlgebraVector::basis(self.dim, k)
    }

    pub fn vector(&self, coords: &[f64]) -> Result<AlgebraVector> {
        Error::check_dim(self.dim, coords.len())?;
        Ok(AlgebraVector::from_slice(coords))
    }

    pub(crate) fn check(&self, x: &AlgebraVector) -> Result<()> {
        Error::check_dim(self.dim, x.dim())
    }

    /// Lie bracket [x, y] from the structure constants.
    pub fn bracket(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<AlgebraVector> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.br(x, y))
    }

    pub(crate) fn br(&self, x: &AlgebraVector, y: &AlgebraVector) -> AlgebraVector {
        AlgebraVector(self.ad_operator(x) * &y.0)
    }

    /// Invariant inner product ⟨x, y⟩ = xᵀ·gram·y.
    pub fn inner(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.ip(x, y))
    }

    pub(crate) fn ip(&self, x: &AlgebraVector, y: &AlgebraVector) -> f64 {
        x.0.dot(&(&self.gram * &y.0))
    }

    pub(crate) fn norm(&self, x: &AlgebraVector) -> f64 {
        self.ip(x, x).max(0.0).sqrt()
    }

    /// Matrix of ad_x = [x, ·]; column k is [x, e_k].
    pub fn ad_operator(&self, x: &AlgebraVector) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (xi, adi) in x.0.iter().zip(&self.ad_basis) {
            if *xi != 0.0 {
                m += adi * *xi;
            }
        }
        m
    }

    /// Matrix of Ad_{exp(tξ)} = exp(t·ad_ξ) acting on coordinates.
    pub fn adjoint_matrix(&self, xi: &AlgebraVector, t: f64) -> DMatrix<f64> {
        (self.ad_operator(xi) * t).exp()
    }

    /// Ad_{exp(tξ)} y.
    pub fn group_adjoint(&self, xi: &AlgebraVector, t: f64, y: &AlgebraVector) -> Result<AlgebraVector> {
        self.check(xi)?;
        self.check(y)?;
        Ok(AlgebraVector(self.adjoint_matrix(xi, t) * &y.0))
    }

    /// Defining-representation matrix Σ x_k B_k.
    pub fn to_matrix(&self, x: &AlgebraVector) -> CMatrix {
        let n = self.matrix_size();
        let mut m = CMatrix::zeros(n, n);
        for (xk, bk) in x.0.iter().zip(&self.basis) {
            if *xk != 0.0 {
                m += bk * real(*xk);
            }
        }
        m
    }

    /// Matrix of re + i·im in the complexified defining representation.
    pub fn to_complex_matrix(&self, re: &AlgebraVector, im: &AlgebraVector) -> CMatrix {
        let n = self.matrix_size();
        let mut m = CMatrix::zeros(n, n);
        for ((r, i), bk) in re.0.iter().zip(im.0.iter()).zip(&self.basis) {
            m += bk * Complex::new(*r, *i);
        }
        m
    }

    /// Least-squares real coordinates of a matrix, with the residual norm.
    pub fn matrix_coords(&self, m: &CMatrix) -> (AlgebraVector, f64) {
        let target = flatten(m);
        let c = &self.coord_pinv * &target;
        let mut back = DVector::zeros(target.len());
        for (k, b) in self.basis.iter().enumerate() {
            back += flatten(b) * c[k];
        }
        (AlgebraVector(c), (back - target).norm())
    }

    /// Converts coordinate partial derivatives into a gradient w.r.t. ⟨·,·⟩.
    pub fn raise(&self, partials: &DVector<f64>) -> AlgebraVector {
        AlgebraVector(&self.gram_inv * partials)
    }

    /// The basic invariants; errors when the algebra carries none.
    pub fn invariant_polynomials(&self) -> Result<&[InvariantPolynomial]> {
        if self.invariants.is_empty() {
            Err(Error::Config(format!(
                "{}: no invariant polynomials available; supply invariant_degrees for explicit bases",
                self.name
            )))
        } else {
            Ok(&self.invariants)
        }
    }

    /// Real values p_j(x) of all invariants at a real element.
    pub fn invariant_values(&self, x: &AlgebraVector) -> Vec<f64> {
        let m = self.to_matrix(x);
        self.invariants.iter().map(|p| p.eval(&m).re).collect()
    }

    /// w_k = tr(G B_k) for a matrix gradient G, i.e. the complex partial
    /// derivatives ∂P/∂z_k of P(Σ z_k B_k).
    pub fn matrix_gradient_coords(&self, g: &CMatrix) -> Vec<C64> {
        self.basis.iter().map(|b| (g * b).trace()).collect()
    }

    /// Gradient of a real invariant at a real element, w.r.t. ⟨·,·⟩.
    pub fn invariant_gradient(&self, poly: &InvariantPolynomial, x: &AlgebraVector) -> AlgebraVector {
        let m = self.to_matrix(x);
        let partials = match poly.matrix_gradient(&m) {
            Some(g) => DVector::from_iterator(self.dim, self.matrix_gradient_coords(&g).into_iter().map(|w| w.re)),
            None => {
                let h = 1e-6;
                DVector::from_fn(self.dim, |k, _| {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp.0[k] += h;
                    xm.0[k] -= h;
                    (poly.eval(&self.to_matrix(&xp)).re - poly.eval(&self.to_matrix(&xm)).re) / (2.0 * h)
                })
            }
        };
        self.raise(&partials)
    }

    /// Check the defining identities on all basis triples.
    pub fn validate(&self) -> ValidationReport {
        let d = self.dim;
        let mut antisymmetry: f64 = 0.0;
        let mut jacobi: f64 = 0.0;
        let mut ad_invariance: f64 = 0.0;
        let mut commutator_residual: f64 = 0.0;
        let e: Vec<AlgebraVector> = (0..d).map(|k| self.basis_vector(k)).collect();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    antisymmetry = antisymmetry.max((self.structure_constant(i, j, k) + self.structure_constant(j, i, k)).abs());
                }
                let comm = &self.basis[i] * &self.basis[j] - &self.basis[j] * &self.basis[i];
                let diff = comm - self.to_matrix(&self.br(&e[i], &e[j]));
                commutator_residual = commutator_residual.max(diff.norm());
            }
        }
        for i in 0..d {
            for j in 0..d {
                let eij = self.br(&e[i], &e[j]);
                for k in 0..d {
                    let jac = self.br(&eij, &e[k]) + self.br(&self.br(&e[j], &e[k]), &e[i]) + self.br(&self.br(&e[k], &e[i]), &e[j]);
                    jacobi = jacobi.max(jac.0.amax());
                    let inv = self.ip(&self.br(&e[k], &e[i]), &e[j]) + self.ip(&e[i], &self.br(&e[k], &e[j]));
                    ad_invariance = ad_invariance.max(inv.abs());
                }
            }
        }
        let min_gram_eigenvalue = self.gram.clone().symmetric_eigen().eigenvalues.min();
        ValidationReport {
            antisymmetry,
            jacobi,
            ad_invariance,
            min_gram_eigenvalue,
            commutator_residual,
        }
    }

    pub fn descriptor(&self) -> AlgebraDescriptor {
        match self.family {
            AlgebraFamily::So(n) => AlgebraDescriptor::Family { family: FamilyName::So, n, backend: InvariantBackend::default() },
            AlgebraFamily::Su(n) => AlgebraDescriptor::Family { family: FamilyName::Su, n, backend: InvariantBackend::default() },
            AlgebraFamily::Explicit => AlgebraDescriptor::Explicit {
                name: Some(self.name.clone()),
                basis: self
                    .basis
                    .iter()
                    .map(|b| (0..b.nrows()).map(|i| (0..b.ncols()).map(|j| MatrixEntry::Complex([b[(i, j)].re, b[(i, j)].im])).collect()).collect())
                    .collect(),
                invariant_degrees: Some(
                    self.invariants
                        .iter()
                        .filter_map(|p| match p.kind {
                            InvariantKind::CharCoefficient(k) => Some(k),
                            _ => None,
                        })
                        .collect(),
                ),
            },
        }
    }
}

fn backend_kind(backend: InvariantBackend, k: usize) -> InvariantKind {
    match backend {
        InvariantBackend::CharCoefficients => InvariantKind::CharCoefficient(k),
        InvariantBackend::PowerTraces => InvariantKind::PowerTrace(k),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    So,
    Su,
}

/// A matrix entry in an explicit basis: a real number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixEntry {
    Real(f64),
    Complex([f64; 2]),
}

impl MatrixEntry {
    fn value(self) -> C64 {
        match self {
            MatrixEntry::Real(r) => real(r),
            MatrixEntry::Complex([re, im]) => Complex::new(re, im),
        }
    }
}

/// JSON description of an algebra: `{ "family": "so"|"su", "n": k }` or an
/// explicit list of row-major basis matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraDescriptor {
    Family {
        family: FamilyName,
        n: usize,
        #[serde(default)]
        backend: InvariantBackend,
    },
    Explicit {
        #[serde(default)]
        name: Option<String>,
        basis: Vec<Vec<Vec<MatrixEntry>>>,
        #[serde(default)]
        invariant_degrees: Option<Vec<usize>>,
    },
}

impl AlgebraDescriptor {
    pub fn build(&self) -> Result<LieAlgebraSpec> {
        match self {
            AlgebraDescriptor::Family { family: FamilyName::So, n, backend } => LieAlgebraSpec::so_with(*n, *backend),
            AlgebraDescriptor::Family { family: FamilyName::Su, n, backend } => LieAlgebraSpec::su_with(*n, *backend),
            AlgebraDescriptor::Explicit { name, basis, invariant_degrees } => {
                let mut mats = Vec::with_capacity(basis.len());
                for (k, rows) in basis.iter().enumerate() {
                    let n = rows.len();
                    if rows.iter().any(|r| r.len() != n) {
                        return Err(Error::Config(format!("basis[{k}] is not square")));
                    }
                    mats.push(CMatrix::from_fn(n, n, |i, j| rows[i][j].value()));
                }
                LieAlgebraSpec::from_basis(name.as_deref().unwrap_or("explicit"), mats, invariant_degrees.as_deref())
            }
        }
    }

    pub fn from_json(text: &str) -> Result<LieAlgebraSpec> {
        let desc: AlgebraDescriptor = serde_json::from_str(text).map_err(|e| Error::Config(format!("algebra spec: {e}")))?;
        desc.build()
    }
}

#[cfg(test)]
mod tests;
