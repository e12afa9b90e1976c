use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::numeric::{CMatrix, C64};

/// How an invariant polynomial is evaluated on the defining representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantKind {
    /// Elementary symmetric function e_k of the eigenvalues, i.e. the
    /// characteristic-polynomial coefficient of degree k up to sign.
    CharCoefficient(usize),
    /// Power trace tr(X^k).
    PowerTrace(usize),
    /// Pfaffian of an antisymmetric defining matrix (even so(n)).
    Pfaffian,
}

/// Selects which invariant family backs a shipped algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantBackend {
    #[default]
    CharCoefficients,
    PowerTraces,
}

/// A basic Ad-invariant polynomial, evaluable on complex matrices so that it
/// extends holomorphically to the complexification.
///
/// Odd-degree symmetric functions of anti-Hermitian matrices are purely
/// imaginary, so each polynomial carries a unit phase making it real on g:
/// 1 for even degree, −i for odd degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantPolynomial {
    /// 1-based index j.
    pub index: usize,
    pub degree: usize,
    pub kind: InvariantKind,
}

impl InvariantPolynomial {
    pub fn new(index: usize, kind: InvariantKind, matrix_size: usize) -> Self {
        let degree = match kind {
            InvariantKind::CharCoefficient(k) | InvariantKind::PowerTrace(k) => k,
            InvariantKind::Pfaffian => matrix_size / 2,
        };
        Self { index, degree, kind }
    }

    fn phase(&self) -> C64 {
        match self.kind {
            InvariantKind::Pfaffian => Complex::new(1.0, 0.0),
            _ if self.degree.is_multiple_of(2) => Complex::new(1.0, 0.0),
            _ => Complex::new(0.0, -1.0),
        }
    }

    pub fn eval(&self, z: &CMatrix) -> C64 {
        let raw = match self.kind {
            InvariantKind::CharCoefficient(k) => elementary_symmetric(z, k).0[k],
            InvariantKind::PowerTrace(k) => matrix_power(z, k).trace(),
            InvariantKind::Pfaffian => pfaffian(z),
        };
        self.phase() * raw
    }

    /// Matrix G with dP(Z)[dZ] = tr(G dZ), when an exact formula exists.
    pub fn matrix_gradient(&self, z: &CMatrix) -> Option<CMatrix> {
        let g = match self.kind {
            InvariantKind::CharCoefficient(k) => {
                // de_k = tr(Q dZ), Q = Σ_{i<k} (−1)^i e_{k−1−i} Z^i.
                let (e, powers) = elementary_symmetric(z, k);
                let n = z.nrows();
                let mut q = CMatrix::zeros(n, n);
                for (i, zi) in powers.iter().enumerate().take(k) {
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    q += zi * (e[k - 1 - i] * sign);
                }
                q
            }
            InvariantKind::PowerTrace(k) => matrix_power(z, k - 1) * Complex::new(k as f64, 0.0),
            InvariantKind::Pfaffian => return None,
        };
        Some(g * self.phase())
    }

    pub fn has_exact_gradient(&self) -> bool {
        !matches!(self.kind, InvariantKind::Pfaffian)
    }
}

fn matrix_power(z: &CMatrix, k: usize) -> CMatrix {
    let n = z.nrows();
    let mut p = CMatrix::identity(n, n);
    for _ in 0..k {
        p = &p * z;
    }
    p
}

/// Returns (e_0..=e_k, [Z^0, .., Z^k]) using Newton's identities on power traces.
fn elementary_symmetric(z: &CMatrix, k: usize) -> (Vec<C64>, Vec<CMatrix>) {
    let n = z.nrows();
    let mut powers = Vec::with_capacity(k + 1);
    powers.push(CMatrix::identity(n, n));
    for i in 1..=k {
        let next = &powers[i - 1] * z;
        powers.push(next);
    }
    let s: Vec<C64> = powers.iter().map(|p| p.trace()).collect();
    let mut e = vec![Complex::new(0.0, 0.0); k + 1];
    e[0] = Complex::new(1.0, 0.0);
    for m in 1..=k {
        let mut acc = Complex::new(0.0, 0.0);
        for i in 1..=m {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += e[m - i] * s[i] * sign;
        }
        e[m] = acc / (m as f64);
    }
    (e, powers)
}

/// Pfaffian by Parlett-Reid elimination with partial pivoting.
pub fn pfaffian(a: &CMatrix) -> C64 {
    let n = a.nrows();
    if n % 2 == 1 {
        return Complex::new(0.0, 0.0);
    }
    let mut a = a.clone();
    let mut pf = Complex::new(1.0, 0.0);
    let mut k = 0;
    while k + 1 < n {
        let mut kp = k + 1;
        for i in k + 2..n {
            if a[(i, k)].norm() > a[(kp, k)].norm() {
                kp = i;
            }
        }
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        if a[(k + 1, k)].norm() == 0.0 {
            return Complex::new(0.0, 0.0);
        }
        let pivot = a[(k, k + 1)];
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<C64> = (k + 2..n).map(|j| a[(k, j)] / pivot).collect();
            let col: Vec<C64> = (k + 2..n).map(|i| a[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    a[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}
