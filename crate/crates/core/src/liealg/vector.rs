use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// Coordinates of an element of a Lie algebra in its basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlgebraVector(pub DVector<f64>);

impl AlgebraVector {
    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    /// The `k`-th basis element.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[k] = 1.0;
        Self(v)
    }

    pub fn from_slice(coords: &[f64]) -> Self {
        Self(DVector::from_column_slice(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    /// Euclidean norm of the coordinate vector.
    pub fn coord_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * s)
    }
}

impl From<DVector<f64>> for AlgebraVector {
    fn from(v: DVector<f64>) -> Self {
        Self(v)
    }
}

impl Add for &AlgebraVector {
    type Output = AlgebraVector;
    fn add(self, rhs: &AlgebraVector) -> AlgebraVector {
        AlgebraVector(&self.0 + &rhs.0)
    }
}

impl Add for AlgebraVector {
    type Output = AlgebraVector;
    fn add(self, rhs: AlgebraVector) -> AlgebraVector {
        AlgebraVector(self.0 + rhs.0)
    }
}

impl AddAssign<&AlgebraVector> for AlgebraVector {
    fn add_assign(&mut self, rhs: &AlgebraVector) {
        self.0 += &rhs.0;
    }
}

impl Sub for &AlgebraVector {
    type Output = AlgebraVector;
    fn sub(self, rhs: &AlgebraVector) -> AlgebraVector {
        AlgebraVector(&self.0 - &rhs.0)
    }
}

impl Sub for AlgebraVector {
    type Output = AlgebraVector;
    fn sub(self, rhs: AlgebraVector) -> AlgebraVector {
        AlgebraVector(self.0 - rhs.0)
    }
}

impl Neg for &AlgebraVector {
    type Output = AlgebraVector;
    fn neg(self) -> AlgebraVector {
        AlgebraVector(-&self.0)
    }
}

impl Mul<&AlgebraVector> for f64 {
    type Output = AlgebraVector;
    fn mul(self, rhs: &AlgebraVector) -> AlgebraVector {
        AlgebraVector(&rhs.0 * self)
    }
}

/// An element ξ + iη of g ⊕ ig, which carries both the complexification g_0
/// and the contraction g_θ (they share the underlying linear space).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexAlgebraVector {
    pub re: AlgebraVector,
    pub im: AlgebraVector,
}

impl ComplexAlgebraVector {
    pub fn new(re: AlgebraVector, im: AlgebraVector) -> Self {
        debug_assert_eq!(re.dim(), im.dim());
        Self { re, im }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(AlgebraVector::zeros(dim), AlgebraVector::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.re.dim()
    }

    /// Stack as a real vector `[re; im]` of length 2d.
    pub fn to_real(&self) -> DVector<f64> {
        let d = self.dim();
        let mut v = DVector::zeros(2 * d);
        v.rows_mut(0, d).copy_from(&self.re.0);
        v.rows_mut(d, d).copy_from(&self.im.0);
        v
    }

    pub fn from_real(v: &DVector<f64>) -> Self {
        let d = v.len() / 2;
        Self::new(
            AlgebraVector(v.rows(0, d).into_owned()),
            AlgebraVector(v.rows(d, d).into_owned()),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.re.scale(s), self.im.scale(s))
    }
}

impl Add for &ComplexAlgebraVector {
    type Output = ComplexAlgebraVector;
    fn add(self, rhs: &ComplexAlgebraVector) -> ComplexAlgebraVector {
        ComplexAlgebraVector::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &ComplexAlgebraVector {
    type Output = ComplexAlgebraVector;
    fn sub(self, rhs: &ComplexAlgebraVector) -> ComplexAlgebraVector {
        ComplexAlgebraVector::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}
