//! Dense vector and matrix types.
//!
//! Vectors and general matrices are plain `nalgebra` dynamic types. Symmetric
//! matrices get a newtype so that symmetry is a construction-time invariant.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// A real symmetric matrix.
///
/// The upper triangle is mirrored onto the lower one on construction, so the
/// stored matrix is exactly symmetric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    /// Symmetrizes `m` as `(m + mᵀ)/2`.
    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        let mut s = (m + m.transpose()) * 0.5;
        let n = s.nrows();
        for i in 0..n {
            for j in 0..i {
                s[(i, j)] = s[(j, i)];
            }
        }
        Ok(SymMatrix(s))
    }

    /// Builds from the upper triangle of `m`, ignoring the lower triangle.
    pub fn from_upper(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        let mut s = m.clone();
        let n = s.nrows();
        for i in 0..n {
            for j in 0..i {
                s[(i, j)] = s[(j, i)];
            }
        }
        Ok(SymMatrix(s))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(Matrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix(Matrix::zeros(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        SymMatrix(Matrix::from_diagonal(&Vector::from_column_slice(d)))
    }

    /// `Σᵢ wᵢ vᵢ vᵢᵀ`-style rank-one update: returns `self + w·v vᵀ`.
    pub fn rank_one_update(&self, v: &Vector, w: f64) -> Self {
        let mut m = self.0.clone();
        m.ger(w, v, v, 1.0);
        SymMatrix::from_upper(&m).expect("square")
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        SymMatrix(&self.0 * s)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Quadratic form `xᵀ A x`.
    pub fn quad_form(&self, x: &Vector) -> f64 {
        x.dot(&(&self.0 * x))
    }

    fn check_same(&self, other: &SymMatrix) {
        assert_eq!(self.dim(), other.dim(), "symmetric matrix dimension mismatch");
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows_to_matrix(&rows)?;
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        let asym = (&m - m.transpose()).amax();
        if asym > 1e-12 * (1.0 + m.amax()) {
            return Err(Error::invalid("matrix is not symmetric"));
        }
        SymMatrix::from_upper(&m)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(s: SymMatrix) -> Self {
        matrix_to_rows(&s.0)
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        self.check_same(rhs);
        SymMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        self.check_same(rhs);
        SymMatrix(&self.0 - &rhs.0)
    }
}

impl Mul<&Vector> for &SymMatrix {
    type Output = Vector;
    fn mul(self, rhs: &Vector) -> Vector {
        assert_eq!(self.dim(), rhs.len(), "matrix-vector dimension mismatch");
        &self.0 * rhs
    }
}

/// Parses a row-major nested list. All rows must have equal, nonzero length.
pub fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<Matrix> {
    let m = rows.len();
    if m == 0 {
        return Err(Error::invalid("empty matrix"));
    }
    let n = rows[0].len();
    if n == 0 {
        return Err(Error::invalid("empty matrix row"));
    }
    for r in rows {
        if r.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: r.len() });
        }
        if r.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("matrix literal"));
        }
    }
    Ok(Matrix::from_fn(m, n, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Largest absolute entry of `QᵀQ − Id`.
pub fn orthogonality_defect(q: &Matrix) -> f64 {
    let n = q.ncols();
    (q.transpose() * q - Matrix::identity(n, n)).amax()
}

/// Spectral (operator 2-) norm of a general matrix via its Gram matrix.
pub fn operator_norm(m: &Matrix) -> f64 {
    let gram = SymMatrix::from_matrix(&(m.transpose() * m)).expect("square");
    super::eigen::sym_eig(&gram)
        .map(|d| d.max().max(0.0).sqrt())
        .unwrap_or(f64::NAN)
}

/// Standard basis vector `eᵢ` in `ℝⁿ`.
pub fn unit_vector(n: usize, i: usize) -> Vector {
    let mut e = Vector::zeros(n);
    e[i] = 1.0;
    e
}
