use serde::{Deserialize, Serialize};

use super::Body;
use crate::error::{Error, Result};
use crate::numkit::{Matrix, SymMatrix, Vector};

const MAX_CONDITION: f64 = 1e12;

/// Linear image `T(K)` of a base body, evaluated by pullback through the
/// cached inverse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineBody {
    pub(crate) base: Box<Body>,
    pub(crate) map: Matrix,
    pub(crate) inverse: Matrix,
}

/// 2-norm condition number from the Gram matrix spectrum.
pub fn condition_number(t: &Matrix) -> f64 {
    let gram = SymMatrix::from_matrix(&(t.transpose() * t)).expect("square");
    match crate::numkit::sym_eig(&gram) {
        Ok(d) if d.min() > 0.0 => (d.max() / d.min()).sqrt(),
        _ => f64::INFINITY,
    }
}

/// Inverse of an invertible square map, rejecting condition numbers above 1e12.
pub fn checked_inverse(t: &Matrix) -> Result<Matrix> {
    if !t.is_square() {
        return Err(Error::DimensionMismatch { expected: t.nrows(), got: t.ncols() });
    }
    if t.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("linear map"));
    }
    let cond = condition_number(t);
    if !(cond <= MAX_CONDITION) {
        return Err(Error::Singular(cond));
    }
    t.clone().try_inverse().ok_or(Error::Singular(f64::INFINITY))
}

impl AffineBody {
    pub fn new(base: Body, map: Matrix) -> Result<Self> {
        if map.nrows() != base.dim() {
            return Err(Error::DimensionMismatch { expected: base.dim(), got: map.nrows() });
        }
        let inverse = checked_inverse(&map)?;
        Ok(AffineBody { base: Box::new(base), map, inverse })
    }

    pub fn base(&self) -> &Body {
        &self.base
    }

    pub fn map(&self) -> &Matrix {
        &self.map
    }

    pub fn inverse(&self) -> &Matrix {
        &self.inverse
    }

    pub fn gauge(&self, x: &Vector) -> f64 {
        self.base.gauge(&(&self.inverse * x))
    }

    pub fn support(&self, theta: &Vector) -> f64 {
        self.base.support(&(self.map.tr_mul(theta)))
    }

    pub(crate) fn chord_raw(&self, x: &Vector, d: &Vector) -> (f64, f64) {
        self.base.chord_raw(&(&self.inverse * x), &(&self.inverse * d))
    }
}
