use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::Vector;

/// Euclidean ball `{x : |x − c| ≤ r}` with `|c| < r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub(crate) radius: f64,
    pub(crate) center: Vector,
}

impl Ball {
    pub fn new(n: usize, radius: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidBody(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Ball { radius, center: Vector::zeros(n) })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn is_centered(&self) -> bool {
        self.center.iter().all(|&c| c == 0.0)
    }

    pub(crate) fn translated(&self, y: &Vector) -> Result<Self> {
        let center = &self.center + y;
        if center.norm() >= self.radius {
            return Err(Error::NotInterior(center.norm() / self.radius));
        }
        Ok(Ball { radius: self.radius, center })
    }

    /// Positive root `λ` of `|x − λc| = λr`.
    pub fn gauge(&self, x: &Vector) -> f64 {
        if self.is_centered() {
            return x.norm() / self.radius;
        }
        let xc = x.dot(&self.center);
        let a = self.radius * self.radius - self.center.norm_squared();
        let xx = x.norm_squared();
        (-xc + (xc * xc + a * xx).sqrt()) / a
    }

    pub fn support(&self, theta: &Vector) -> f64 {
        self.radius * theta.norm() + self.center.dot(theta)
    }

    pub(crate) fn chord_raw(&self, x: &Vector, d: &Vector) -> (f64, f64) {
        let y = x - &self.center;
        let dd = d.norm_squared();
        let yd = y.dot(d);
        let disc = (yd * yd - dd * (y.norm_squared() - self.radius * self.radius)).max(0.0);
        let root = disc.sqrt();
        ((-yd - root) / dd, (-yd + root) / dd)
    }
}
