use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::stats::batch_means_se;
use crate::numkit::{Matrix, SymMatrix, Vector};

/// Sample barycenter and covariance of a point cloud, with batch-means
/// standard errors for every entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub count: usize,
    pub mean: Vector,
    pub covariance: SymMatrix,
    pub mean_se: Vector,
    pub covariance_se: Matrix,
}

impl MomentEstimate {
    /// Frobenius norm of the covariance standard errors: a scale for the
    /// Monte Carlo error in any eigenvalue of the covariance.
    pub fn covariance_se_scale(&self) -> f64 {
        self.covariance_se.norm()
    }
}

pub fn estimate_moments(points: &[Vector]) -> Result<MomentEstimate> {
    let count = points.len();
    if count < 2 {
        return Err(Error::invalid("need at least two points for moments"));
    }
    let n = points[0].len();
    let mut mean = Vector::zeros(n);
    for p in points {
        mean += p;
    }
    mean /= count as f64;

    let mut cov = Matrix::zeros(n, n);
    for p in points {
        let c = p - &mean;
        cov.ger(1.0, &c, &c, 1.0);
    }
    cov /= (count - 1) as f64;
    let covariance = SymMatrix::from_matrix(&cov)?;

    let mut mean_se = Vector::zeros(n);
    let mut series = vec![0.0; count];
    for i in 0..n {
        for (k, p) in points.iter().enumerate() {
            series[k] = p[i];
        }
        mean_se[i] = batch_means_se(&series);
    }
    let mut covariance_se = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            for (k, p) in points.iter().enumerate() {
                series[k] = (p[i] - mean[i]) * (p[j] - mean[j]);
            }
            let se = batch_means_se(&series);
            covariance_se[(i, j)] = se;
            covariance_se[(j, i)] = se;
        }
    }
    Ok(MomentEstimate { count, mean, covariance, mean_se, covariance_se })
}

/// Centered third-moment slice `H_θ = E[⟨X − a, θ⟩ (X − a)(X − a)ᵀ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThirdMomentSlice {
    pub direction: Vector,
    pub matrix: SymMatrix,
    pub se: Matrix,
}

impl ThirdMomentSlice {
    pub fn se_scale(&self) -> f64 {
        self.se.norm()
    }
}

pub fn estimate_third_moment_slice(points: &[Vector], theta: &Vector) -> Result<ThirdMomentSlice> {
    let count = points.len();
    if count < 2 {
        return Err(Error::invalid("need at least two points for a third-moment slice"));
    }
    if (theta.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("third-moment direction must be a unit vector"));
    }
    let n = points[0].len();
    let mut mean = Vector::zeros(n);
    for p in points {
        mean += p;
    }
    mean /= count as f64;
    let centered: Vec<Vector> = points.iter().map(|p| p - &mean).collect();
    let proj: Vec<f64> = centered.iter().map(|c| c.dot(theta)).collect();

    let mut h = Matrix::zeros(n, n);
    let mut se = Matrix::zeros(n, n);
    let mut series = vec![0.0; count];
    for i in 0..n {
        for j in i..n {
            for k in 0..count {
                series[k] = proj[k] * centered[k][i] * centered[k][j];
            }
            let m = series.iter().sum::<f64>() / count as f64;
            let s = batch_means_se(&series);
            h[(i, j)] = m;
            h[(j, i)] = m;
            se[(i, j)] = s;
            se[(j, i)] = s;
        }
    }
    Ok(ThirdMomentSlice { direction: theta.clone(), matrix: SymMatrix::from_matrix(&h)?, se })
}

/// The centered third-moment tensor as its slices
/// `Hᵢ = E[(X − a)ᵢ (X − a)(X − a)ᵀ]`, `i = 0..n`.
pub fn estimate_third_moment_tensor(points: &[Vector]) -> Result<Vec<SymMatrix>> {
    let count = points.len();
    if count < 2 {
        return Err(Error::invalid("need at least two points for third moments"));
    }
    let n = points[0].len();
    let mut mean = Vector::zeros(n);
    for p in points {
        mean += p;
    }
    mean /= count as f64;
    let mut h = vec![Matrix::zeros(n, n); n];
    for p in points {
        let c = p - &mean;
        for (i, hi) in h.iter_mut().enumerate() {
            hi.ger(c[i] / count as f64, &c, &c, 1.0);
        }
    }
    h.iter().map(SymMatrix::from_matrix).collect()
}

/// `‖Σᵢ Hᵢ²‖_op = sup_θ ‖H_θ‖²_HS`.
pub fn third_moment_strength(slices: &[SymMatrix]) -> Result<f64> {
    let n = slices.first().map_or(0, SymMatrix::dim);
    let mut sum = Matrix::zeros(n, n);
    for h in slices {
        sum += h.as_matrix() * h.as_matrix();
    }
    let dec = crate::numkit::sym_eig(&SymMatrix::from_matrix(&sum)?)?;
    Ok(dec.max().max(0.0))
}
