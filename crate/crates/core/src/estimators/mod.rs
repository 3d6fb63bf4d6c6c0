//! Monte Carlo estimators for gauge means, mean widths, Kahane ratios,
//! operator norms between gauges, and rotation-containment distances.

mod containment;
mod operators;
mod records;

pub use containment::{
    containment_lambda, containment_lambda_facets, dbm_upper, dpc_upper, partial_containment_lambda,
    DistanceCertificate, DistanceKind, PartialContainment,
};
pub use operators::{chevet_estimate, mean_singular_factor, operator_gauge_norm, ChevetReport, OperatorNorm, SingularFactor};
pub use records::EstimateRecord;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::Body;
use crate::error::{Error, Result};
use crate::numkit::stats::{batch_means_se, mean, std_error};
use crate::numkit::{gaussian_vector, uniform_sphere, RngStream, Vector};
use crate::sampling::{tilted_sample_parallel, SamplerConfig, Tilt};

/// Number of independent streams a Monte Carlo mean is split across.
const CHUNKS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarEstimate {
    pub value: f64,
    pub se: f64,
    pub samples: usize,
    pub method: String,
}

impl ScalarEstimate {
    fn from_values(values: &[f64], method: &str) -> Self {
        ScalarEstimate { value: mean(values), se: std_error(values), samples: values.len(), method: method.into() }
    }

    fn from_chain(values: &[f64], method: &str) -> Self {
        ScalarEstimate { value: mean(values), se: batch_means_se(values), samples: values.len(), method: method.into() }
    }

    /// `|self − other| ≤ k·√(se₁² + se₂²)`.
    pub fn agrees_with(&self, other: &ScalarEstimate, k: f64) -> bool {
        (self.value - other.value).abs() <= k * self.se.hypot(other.se)
    }
}

/// Surrogates for the universal constants and dimension-dependent
/// quantities that the inequalities leave unspecified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub kappa: f64,
    /// Multiplier `C` in upper bounds.
    pub upper: f64,
    /// Multiplier `c` in lower bounds.
    pub lower: f64,
}

impl Default for TheoryConstants {
    fn default() -> Self {
        TheoryConstants { kappa: 2.0, upper: 10.0, lower: 0.1 }
    }
}

impl TheoryConstants {
    /// `ψ̂_n = √log(n+1)`, floored at 1.
    pub fn psi(&self, n: usize) -> f64 {
        ((n as f64 + 1.0).ln().sqrt()).max(1.0)
    }

    /// `Q̂_n = ψ̂_n·√log(n+1)`.
    pub fn q(&self, n: usize) -> f64 {
        (self.psi(n) * (n as f64 + 1.0).ln().sqrt()).max(1.0)
    }

    /// `P̂_n = κ̂·√log(n+1)`.
    pub fn p(&self, n: usize) -> f64 {
        (self.kappa * (n as f64 + 1.0).ln().sqrt()).max(1.0)
    }
}

/// Mean of `f` over `count` draws split across independent child streams.
pub fn mc_values(count: usize, rng: &RngStream, f: impl Fn(&mut RngStream) -> f64 + Sync) -> Vec<f64> {
    let per = count.div_ceil(CHUNKS);
    (0..CHUNKS)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut r = rng.spawn(c as u64);
            let take = per.min(count.saturating_sub(c * per));
            (0..take).map(|_| f(&mut r)).collect::<Vec<_>>()
        })
        .collect()
}

fn check_count(count: usize) -> Result<()> {
    if count < 2 {
        return Err(Error::invalid("Monte Carlo estimates need at least two samples"));
    }
    Ok(())
}

/// `M(K)`: average of the gauge over the unit sphere.
pub fn m_of(body: &Body, count: usize, rng: &RngStream) -> Result<ScalarEstimate> {
    check_count(count)?;
    let n = body.dim();
    let v = mc_values(count, rng, |r| body.gauge(&uniform_sphere(n, r)));
    Ok(ScalarEstimate::from_values(&v, "sphere"))
}

/// `M*(K)`: average of the support function over the unit sphere.
pub fn mstar_of(body: &Body, count: usize, rng: &RngStream) -> Result<ScalarEstimate> {
    check_count(count)?;
    let n = body.dim();
    let v = mc_values(count, rng, |r| body.support(&uniform_sphere(n, r)));
    Ok(ScalarEstimate::from_values(&v, "sphere"))
}

/// `E‖G‖_K` for a standard Gaussian vector `G`.
pub fn mean_gauge_gaussian(body: &Body, count: usize, rng: &RngStream) -> Result<ScalarEstimate> {
    check_count(count)?;
    let n = body.dim();
    let v = mc_values(count, rng, |r| body.gauge(&gaussian_vector(n, r)));
    Ok(ScalarEstimate::from_values(&v, "gaussian"))
}

/// `E‖X‖_K` for `X` uniform in `body_x`, from hit-and-run chains.
pub fn mean_gauge_uniform(
    body_k: &Body,
    body_x: &Body,
    count: usize,
    sampler: &SamplerConfig,
    rng: &RngStream,
) -> Result<ScalarEstimate> {
    check_count(count)?;
    if body_k.dim() != body_x.dim() {
        return Err(Error::DimensionMismatch { expected: body_k.dim(), got: body_x.dim() });
    }
    let pts = tilted_sample_parallel(body_x, &Tilt::none(body_x.dim()), count.div_ceil(CHUNKS), CHUNKS, sampler, rng)?;
    let v: Vec<f64> = pts.iter().map(|x| body_k.gauge(x)).collect();
    Ok(ScalarEstimate::from_chain(&v, "uniform"))
}

/// `(E‖G‖^p)^{1/p} / E‖G‖` with a delta-method standard error.
pub fn kahane_ratio(body: &Body, p: f64, count: usize, rng: &RngStream) -> Result<ScalarEstimate> {
    check_count(count)?;
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::invalid("Kahane exponent must be at least 1"));
    }
    let n = body.dim();
    let g = mc_values(count, rng, |r| body.gauge(&gaussian_vector(n, r)));
    kahane_from_values(&g, p)
}

pub(crate) fn kahane_from_values(g: &[f64], p: f64) -> Result<ScalarEstimate> {
    let nf = g.len() as f64;
    let gp: Vec<f64> = g.iter().map(|v| v.powf(p)).collect();
    let (m1, mp) = (mean(g), mean(&gp));
    if !(m1 > 0.0) {
        return Err(Error::invalid("gauge mean must be positive"));
    }
    let ratio = mp.powf(1.0 / p) / m1;
    let d_mp = mp.powf(1.0 / p - 1.0) / (p * m1);
    let d_m1 = -ratio / m1;
    let var1 = g.iter().map(|v| (v - m1).powi(2)).sum::<f64>() / (nf - 1.0);
    let varp = gp.iter().map(|v| (v - mp).powi(2)).sum::<f64>() / (nf - 1.0);
    let cov = g.iter().zip(&gp).map(|(a, b)| (a - m1) * (b - mp)).sum::<f64>() / (nf - 1.0);
    let var = (d_mp * d_mp * varp + d_m1 * d_m1 * var1 + 2.0 * d_mp * d_m1 * cov) / nf;
    Ok(ScalarEstimate { value: ratio, se: var.max(0.0).sqrt(), samples: g.len(), method: format!("kahane p={p}") })
}

/// Vector with iid coordinates of density `2^{−1/2} exp(−√2|x|)` (unit variance).
pub fn laplace_vector(n: usize, rng: &mut RngStream) -> Vector {
    Vector::from_fn(n, |_, _| {
        let e = -rng.open01().ln() / std::f64::consts::SQRT_2;
        if rng.open01() < 0.5 {
            e
        } else {
            -e
        }
    })
}

/// `E max|Yᵢ|` for the unit-variance Laplace vector.
pub fn mean_sup_laplace(n: usize, count: usize, rng: &RngStream) -> Result<ScalarEstimate> {
    check_count(count)?;
    let v = mc_values(count, rng, |r| laplace_vector(n, r).amax());
    Ok(ScalarEstimate::from_values(&v, "laplace"))
}

/// `E‖X‖_∞` for `X` uniform in the isotropic cube `[−√3, √3]ⁿ`, drawn
/// coordinatewise.
pub fn mean_sup_isotropic_cube(n: usize, count: usize, rng: &RngStream) -> Result<ScalarEstimate> {
    check_count(count)?;
    let h = 3f64.sqrt();
    let v = mc_values(count, rng, |r| (0..n).map(|_| (h * (2.0 * r.open01() - 1.0)).abs()).fold(0.0, f64::max));
    Ok(ScalarEstimate::from_values(&v, "uniform"))
}

#[cfg(test)]
mod tests;
