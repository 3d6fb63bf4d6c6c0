//! Isotropic position: whitening a body from its own uniform samples,
//! checking the inradius/circumradius sandwich, and closed-form isotropic
//! versions of the standard bodies.

mod cache;

pub use cache::{CachedWhitening, WhiteningCache};

use serde::{Deserialize, Serialize};

use crate::bodies::{self, Body};
use crate::error::{Error, Result};
use crate::numkit::{inverse_sqrt, sym_eig, uniform_sphere, Matrix, RngStream, SymMatrix, Vector};
use crate::sampling::{estimate_moments, tilted_sample_parallel, SamplerConfig, Tilt};

const SINGULAR_EIGENVALUE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotropizeConfig {
    /// Uniform samples drawn per whitening round.
    pub samples: usize,
    pub tol_mean: f64,
    pub tol_cov: f64,
    pub max_iters: usize,
    pub chains: usize,
    /// Unset thinning means `4·n` here, since whitening is sensitive to
    /// chain autocorrelation (the simplex especially).
    pub sampler: SamplerConfig,
    /// Random directions for the sandwich check.
    pub sandwich_dirs: usize,
}

impl Default for IsotropizeConfig {
    fn default() -> Self {
        IsotropizeConfig {
            samples: 200_000,
            tol_mean: 0.02,
            tol_cov: 0.05,
            max_iters: 5,
            chains: 16,
            sampler: SamplerConfig::default(),
            sandwich_dirs: 1000,
        }
    }
}

/// Outcome of [`isotropize`]. The isotropic body is `{map·(x − shift) : x ∈ K}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotropizationReport {
    pub map: Matrix,
    pub shift: Vector,
    pub residual_mean: f64,
    pub residual_cov: f64,
    pub samples: usize,
    pub iterations: usize,
    pub sandwich: SandwichReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub n: usize,
    /// Smallest support value over the sampled directions, lowered to the exact
    /// inradius when that is known.
    pub inner: f64,
    pub outer: f64,
    pub outer_certified: bool,
    pub inner_bound: f64,
    pub outer_bound: f64,
    pub slack: f64,
}

impl SandwichReport {
    pub fn inner_ok(&self) -> bool {
        self.inner >= self.inner_bound - self.slack
    }

    pub fn outer_ok(&self) -> bool {
        self.outer <= self.outer_bound + self.slack
    }

    pub fn passed(&self) -> bool {
        self.inner_ok() && self.outer_ok()
    }
}

/// Mean norm and `‖Â − Id‖_op` of a point cloud.
pub fn isotropy_residuals(points: &[Vector]) -> Result<(f64, f64)> {
    let m = estimate_moments(points)?;
    let n = m.mean.len();
    let dev = sym_eig(&(&m.covariance - &SymMatrix::identity(n)))?;
    let op = dev.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    Ok((m.mean.norm(), op))
}

fn apply_map(body: &Body, map: &Matrix, shift: &Vector) -> Result<Body> {
    body.translate(&-shift)?.linear_image(map)
}

/// Repeatedly estimates the barycenter `â` and covariance `Â` of the current
/// body and applies `x ↦ Â^{−1/2}(x − â)` until both residuals are within
/// tolerance.
pub fn isotropize(body: &Body, cfg: &IsotropizeConfig, rng: &RngStream) -> Result<(Body, IsotropizationReport)> {
    let n = body.dim();
    if cfg.samples < 2 || cfg.chains == 0 {
        return Err(Error::invalid("isotropize needs at least two samples and one chain"));
    }
    let per_chain = cfg.samples.div_ceil(cfg.chains);
    let sampler = SamplerConfig { thinning: Some(cfg.sampler.thinning.unwrap_or(4 * n)), ..cfg.sampler };
    let mut map = Matrix::identity(n, n);
    let mut shift = Vector::zeros(n);
    let mut current = body.clone();
    for round in 0..=cfg.max_iters {
        let stream = rng.spawn(round as u64);
        let pts = tilted_sample_parallel(&current, &Tilt::none(n), per_chain, cfg.chains, &sampler, &stream)?;
        let m = estimate_moments(&pts)?;
        let spectrum = sym_eig(&m.covariance)?;
        if spectrum.min() < SINGULAR_EIGENVALUE {
            return Err(Error::Singular(spectrum.max() / spectrum.min().max(f64::MIN_POSITIVE)));
        }
        let op = spectrum.values.iter().fold(0.0f64, |acc, v| acc.max((v - 1.0).abs()));
        let mean_norm = m.mean.norm();
        if mean_norm <= cfg.tol_mean && op <= cfg.tol_cov {
            let sandwich = verify_sandwich(&current, cfg.sandwich_dirs, cfg.tol_cov, &rng.spawn(u64::MAX))?;
            let report = IsotropizationReport {
                map,
                shift,
                residual_mean: mean_norm,
                residual_cov: op,
                samples: pts.len(),
                iterations: round,
                sandwich,
            };
            return Ok((current, report));
        }
        if round == cfg.max_iters {
            break;
        }
        // y ↦ W(y − â) composed with y = T(x − s) gives WT(x − s − T⁻¹â).
        let w = inverse_sqrt(&m.covariance)?.into_matrix();
        let back = map.clone().lu().solve(&m.mean).ok_or(Error::Singular(f64::INFINITY))?;
        shift += back;
        map = w * map;
        current = apply_map(body, &map, &shift)?;
    }
    Err(Error::NoConvergence { what: "isotropic whitening".into(), iterations: cfg.max_iters })
}

/// Checks `√((n+2)/n)·Bⁿ ⊆ K ⊆ √(n(n+2))·Bⁿ` for a body in isotropic
/// position, with slack `2·tol·√n`.
pub fn verify_sandwich(body: &Body, dirs: usize, tol: f64, rng: &RngStream) -> Result<SandwichReport> {
    let n = body.dim();
    let nf = n as f64;
    let mut rng = rng.clone();
    let mut inner = (0..dirs).map(|_| body.support(&uniform_sphere(n, &mut rng))).fold(f64::INFINITY, f64::min);
    let exact = body.inradius();
    if exact.certified {
        inner = inner.min(exact.value);
    }
    let outer = body.radius();
    if !inner.is_finite() || !outer.value.is_finite() {
        return Err(Error::NonFinite("sandwich radii"));
    }
    Ok(SandwichReport {
        n,
        inner,
        outer: outer.value,
        outer_certified: outer.certified,
        inner_bound: ((nf + 2.0) / nf).sqrt(),
        outer_bound: (nf * (nf + 2.0)).sqrt(),
        slack: 2.0 * tol * nf.sqrt(),
    })
}

/// Scale taking the named standard body to isotropic position.
pub fn isotropic_scale(name: &str, n: usize) -> Result<f64> {
    let nf = n as f64;
    Ok(match name {
        // Coordinates uniform on [−1, 1] have variance 1/3.
        "cube" => 3f64.sqrt(),
        // E x₁² = 1/(n+2) on the unit ball.
        "ball" => (nf + 2.0).sqrt(),
        // E x₁² = 2/((n+1)(n+2)) on the unit ℓ¹ ball.
        "crosspoly" | "cross-polytope" | "cross_polytope" | "cross" => ((nf + 1.0) * (nf + 2.0) / 2.0).sqrt(),
        // Unit-circumradius regular simplex: covariance Id/(n(n+2)).
        "simplex" => (nf * (nf + 2.0)).sqrt(),
        other => return Err(Error::invalid(format!("unknown body name '{other}'"))),
    })
}

/// The named standard body scaled to isotropic position.
pub fn named_isotropic(name: &str, n: usize) -> Result<Body> {
    let s = isotropic_scale(name, n)?;
    bodies::named(name, n)?.scale(s)
}
