//! Hit-and-run samplers for uniform and Gaussian-tilted measures on convex
//! bodies, and moment estimators for the resulting point clouds.
//!
//! Each step draws a uniform direction, intersects the line with the body and
//! samples the exact one-dimensional conditional law on that chord: uniform
//! (no tilt), truncated exponential (linear tilt only) or truncated Gaussian.

mod moments;
mod truncated;

pub use moments::{
    estimate_moments, estimate_third_moment_slice, estimate_third_moment_tensor, third_moment_strength, MomentEstimate,
    ThirdMomentSlice,
};
pub use truncated::{truncated_exponential, truncated_normal};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bodies::Body;
use crate::error::{Error, Result};
use crate::numkit::{uniform_sphere, RngStream, Vector};

const MIN_CHORD: f64 = 1e-12;

/// Burn-in and thinning for the hit-and-run chain. `None` means the
/// dimension-dependent defaults `100·n` and `n`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub burn_in: Option<usize>,
    pub thinning: Option<usize>,
}

impl SamplerConfig {
    pub fn new(burn_in: usize, thinning: usize) -> Result<Self> {
        if thinning == 0 {
            return Err(Error::invalid("thinning must be at least 1"));
        }
        Ok(SamplerConfig { burn_in: Some(burn_in), thinning: Some(thinning) })
    }

    /// Thinning `10·n`, for tests that want nearly independent draws.
    pub fn near_independent(n: usize) -> Self {
        SamplerConfig { burn_in: Some(100 * n), thinning: Some(10 * n) }
    }

    pub fn burn_in_for(&self, n: usize) -> usize {
        self.burn_in.unwrap_or(100 * n)
    }

    pub fn thinning_for(&self, n: usize) -> usize {
        self.thinning.unwrap_or(n).max(1)
    }
}

/// The density `∝ exp(θ·x − t|x|²/2)` restricted to a body.
#[derive(Debug, Clone, PartialEq)]
pub struct Tilt {
    pub t: f64,
    pub theta: Vector,
}

impl Tilt {
    pub fn none(n: usize) -> Self {
        Tilt { t: 0.0, theta: Vector::zeros(n) }
    }

    fn is_flat(&self) -> bool {
        self.t == 0.0 && self.theta.iter().all(|&v| v == 0.0)
    }
}

/// One exact hit-and-run move from `x` along a fresh uniform direction.
pub fn hit_and_run_step(body: &Body, tilt: &Tilt, x: &mut Vector, rng: &mut RngStream) {
    let n = x.len();
    loop {
        let d = uniform_sphere(n, rng);
        let (lo, hi) = body.chord_raw(x, &d);
        if !(hi - lo > MIN_CHORD) || !lo.is_finite() || !hi.is_finite() {
            continue;
        }
        // Keep strictly inside the chord so the next point stays interior.
        let pad = 1e-13 * (hi - lo);
        let (lo, hi) = (lo + pad, hi - pad);
        let s = if tilt.is_flat() {
            lo + (hi - lo) * rng.open01()
        } else {
            let slope = tilt.theta.dot(&d) - tilt.t * x.dot(&d);
            if tilt.t > 0.0 {
                let sd = 1.0 / tilt.t.sqrt();
                truncated_normal(slope / tilt.t, sd, lo, hi, rng)
            } else {
                truncated_exponential(slope, lo, hi, rng)
            }
        };
        x.axpy(s, &d, 1.0);
        return;
    }
}

/// Runs a chain from the origin and returns `count` thinned states after burn-in.
pub fn sample_chain(body: &Body, tilt: &Tilt, count: usize, cfg: &SamplerConfig, rng: &mut RngStream) -> Result<Vec<Vector>> {
    let n = body.dim();
    if tilt.theta.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: tilt.theta.len() });
    }
    if !(tilt.t >= 0.0) || !tilt.t.is_finite() || tilt.theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("tilt needs t ≥ 0 and a finite θ"));
    }
    let burn = cfg.burn_in_for(n);
    let thin = cfg.thinning_for(n);
    let mut x = Vector::zeros(n);
    for _ in 0..burn {
        hit_and_run_step(body, tilt, &mut x, rng);
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        for _ in 0..thin {
            hit_and_run_step(body, tilt, &mut x, rng);
        }
        out.push(x.clone());
    }
    Ok(out)
}

/// `count` approximately uniform points of the body.
pub fn uniform_sample(body: &Body, count: usize, cfg: &SamplerConfig, rng: &mut RngStream) -> Result<Vec<Vector>> {
    sample_chain(body, &Tilt::none(body.dim()), count, cfg, rng)
}

/// `count` points from the density `∝ exp(θ·x − t|x|²/2)` on the body.
pub fn tilted_sample(
    body: &Body,
    t: f64,
    theta: &Vector,
    count: usize,
    cfg: &SamplerConfig,
    rng: &mut RngStream,
) -> Result<Vec<Vector>> {
    sample_chain(body, &Tilt { t, theta: theta.clone() }, count, cfg, rng)
}

/// Pools `chains` independent chains run on child streams of `rng`.
pub fn tilted_sample_parallel(
    body: &Body,
    tilt: &Tilt,
    per_chain: usize,
    chains: usize,
    cfg: &SamplerConfig,
    rng: &RngStream,
) -> Result<Vec<Vector>> {
    use rayon::prelude::*;
    let parts: Result<Vec<Vec<Vector>>> = (0..chains)
        .into_par_iter()
        .map(|c| {
            let mut child = rng.spawn(c as u64);
            sample_chain(body, tilt, per_chain, cfg, &mut child)
        })
        .collect();
    Ok(parts?.into_iter().flatten().collect())
}

/// One CSV row per point, columns `x0,…,x{n−1}`.
pub fn write_points_csv<W: Write>(points: &[Vector], mut out: W) -> std::io::Result<()> {
    let n = points.first().map_or(0, |p| p.len());
    let header: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for p in points {
        let row: Vec<String> = p.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests;
