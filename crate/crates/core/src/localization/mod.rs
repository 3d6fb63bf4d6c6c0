//! Stochastic localization of the uniform measure on a convex body.
//!
//! The tilted measure `μ_{t,θ}` has density proportional to
//! `exp(θ·x − t|x|²/2)` on the body. Along a localization path `θ_t` the
//! barycenter `a_t` and covariance `A_t` of `μ_{t,θ_t}` are estimated by
//! Monte Carlo; the path itself is generated either exactly (`θ_t = tX + B_t`
//! with `X` uniform on the body) or by Euler–Maruyama on
//! `dθ_t = dB_t + a_t(θ_t) dt`.

mod martingale;
mod trace;

pub use martingale::{
    barycenter_pairs, barycenter_slope, clipped_martingale, convex_order_check, endpoint_barycenters, endpoint_law_check,
    freedman_check, gaussian_battery, maurey_decompose, martingale_check, window_clip, ClippedPath,
    ConvexOrderReport, EndpointReport, FreedmanReport, FreedmanRow, GaussianBattery, MartingaleDeviation,
    MaureyPair, PairedComparison, TestFunction, Volatility, uniform_reference,
};
pub use trace::{CovarianceTrace, TraceRow, WINDOW};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::Body;
use crate::error::{Error, Result};
use crate::numkit::{brownian_increment, sym_eig, RngStream, SymMatrix, Vector};
use crate::sampling::{
    estimate_moments, estimate_third_moment_tensor, sample_chain, third_moment_strength, tilted_sample_parallel,
    SamplerConfig, Tilt,
};

/// A point `(t, θ)` of the tilt family, with the log-partition
/// `Λ_t(θ) = log ∫ exp(θ·x − t|x|²/2) dμ(x)` when it has been estimated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltState {
    pub t: f64,
    pub theta: Vector,
    pub log_partition: Option<f64>,
}

impl TiltState {
    pub fn new(t: f64, theta: Vector) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid("tilt time must be finite and non-negative"));
        }
        Ok(TiltState { t, theta, log_partition: None })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Driver {
    Exact,
    Sde,
}

/// Uniform time grid `t_k = k·T/K`, `k = 0..=K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub horizon: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() || steps == 0 {
            return Err(Error::invalid("time grid needs a positive horizon and at least one step"));
        }
        Ok(TimeGrid { horizon, steps })
    }

    /// Grid with step at most `dt`.
    pub fn with_max_step(horizon: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::invalid("time step must be positive"));
        }
        TimeGrid::new(horizon, (horizon / dt).ceil().max(1.0) as usize)
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| k as f64 * self.dt()).collect()
    }
}

/// A discretized tilt path together with the Brownian increments that drove
/// it, so that processes built on the same noise stay coupled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationPath {
    pub driver: Driver,
    pub times: Vec<f64>,
    pub thetas: Vec<Vector>,
    pub increments: Vec<Vector>,
    /// The uniform point `X` of the exact driver.
    pub endpoint: Option<Vector>,
}

impl LocalizationPath {
    pub fn steps(&self) -> usize {
        self.increments.len()
    }

    pub fn dim(&self) -> usize {
        self.thetas[0].len()
    }

    /// `B_{t_k}` as the running sum of the increments.
    pub fn brownian(&self) -> Vec<Vector> {
        let mut b = Vector::zeros(self.dim());
        let mut out = vec![b.clone()];
        for inc in &self.increments {
            b += inc;
            out.push(b.clone());
        }
        out
    }
}

/// Monte Carlo settings for the tilted measures along a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerConfig {
    pub samples: usize,
    pub chains: usize,
    pub sampler: SamplerConfig,
    /// Also estimate `‖Σᵢ Hᵢ²‖_op` from the third-moment tensor.
    pub third_moments: bool,
}

impl InnerConfig {
    pub fn new(samples: usize) -> Self {
        InnerConfig { samples, chains: 1, sampler: SamplerConfig::default(), third_moments: false }
    }
}

/// Estimated barycenter `â_t(θ)` and covariance `Â_t(θ)` of `μ_{t,θ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureState {
    pub t: f64,
    pub theta: Vector,
    pub mean: Vector,
    pub covariance: SymMatrix,
    pub mean_se: Vector,
    pub covariance_se: crate::numkit::Matrix,
    pub samples: usize,
    pub third_moment_strength: Option<f64>,
}

impl MeasureState {
    /// Frobenius norm of the entrywise covariance standard errors.
    pub fn se_scale(&self) -> f64 {
        self.covariance_se.norm()
    }
}

fn check_tilt(body: &Body, t: f64, theta: &Vector) -> Result<()> {
    if theta.len() != body.dim() {
        return Err(Error::DimensionMismatch { expected: body.dim(), got: theta.len() });
    }
    TiltState::new(t, theta.clone()).map(|_| ())
}

/// Moments of `μ_{t,θ}` from `cfg.samples` hit-and-run draws. Sampling noise
/// that pushes an eigenvalue of `Â` below zero is clipped.
pub fn measure_state(body: &Body, t: f64, theta: &Vector, cfg: &InnerConfig, rng: &RngStream) -> Result<MeasureState> {
    check_tilt(body, t, theta)?;
    let chains = cfg.chains.max(1);
    let per_chain = cfg.samples.div_ceil(chains).max(2);
    let tilt = Tilt { t, theta: theta.clone() };
    let pts = if chains == 1 {
        sample_chain(body, &tilt, per_chain, &cfg.sampler, &mut rng.spawn(0))?
    } else {
        tilted_sample_parallel(body, &tilt, per_chain, chains, &cfg.sampler, rng)?
    };
    let m = estimate_moments(&pts)?;
    let covariance = clip_psd(&m.covariance)?;
    let third_moment_strength = if cfg.third_moments {
        Some(third_moment_strength(&estimate_third_moment_tensor(&pts)?)?)
    } else {
        None
    };
    Ok(MeasureState {
        t,
        theta: theta.clone(),
        mean: m.mean,
        covariance,
        mean_se: m.mean_se,
        covariance_se: m.covariance_se,
        samples: pts.len(),
        third_moment_strength,
    })
}

fn clip_psd(a: &SymMatrix) -> Result<SymMatrix> {
    let dec = sym_eig(a)?;
    if dec.min() >= 0.0 {
        return Ok(a.clone());
    }
    Ok(dec.apply(|x| x.max(0.0)))
}

/// `Λ̂_t(θ)` by reweighting uniform samples of the body:
/// `log mean exp(θ·x − t|x|²/2)`.
pub fn log_partition(uniform_points: &[Vector], t: f64, theta: &Vector) -> Result<f64> {
    if uniform_points.is_empty() {
        return Err(Error::invalid("log-partition needs uniform samples"));
    }
    let w: Vec<f64> = uniform_points.iter().map(|x| theta.dot(x) - 0.5 * t * x.norm_squared()).collect();
    let top = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = w.iter().map(|v| (v - top).exp()).sum();
    Ok(top + (s / w.len() as f64).ln())
}

/// One approximately uniform point of the body from a fresh chain.
pub fn draw_uniform_point(body: &Body, sampler: &SamplerConfig, rng: &mut RngStream) -> Result<Vector> {
    let mut pts = sample_chain(body, &Tilt::none(body.dim()), 1, sampler, rng)?;
    Ok(pts.pop().expect("one sample requested"))
}

/// `θ_{t_k} = t_k X + B_{t_k}` for a given point `X`.
pub fn tilt_path_exact_from(x: &Vector, grid: &TimeGrid, rng: &mut RngStream) -> LocalizationPath {
    let n = x.len();
    let dt = grid.dt();
    let times = grid.times();
    let mut b = Vector::zeros(n);
    let mut thetas = vec![Vector::zeros(n)];
    let mut increments = Vec::with_capacity(grid.steps);
    for &t in &times[1..] {
        let inc = brownian_increment(n, dt, rng);
        b += &inc;
        increments.push(inc);
        thetas.push(x * t + &b);
    }
    LocalizationPath { driver: Driver::Exact, times, thetas, increments, endpoint: Some(x.clone()) }
}

/// Exact driver: draws `X` uniform on the body, then `θ_t = tX + B_t`.
pub fn tilt_path_exact(body: &Body, grid: &TimeGrid, sampler: &SamplerConfig, rng: &mut RngStream) -> Result<LocalizationPath> {
    let x = draw_uniform_point(body, sampler, rng)?;
    Ok(tilt_path_exact_from(&x, grid, rng))
}

/// Euler–Maruyama driver `θ_{k+1} = θ_k + â_{t_k}(θ_k)Δt + ΔB_k`. Returns the
/// path and the measure states used for the drift.
pub fn tilt_path_sde(
    body: &Body,
    grid: &TimeGrid,
    inner: &InnerConfig,
    rng: &mut RngStream,
) -> Result<(LocalizationPath, Vec<MeasureState>)> {
    let n = body.dim();
    let dt = grid.dt();
    let times = grid.times();
    let mut theta = Vector::zeros(n);
    let mut thetas = vec![theta.clone()];
    let mut increments = Vec::with_capacity(grid.steps);
    let mut states = Vec::with_capacity(grid.steps);
    for (k, &t) in times[..grid.steps].iter().enumerate() {
        let state = measure_state(body, t, &theta, inner, &rng.spawn(k as u64))?;
        let inc = brownian_increment(n, dt, rng);
        theta += &state.mean * dt + &inc;
        increments.push(inc);
        thetas.push(theta.clone());
        states.push(state);
    }
    Ok((LocalizationPath { driver: Driver::Sde, times, thetas, increments, endpoint: None }, states))
}

/// Measure states at every grid point of a path, `k = 0..=K`.
pub fn path_states(body: &Body, path: &LocalizationPath, inner: &InnerConfig, rng: &RngStream) -> Result<Vec<MeasureState>> {
    path.times
        .iter()
        .zip(&path.thetas)
        .enumerate()
        .map(|(k, (&t, theta))| measure_state(body, t, theta, inner, &rng.spawn(k as u64)))
        .collect()
}

/// Covariance trace of a path: measure states at every grid point, reduced
/// to eigenvalue extremes and proxies at each `β`.
pub fn covariance_trace(
    body: &Body,
    path: &LocalizationPath,
    betas: &[f64],
    inner: &InnerConfig,
    rng: &RngStream,
) -> Result<CovarianceTrace> {
    CovarianceTrace::from_states(&path_states(body, path, inner, rng)?, betas)
}

/// Runs `f` on `n_paths` child streams of `rng` in parallel, in path order.
pub fn ensemble<T: Send>(n_paths: usize, rng: &RngStream, f: impl Fn(usize, &mut RngStream) -> Result<T> + Sync) -> Result<Vec<T>> {
    (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut child = rng.spawn(i as u64);
            f(i, &mut child)
        })
        .collect()
}
