use serde::{Deserialize, Serialize};

use super::{draw_uniform_point, ensemble, measure_state, InnerConfig, LocalizationPath, MeasureState};
use crate::bodies::Body;
use crate::error::{Error, Result};
use crate::numkit::stats::{batch_means_se, binomial_se, kurtosis_with_se, ks_two_sample, mean, std_error, KsResult};
use crate::numkit::{gaussian_vector, matrix_function, normal_sf, psd_sqrt, sym_eig, RngStream, SymMatrix, Vector};
use crate::sampling::{sample_chain, tilted_sample_parallel, SamplerConfig, Tilt};

/// Bounded test functions for the martingale identity `μ = E μ_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestFunction {
    Coordinate(usize),
    Square(usize),
    Gauge,
}

impl TestFunction {
    pub fn name(&self) -> String {
        match self {
            TestFunction::Coordinate(i) => format!("x{i}"),
            TestFunction::Square(i) => format!("x{i}^2"),
            TestFunction::Gauge => "gauge".into(),
        }
    }

    pub fn eval(&self, body: &Body, x: &Vector) -> f64 {
        match *self {
            TestFunction::Coordinate(i) => x[i],
            TestFunction::Square(i) => x[i] * x[i],
            TestFunction::Gauge => body.gauge(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleDeviation {
    pub function: String,
    /// Mean over paths of `∫f dμ̂_t`.
    pub path_mean: f64,
    pub path_se: f64,
    /// `∫f dμ`, exact or estimated.
    pub reference: f64,
    pub reference_se: f64,
}

impl MartingaleDeviation {
    pub fn deviation(&self) -> f64 {
        self.path_mean - self.reference
    }

    pub fn combined_se(&self) -> f64 {
        self.path_se.hypot(self.reference_se)
    }

    pub fn passed(&self, k: f64) -> bool {
        self.deviation().abs() <= k * self.combined_se()
    }
}

/// Compares `E ∫f dμ_t` over `n_paths` exact-driver paths at time `t` with
/// `∫f dμ`. Without `reference` values the right side is estimated from
/// uniform samples of the body.
pub fn martingale_check(
    body: &Body,
    t: f64,
    functions: &[TestFunction],
    n_paths: usize,
    inner: &InnerConfig,
    reference: Option<&[f64]>,
    rng: &RngStream,
) -> Result<Vec<MartingaleDeviation>> {
    let n = body.dim();
    if n_paths < 2 {
        return Err(Error::invalid("martingale check needs at least two paths"));
    }
    if let Some(r) = reference {
        if r.len() != functions.len() {
            return Err(Error::DimensionMismatch { expected: functions.len(), got: r.len() });
        }
    }
    let per_path: Vec<Vec<f64>> = ensemble(n_paths, &rng.spawn(0), |_, r| {
        let x = draw_uniform_point(body, &inner.sampler, r)?;
        let theta = &x * t + gaussian_vector(n, r) * t.sqrt();
        let pts = sample_chain(body, &Tilt { t, theta }, inner.samples, &inner.sampler, r)?;
        Ok(functions.iter().map(|f| pts.iter().map(|p| f.eval(body, p)).sum::<f64>() / pts.len() as f64).collect())
    })?;
    let (refs, ref_ses) = match reference {
        Some(r) => (r.to_vec(), vec![0.0; r.len()]),
        None => {
            let chains = 16;
            let per_chain = (n_paths * inner.samples / chains).max(2);
            let pts = tilted_sample_parallel(body, &Tilt::none(n), per_chain, chains, &inner.sampler, &rng.spawn(1))?;
            functions
                .iter()
                .map(|f| {
                    let vals: Vec<f64> = pts.iter().map(|p| f.eval(body, p)).collect();
                    (mean(&vals), batch_means_se(&vals))
                })
                .unzip()
        }
    };
    Ok(functions
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let vals: Vec<f64> = per_path.iter().map(|v| v[j]).collect();
            MartingaleDeviation {
                function: f.name(),
                path_mean: mean(&vals),
                path_se: std_error(&vals),
                reference: refs[j],
                reference_se: ref_ses[j],
            }
        })
        .collect())
}

/// The clip `u ↦ min{max{u, ½}, 2}` applied to a symmetric matrix.
pub fn window_clip(a: &SymMatrix) -> Result<SymMatrix> {
    matrix_function(a, |u| u.clamp(0.5, 2.0))
}

/// `v_k = Σ_{j<k} Σ_j ΔB_j` with `Σ_j = clip(Â_{t_j})`, and its quadratic
/// variation `Σ_{j<k} Σ_j² Δt_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClippedPath {
    pub times: Vec<f64>,
    pub v: Vec<Vector>,
    pub qv: Vec<SymMatrix>,
}

impl ClippedPath {
    pub fn endpoint(&self) -> &Vector {
        self.v.last().expect("non-empty path")
    }

    pub fn endpoint_qv(&self) -> &SymMatrix {
        self.qv.last().expect("non-empty path")
    }
}

/// Left-point Itô sum of the clipped covariance against the path's stored
/// increments. `states[k]` must be the measure state at `t_k`.
pub fn clipped_martingale(path: &LocalizationPath, states: &[MeasureState]) -> Result<ClippedPath> {
    let n = path.dim();
    if states.len() < path.steps() {
        return Err(Error::DimensionMismatch { expected: path.steps(), got: states.len() });
    }
    let mut v = Vector::zeros(n);
    let mut qv = SymMatrix::zeros(n);
    let mut vs = vec![v.clone()];
    let mut qvs = vec![qv.clone()];
    for (k, inc) in path.increments.iter().enumerate() {
        let sigma = window_clip(&states[k].covariance)?;
        let dt = path.times[k + 1] - path.times[k];
        v += sigma.as_matrix() * inc;
        let sq = SymMatrix::from_matrix(&(sigma.as_matrix() * sigma.as_matrix()))?;
        qv = &qv + &sq.scale(dt);
        vs.push(v.clone());
        qvs.push(qv.clone());
    }
    Ok(ClippedPath { times: path.times.clone(), v: vs, qv: qvs })
}

/// `(Δa_k, Â_k ΔB_k)` pairs along a path whose increments drive the tilt
/// (the SDE driver). `states` must cover `t_0..=t_K`.
pub fn barycenter_pairs(path: &LocalizationPath, states: &[MeasureState]) -> Result<Vec<(Vector, Vector)>> {
    if states.len() != path.steps() + 1 {
        return Err(Error::DimensionMismatch { expected: path.steps() + 1, got: states.len() });
    }
    Ok(path
        .increments
        .iter()
        .enumerate()
        .map(|(k, inc)| (&states[k + 1].mean - &states[k].mean, states[k].covariance.as_matrix() * inc))
        .collect())
}

/// Least-squares slope through the origin of `Δa` against `ÂΔB`.
pub fn barycenter_slope(pairs: &[(Vector, Vector)]) -> f64 {
    let num: f64 = pairs.iter().map(|(y, x)| y.dot(x)).sum();
    let den: f64 = pairs.iter().map(|(_, x)| x.norm_squared()).sum();
    num / den
}

/// `M_T = √r·(Z₁ + Z₂)/2` with `Z₁, Z₂` standard Gaussian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaureyPair {
    pub z1: Vector,
    pub z2: Vector,
    pub r: f64,
}

impl MaureyPair {
    pub fn reconstruct(&self) -> Vector {
        (&self.z1 + &self.z2) * (0.5 * self.r.sqrt())
    }
}

const MAUREY_TOL: f64 = 1e-10;

/// `Y± = M_T ± (r·Id − [M]_T)^{1/2} G` and `Zᵢ = Y±/√r`, with `G` a fresh
/// standard Gaussian.
pub fn maurey_decompose(m: &Vector, qv: &SymMatrix, r: f64, rng: &mut RngStream) -> Result<MaureyPair> {
    let n = m.len();
    if qv.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: qv.dim() });
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid("Maurey scale r must be positive"));
    }
    let residual = &SymMatrix::identity(n).scale(r) - qv;
    let low = sym_eig(&residual)?.min();
    if low < -MAUREY_TOL {
        return Err(Error::invalid(format!("quadratic variation exceeds r·Id by {:.3e}", -low)));
    }
    let root = psd_sqrt(&residual, MAUREY_TOL)?;
    let shift = root.as_matrix() * gaussian_vector(n, rng);
    let s = r.sqrt();
    Ok(MaureyPair { z1: (m + &shift) / s, z2: (m - &shift) / s, r })
}

/// Mean, variance and kurtosis of a sample against the standard Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBattery {
    pub mean: f64,
    pub mean_se: f64,
    pub var: f64,
    pub var_se: f64,
    pub kurtosis: f64,
    pub kurtosis_se: f64,
}

impl GaussianBattery {
    /// `|mean| ≤ 3se`, `|var − 1| ≤ 3se`, `|kurt − 3| ≤ 5se`.
    pub fn passed(&self) -> bool {
        self.mean.abs() <= 3.0 * self.mean_se
            && (self.var - 1.0).abs() <= 3.0 * self.var_se
            && (self.kurtosis - 3.0).abs() <= 5.0 * self.kurtosis_se
    }
}

pub fn gaussian_battery(xs: &[f64]) -> GaussianBattery {
    let n = xs.len() as f64;
    let m = mean(xs);
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    let (kurtosis, kurtosis_se) = kurtosis_with_se(xs);
    GaussianBattery {
        mean: m,
        mean_se: std_error(xs),
        var: m2,
        var_se: ((m4 - m2 * m2) / n).sqrt(),
        kurtosis,
        kurtosis_se,
    }
}

/// Mean of paired differences with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub mean_diff: f64,
    pub se: f64,
}

impl PairedComparison {
    fn from_diffs(d: &[f64]) -> Self {
        PairedComparison { mean_diff: mean(d), se: std_error(d) }
    }

    /// `mean_diff ≥ −k·se`.
    pub fn holds(&self, k: f64) -> bool {
        self.mean_diff >= -k * self.se
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexOrderReport {
    pub functional: String,
    pub mean_f_endpoint: f64,
    /// `F(M_T) − F(√r_lo B_T)`: non-negative in expectation.
    pub lower: PairedComparison,
    /// `F(√r_hi B_T) − F(M_T)`: non-negative in expectation.
    pub upper: PairedComparison,
}

/// Two-sided convex-order comparison `E F(√r_lo B_T) ≤ E F(M_T) ≤ E F(√r_hi B_T)`,
/// paired path by path with the Brownian endpoint that drove `M`.
pub fn convex_order_check(
    functional: &str,
    f: impl Fn(&Vector) -> f64,
    endpoints: &[Vector],
    brownian: &[Vector],
    r_lower: f64,
    r_upper: f64,
) -> Result<ConvexOrderReport> {
    if endpoints.len() != brownian.len() || endpoints.len() < 2 {
        return Err(Error::invalid("convex-order check needs matching ensembles of at least two paths"));
    }
    let (sl, su) = (r_lower.sqrt(), r_upper.sqrt());
    let fm: Vec<f64> = endpoints.iter().map(&f).collect();
    let lower: Vec<f64> = fm.iter().zip(brownian).map(|(v, b)| v - f(&(b * sl))).collect();
    let upper: Vec<f64> = fm.iter().zip(brownian).map(|(v, b)| f(&(b * su)) - v).collect();
    Ok(ConvexOrderReport {
        functional: functional.to_string(),
        mean_f_endpoint: mean(&fm),
        lower: PairedComparison::from_diffs(&lower),
        upper: PairedComparison::from_diffs(&upper),
    })
}

/// Barycenters `a_T = E[X | TX + B_T]` for `n_paths` independent draws.
pub fn endpoint_barycenters(
    body: &Body,
    horizon: f64,
    n_paths: usize,
    inner: &InnerConfig,
    rng: &RngStream,
) -> Result<Vec<Vector>> {
    let n = body.dim();
    ensemble(n_paths, rng, |_, r| {
        let x = draw_uniform_point(body, &inner.sampler, r)?;
        let theta = &x * horizon + gaussian_vector(n, r) * horizon.sqrt();
        Ok(measure_state(body, horizon, &theta, inner, &r.spawn(0))?.mean)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointReport {
    pub directions: Vec<Vector>,
    pub ks: Vec<KsResult>,
    pub mean: Vector,
    pub variance: Vector,
}

impl EndpointReport {
    /// Number of directions whose KS p-value exceeds `alpha`.
    pub fn passes(&self, alpha: f64) -> usize {
        self.ks.iter().filter(|k| k.p_value > alpha).count()
    }
}

/// Two-sample KS of 1-D projections of the barycenters against reference
/// points of the body.
pub fn endpoint_law_check(barycenters: &[Vector], reference: &[Vector], directions: &[Vector]) -> Result<EndpointReport> {
    if barycenters.len() < 2 || reference.is_empty() {
        return Err(Error::invalid("endpoint check needs barycenters and reference points"));
    }
    let n = barycenters[0].len();
    let ks = directions
        .iter()
        .map(|d| {
            let a: Vec<f64> = barycenters.iter().map(|x| x.dot(d)).collect();
            let b: Vec<f64> = reference.iter().map(|x| x.dot(d)).collect();
            ks_two_sample(&a, &b)
        })
        .collect();
    let coord = |i: usize| -> Vec<f64> { barycenters.iter().map(|x| x[i]).collect() };
    let mean_v = Vector::from_fn(n, |i, _| mean(&coord(i)));
    let var_v = Vector::from_fn(n, |i, _| crate::numkit::stats::variance(&coord(i)));
    Ok(EndpointReport { directions: directions.to_vec(), ks, mean: mean_v, variance: var_v })
}

/// Reference uniform points for [`endpoint_law_check`].
pub fn uniform_reference(body: &Body, count: usize, sampler: &SamplerConfig, rng: &RngStream) -> Result<Vec<Vector>> {
    let chains = 16;
    tilted_sample_parallel(body, &Tilt::none(body.dim()), count.div_ceil(chains), chains, sampler, rng)
}

/// Integrand of the scalar martingales in the tail check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Volatility {
    /// `σ² = b/T` throughout: Brownian motion run for quadratic variation `b`.
    Constant,
    /// `σ = σ_max` while `M ≥ 0` and `low·σ_max` below zero, `σ_max² = b/T`.
    Adaptive { low: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreedmanRow {
    pub a: f64,
    pub paths: usize,
    pub exceedance: f64,
    pub se: f64,
    /// `exp(−a²/(2b))`.
    pub bound: f64,
    /// `2(1 − Φ(a/√b))`, exact for the constant integrand.
    pub reflection: Option<f64>,
}

impl FreedmanRow {
    pub fn within_bound(&self, k: f64) -> bool {
        self.exceedance <= self.bound + k * self.se
    }

    /// Agreement with the reflection-principle value within `k` binomial
    /// standard errors of that value.
    pub fn matches_reflection(&self, k: f64) -> Option<bool> {
        self.reflection.map(|p| (self.exceedance - p).abs() <= k * binomial_se(p, self.paths))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreedmanReport {
    pub b: f64,
    pub horizon: f64,
    pub paths: usize,
    pub rows: Vec<FreedmanRow>,
}

/// Exceedance frequencies `P(sup_{t≤T} M_t ≥ a)` for martingales with
/// `[M]_T ≤ b`. Within each step the path is a scaled Brownian motion, and
/// its running maximum is drawn exactly from the Brownian-bridge law.
pub fn freedman_check(
    b: f64,
    horizon: f64,
    a_grid: &[f64],
    n_paths: usize,
    steps: usize,
    volatility: Volatility,
    rng: &RngStream,
) -> Result<FreedmanReport> {
    if !(b > 0.0) || !(horizon > 0.0) || steps == 0 || n_paths == 0 {
        return Err(Error::invalid("tail check needs b > 0, T > 0, steps ≥ 1 and paths ≥ 1"));
    }
    let dt = horizon / steps as f64;
    let sigma_max = (b / horizon).sqrt();
    let sups: Vec<f64> = ensemble(n_paths, rng, |_, r| {
        let mut m = 0.0f64;
        let mut sup = 0.0f64;
        for _ in 0..steps {
            let sigma = match volatility {
                Volatility::Constant => sigma_max,
                Volatility::Adaptive { low } => {
                    if m >= 0.0 {
                        sigma_max
                    } else {
                        sigma_max * low.clamp(0.0, 1.0)
                    }
                }
            };
            let var = sigma * sigma * dt;
            let next = m + var.sqrt() * r.normal();
            let u = r.open01();
            let bridge_max = 0.5 * (m + next + ((next - m).powi(2) - 2.0 * var * u.ln()).sqrt());
            sup = sup.max(bridge_max);
            m = next;
        }
        Ok(sup)
    })?;
    let rows = a_grid
        .iter()
        .map(|&a| {
            let hits = sups.iter().filter(|&&s| s >= a).count();
            let p = hits as f64 / n_paths as f64;
            FreedmanRow {
                a,
                paths: n_paths,
                exceedance: p,
                se: binomial_se(p, n_paths),
                bound: (-a * a / (2.0 * b)).exp(),
                reflection: match volatility {
                    Volatility::Constant => Some(if a <= 0.0 { 1.0 } else { 2.0 * normal_sf(a / b.sqrt()) }),
                    Volatility::Adaptive { .. } => None,
                },
            }
        })
        .collect();
    Ok(FreedmanReport { b, horizon, paths: n_paths, rows })
}
