use std::io::Write;

use serde::{Deserialize, Serialize};

use super::MeasureState;
use crate::error::Result;
use crate::numkit::eigen::{proxy_max_from_values, proxy_min_from_values};
use crate::numkit::sym_eig;

/// Spectrum window `[½, 2]` for the covariance process.
pub const WINDOW: (f64, f64) = (0.5, 2.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `f_β(Â_t)`, one entry per β of the trace.
    pub f_beta: Vec<f64>,
    pub g_beta: Vec<f64>,
    pub se_scale: f64,
    pub third_moment_strength: Option<f64>,
    /// True once the spectrum has left `[½ − 3se, 2 + 3se]` at this or an
    /// earlier step.
    pub exited_window: bool,
}

/// Eigenvalue extremes and soft-max proxies of `Â_t` along one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceTrace {
    pub n: usize,
    pub betas: Vec<f64>,
    pub rows: Vec<TraceRow>,
    pub first_exit: Option<usize>,
}

impl CovarianceTrace {
    /// The default proxy parameters `2 log n` and `8 log n` (with `n ≥ 2`).
    pub fn default_betas(n: usize) -> Vec<f64> {
        let l = (n.max(2) as f64).ln();
        vec![2.0 * l, 8.0 * l]
    }

    pub fn from_states(states: &[MeasureState], betas: &[f64]) -> Result<Self> {
        let n = states.first().map_or(0, |s| s.mean.len());
        let mut rows = Vec::with_capacity(states.len());
        let mut first_exit = None;
        for (k, s) in states.iter().enumerate() {
            let values = sym_eig(&s.covariance)?.values;
            let lambda_max = values[0];
            let lambda_min = values[values.len() - 1];
            let se_scale = s.se_scale();
            let outside = lambda_min < WINDOW.0 - 3.0 * se_scale || lambda_max > WINDOW.1 + 3.0 * se_scale;
            if outside && first_exit.is_none() {
                first_exit = Some(k);
            }
            rows.push(TraceRow {
                t: s.t,
                lambda_min,
                lambda_max,
                f_beta: betas.iter().map(|&b| proxy_max_from_values(&values, b)).collect(),
                g_beta: betas.iter().map(|&b| proxy_min_from_values(&values, b)).collect(),
                se_scale,
                third_moment_strength: s.third_moment_strength,
                exited_window: first_exit.is_some(),
            });
        }
        Ok(CovarianceTrace { n, betas: betas.to_vec(), rows, first_exit })
    }

    pub fn stayed_in_window(&self) -> bool {
        self.first_exit.is_none()
    }

    /// Steps with `t > 0` where `λ_max(Â_t) > 1/t + 3se`.
    pub fn inverse_time_violations(&self) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.t > 0.0 && r.lambda_max > 1.0 / r.t + 3.0 * r.se_scale)
            .map(|(k, _)| k)
            .collect()
    }

    /// `g_β ≤ λ_min ≤ λ_max ≤ f_β` and `f_β − λ_max ≤ log(n)/β` at every step.
    pub fn proxy_sandwich_holds(&self) -> bool {
        let ln = (self.n as f64).ln();
        let eps = 1e-12;
        self.rows.iter().all(|r| {
            self.betas.iter().enumerate().all(|(i, &b)| {
                let (f, g) = (r.f_beta[i], r.g_beta[i]);
                g <= r.lambda_min + eps
                    && r.lambda_max <= f + eps
                    && f - r.lambda_max <= ln / b + eps
                    && r.lambda_min - g <= ln / b + eps
            })
        })
    }

    /// CSV with columns `t,lambda_min,lambda_max,f_beta,g_beta,se_scale,exited_window`
    /// for the proxy parameter `betas[beta_index]`.
    pub fn write_csv<W: Write>(&self, beta_index: usize, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,lambda_min,lambda_max,f_beta,g_beta,se_scale,exited_window")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.t, r.lambda_min, r.lambda_max, r.f_beta[beta_index], r.g_beta[beta_index], r.se_scale, r.exited_window
            )?;
        }
        Ok(())
    }
}
