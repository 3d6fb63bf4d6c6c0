//! Small statistical helpers: summaries, batch means, Kolmogorov–Smirnov,
//! order-statistic quantile intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 32;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Standard error of the mean for iid draws.
pub fn std_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Batch-means standard error of the mean of a (possibly autocorrelated)
/// series. Falls back to the iid formula when there are fewer than two
/// points per batch.
pub fn batch_means_se(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 * BATCHES {
        return std_error(xs);
    }
    let size = n / BATCHES;
    let means: Vec<f64> = (0..BATCHES).map(|b| mean(&xs[b * size..(b + 1) * size])).collect();
    (variance(&means) / BATCHES as f64).sqrt()
}

/// Sample mean and standard error bundled together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

impl MeanSe {
    pub fn iid(xs: &[f64]) -> Self {
        MeanSe { mean: mean(xs), se: std_error(xs) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Asymptotic Kolmogorov tail `P(K > λ)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_p(d: f64, ne: f64) -> f64 {
    let s = ne.sqrt();
    kolmogorov_sf((s + 0.12 + 0.11 / s) * d)
}

/// Two-sample Kolmogorov–Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    KsResult { statistic: d, p_value: ks_p(d, na * nb / (na + nb)) }
}

/// One-sample Kolmogorov–Smirnov test against a continuous distribution function.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut xs = xs.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i as f64 + 1.0) / n - f);
    }
    KsResult { statistic: d, p_value: ks_p(d, n) }
}

/// Empirical `q`-quantile with a distribution-free order-statistic confidence
/// interval at level `1 − alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileEstimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn quantile_with_ci(xs: &[f64], q: f64, alpha: f64) -> QuantileEstimate {
    assert!(!xs.is_empty(), "quantile of empty sample");
    assert!(q > 0.0 && q < 1.0, "quantile level must lie in (0, 1)");
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let idx = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
    // Ranks l, u with P(Bin(n, q) < l) ≤ α/2 and P(Bin(n, q) ≥ u) ≤ α/2 give
    // P(X_(l) ≤ ξ_q < X_(u)) ≥ 1 − α.
    let bin = Binomial::new(q, n as u64).expect("valid binomial");
    let lo_rank = bin.inverse_cdf(alpha / 2.0) as usize;
    let hi_rank = (bin.inverse_cdf(1.0 - alpha / 2.0) as usize + 1).min(n);
    let lower = if lo_rank == 0 { f64::NEG_INFINITY } else { s[lo_rank - 1] };
    let upper = if hi_rank >= n { s[n - 1] } else { s[hi_rank - 1] };
    QuantileEstimate { value: s[idx], lower, upper }
}

/// Empirical quantile by the nearest-rank rule.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let idx = ((q * s.len() as f64).ceil() as usize).clamp(1, s.len()) - 1;
    s[idx]
}

/// Standard error of a binomial proportion estimate.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Kurtosis `E(x − m)⁴ / var²` (3 for a Gaussian) and its standard error
/// under normality.
pub fn kurtosis_with_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = mean(xs);
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    let k = m4 / (m2 * m2);
    // Under normality Var(kurtosis) ≈ 24/n.
    (k, (24.0 / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::rng::RngStream;
    use crate::numkit::special::normal_cdf;
    use rand::Rng;

    #[test]
    fn ks_accepts_same_law_and_rejects_shift() {
        let mut rng = RngStream::new(1, 0);
        let a: Vec<f64> = (0..2000).map(|_| rng.normal()).collect();
        let b: Vec<f64> = (0..2000).map(|_| rng.normal()).collect();
        let c: Vec<f64> = (0..2000).map(|_| rng.normal() + 0.3).collect();
        assert!(ks_two_sample(&a, &b).p_value > 0.01);
        assert!(ks_two_sample(&a, &c).p_value < 1e-6);
        assert!(ks_one_sample(&a, normal_cdf).p_value > 0.01);
    }

    #[test]
    fn ks_p_values_are_roughly_uniform() {
        let mut rng = RngStream::new(2, 0);
        let rejections = (0..400)
            .filter(|_| {
                let xs: Vec<f64> = (0..200).map(|_| rng.random::<f64>()).collect();
                ks_one_sample(&xs, |x| x.clamp(0.0, 1.0)).p_value < 0.05
            })
            .count();
        assert!((5..=40).contains(&rejections), "{rejections}");
    }

    #[test]
    fn quantile_ci_covers_uniform_quantile() {
        let mut rng = RngStream::new(3, 0);
        let mut covered = 0;
        for _ in 0..200 {
            let xs: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
            let q = quantile_with_ci(&xs, 0.9, 0.05);
            assert!(q.lower <= q.value && q.value <= q.upper);
            if q.lower <= 0.9 && 0.9 <= q.upper {
                covered += 1;
            }
        }
        assert!(covered >= 180, "{covered}");
    }

    #[test]
    fn batch_means_reduce_to_iid_scale() {
        let mut rng = RngStream::new(4, 0);
        let xs: Vec<f64> = (0..32_000).map(|_| rng.normal()).collect();
        let r = batch_means_se(&xs) / std_error(&xs);
        assert!((0.6..1.5).contains(&r), "{r}");
    }
}
