//! Exact draws from one-dimensional truncated Gaussian and truncated
//! exponential laws, the conditional laws of a hit-and-run step.

use crate::numkit::special::{normal_cdf, normal_quantile, normal_sf, normal_sf_inv};
use crate::numkit::RngStream;

/// Below this truncated mass the inverse-CDF route is replaced by rejection.
const MIN_MASS: f64 = 1e-14;

/// Draw from `N(mean, sd²)` conditioned on `[lo, hi]`.
pub fn truncated_normal(mean: f64, sd: f64, lo: f64, hi: f64, rng: &mut RngStream) -> f64 {
    let a = (lo - mean) / sd;
    let b = (hi - mean) / sd;
    let z = if a >= 0.0 {
        upper_tail(a, b, rng)
    } else if b <= 0.0 {
        -upper_tail(-b, -a, rng)
    } else {
        let (pa, pb) = (normal_cdf(a), normal_cdf(b));
        let u = rng.open01();
        normal_quantile(pa + u * (pb - pa)).clamp(a, b)
    };
    mean + sd * z
}

/// Standard normal on `[a, b]` with `0 ≤ a < b`.
fn upper_tail(a: f64, b: f64, rng: &mut RngStream) -> f64 {
    let (qa, qb) = (normal_sf(a), normal_sf(b));
    if qa - qb >= MIN_MASS {
        let u = rng.open01();
        return normal_sf_inv(qa - u * (qa - qb)).clamp(a, b);
    }
    tail_rejection(a, b, rng)
}

/// Rejection sampler for a standard normal restricted to `[a, b]`, `a ≥ 0`:
/// uniform proposals for short intervals, translated exponential proposals
/// (Robert 1995) otherwise.
fn tail_rejection(a: f64, b: f64, rng: &mut RngStream) -> f64 {
    let alpha = 0.5 * (a + (a * a + 4.0).sqrt());
    if b - a < 1.0 / alpha {
        loop {
            let z = a + (b - a) * rng.open01();
            if rng.open01().ln() <= 0.5 * (a * a - z * z) {
                return z;
            }
        }
    }
    loop {
        let z = a - rng.open01().ln() / alpha;
        if z > b {
            continue;
        }
        if rng.open01().ln() <= -0.5 * (z - alpha) * (z - alpha) {
            return z;
        }
    }
}

/// Draw from the density `∝ e^{rate·s}` on `[lo, hi]`.
pub fn truncated_exponential(rate: f64, lo: f64, hi: f64, rng: &mut RngStream) -> f64 {
    let u = rng.open01();
    let w = (hi - lo) * rate;
    if w.abs() < 1e-12 {
        return lo + u * (hi - lo);
    }
    // Inverse CDF written relative to the endpoint with the larger density.
    let s = if rate > 0.0 {
        hi + (u + (1.0 - u) * (-w).exp()).ln() / rate
    } else {
        lo + (u * w.exp() + (1.0 - u)).ln() / rate
    };
    s.clamp(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::stats::ks_one_sample;

    fn trunc_cdf(mean: f64, sd: f64, lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
        move |x: f64| {
            let z = |v: f64| (v - mean) / sd;
            if z(lo) > 0.0 {
                (normal_sf(z(lo)) - normal_sf(z(x.clamp(lo, hi)))) / (normal_sf(z(lo)) - normal_sf(z(hi)))
            } else {
                (normal_cdf(z(x.clamp(lo, hi))) - normal_cdf(z(lo))) / (normal_cdf(z(hi)) - normal_cdf(z(lo)))
            }
        }
    }

    #[test]
    fn inverse_cdf_regimes() {
        let mut rng = RngStream::new(51, 0);
        for (mean, sd, lo, hi) in [(0.0, 1.0, -1.0, 2.0), (0.0, 0.5, 1.0, 3.0), (5.0, 1.0, -2.0, -1.0), (0.0, 1.0, 6.0, 6.5)] {
            let xs: Vec<f64> = (0..5000).map(|_| truncated_normal(mean, sd, lo, hi, &mut rng)).collect();
            assert!(xs.iter().all(|&x| (lo..=hi).contains(&x)));
            let p = ks_one_sample(&xs, trunc_cdf(mean, sd, lo, hi)).p_value;
            assert!(p > 0.01, "({mean},{sd},{lo},{hi}) p={p}");
        }
    }

    #[test]
    fn far_tail_uses_rejection_and_stays_in_range() {
        let mut rng = RngStream::new(52, 0);
        // Mass ≈ 1e-200: beyond the inverse-CDF threshold.
        let xs: Vec<f64> = (0..5000).map(|_| truncated_normal(0.0, 1.0, 30.0, 31.0, &mut rng)).collect();
        assert!(xs.iter().all(|&x| (30.0..=31.0).contains(&x)));
        // Conditional law of the overshoot is ≈ Exp(30): mean ≈ 1/30.
        let m = xs.iter().map(|x| x - 30.0).sum::<f64>() / xs.len() as f64;
        assert!((m - 1.0 / 30.0).abs() < 0.003, "{m}");
        let narrow: Vec<f64> = (0..2000).map(|_| truncated_normal(0.0, 1.0, 40.0, 40.001, &mut rng)).collect();
        assert!(narrow.iter().all(|&x| (40.0..=40.001).contains(&x)));
    }

    #[test]
    fn exponential_matches_cdf() {
        let mut rng = RngStream::new(53, 0);
        for rate in [-3.0, 0.0, 0.7, 50.0] {
            let (lo, hi) = (-1.0, 2.0);
            let xs: Vec<f64> = (0..5000).map(|_| truncated_exponential(rate, lo, hi, &mut rng)).collect();
            let cdf = move |x: f64| {
                if rate == 0.0 {
                    (x - lo) / (hi - lo)
                } else {
                    ((rate * (x - lo)).exp_m1()) / ((rate * (hi - lo)).exp_m1())
                }
            };
            assert!(ks_one_sample(&xs, cdf).p_value > 0.01, "rate {rate}");
        }
    }
}
