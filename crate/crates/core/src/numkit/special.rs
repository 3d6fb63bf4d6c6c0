//! Scalar special functions: normal distribution, `E|G|`, quadrature nodes.

use libm::erfc;
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::ln_gamma;

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

/// Standard normal distribution function `Φ(t)`.
pub fn normal_cdf(t: f64) -> f64 {
    0.5 * erfc(-t * FRAC_1_SQRT_2)
}

/// Upper tail `1 − Φ(t)`, accurate deep in the tail.
pub fn normal_sf(t: f64) -> f64 {
    0.5 * erfc(t * FRAC_1_SQRT_2)
}

pub fn normal_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
}

/// Inverse of `Φ` on `(0, 1)`.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let t = -SQRT_2 * erfc_inv(2.0 * p);
    newton_polish(t, p, normal_cdf)
}

// One Newton step against the (more accurate) distribution function.
fn newton_polish(t: f64, target: f64, f: impl Fn(f64) -> f64) -> f64 {
    let d = normal_pdf(t);
    if d > 1e-300 && t.is_finite() {
        let step = (f(t) - target) / d;
        if step.abs() < 1e-3 * (1.0 + t.abs()) {
            return t - step;
        }
    }
    t
}

/// Inverse of the upper tail: the `t` with `1 − Φ(t) = q`.
pub fn normal_sf_inv(q: f64) -> f64 {
    if q <= 0.0 {
        return f64::INFINITY;
    }
    if q >= 1.0 {
        return f64::NEG_INFINITY;
    }
    let t = SQRT_2 * erfc_inv(2.0 * q);
    -newton_polish(-t, q, normal_cdf)
}

/// `α_n = E|G|` for a standard Gaussian vector in `ℝⁿ`: `√2 Γ((n+1)/2) / Γ(n/2)`.
pub fn alpha_n(n: usize) -> f64 {
    assert!(n >= 1, "alpha_n requires n >= 1");
    let n = n as f64;
    SQRT_2 * (ln_gamma((n + 1.0) / 2.0) - ln_gamma(n / 2.0)).exp()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = mf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// Integrates `f` over `[a, b]` with composite Gauss–Legendre (`panels` × 16 nodes).
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(16);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            total += wi * f(lo + 0.5 * h * (xi + 1.0));
        }
    }
    0.5 * h * total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cdf_by_quadrature(t: f64) -> f64 {
        // Φ(t) = 1/2 + ∫₀ᵗ φ
        0.5 + integrate(normal_pdf, 0.0, t, 64)
    }

    #[test]
    fn cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!(normal_sf(1.0) > 0.1);
        assert!((normal_cdf(2.0) - 0.977_249_868_051_820_8).abs() < 1e-12);
        for t in [-3.0, -0.7, 0.3, 1.5, 2.0, 4.0] {
            assert!((normal_cdf(t) - cdf_by_quadrature(t)).abs() < 1e-12, "t={t}");
            assert!((normal_cdf(t) + normal_sf(t) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn tail_bounds_hold_on_grid() {
        for k in 1..=400 {
            let t = k as f64 * 0.025;
            let sf = normal_sf(t);
            let lower = (-t * t / 2.0).exp() / ((2.0 * PI).sqrt() * (t + 1.0));
            let upper = (-t * t / 2.0).exp() / ((2.0 * PI).sqrt() * t);
            assert!(lower <= sf && sf <= upper, "t={t}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for p in [1e-300, 1e-12, 0.01, 0.3, 0.5, 0.9, 1.0 - 1e-12] {
            let t = normal_quantile(p);
            assert!((normal_cdf(t) - p).abs() <= 1e-12 * p.max(1e-3), "p={p}");
        }
        assert!((normal_sf(normal_sf_inv(1e-200)) / 1e-200 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn alpha_one_matches_half_normal_integral() {
        let oracle = 2.0 * integrate(|x| x * normal_pdf(x), 0.0, 40.0, 200);
        assert!((alpha_n(1) - oracle).abs() < 1e-12);
        assert!((alpha_n(1) - (2.0 / PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn alpha_bounds() {
        let mut prev = 0.0;
        for n in 1..=64 {
            let a = alpha_n(n);
            let s = (n as f64).sqrt();
            assert!(a <= s && a >= (n as f64 / 2.0).sqrt());
            let r = a / s;
            assert!((0.79..=1.0).contains(&r));
            assert!(r > prev);
            prev = r;
        }
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre(32);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(62)).sum();
        assert!((i - 2.0 / 63.0).abs() < 1e-13);
        let (x5, w5) = gauss_legendre(5);
        let i5: f64 = x5.iter().zip(&w5).map(|(x, w)| w * x.powi(8)).sum();
        assert!((i5 - 2.0 / 9.0).abs() < 1e-14);
    }
}
