use super::*;
use crate::bodies::{ball, cube, simplex, simplex_unit_vertices};
use crate::numkit::stats::{ks_one_sample, mean};
use crate::numkit::{normal_cdf, unit_vector, Matrix, SymMatrix};

fn pooled(body: &Body, tilt: &Tilt, total: usize, seed: u64) -> Vec<Vector> {
    let n = body.dim();
    let chains = 16;
    let rng = RngStream::new(seed, 0);
    tilted_sample_parallel(body, tilt, total / chains, chains, &SamplerConfig::near_independent(n), &rng).unwrap()
}

fn within(est: f64, want: f64, se: f64, k: f64) {
    assert!((est - want).abs() <= k * se.max(1e-12), "estimate {est} vs {want} (se {se})");
}

#[test]
fn cube_uniform_moments() {
    let body = cube(3).unwrap();
    let pts = pooled(&body, &Tilt::none(3), 100_000, 11);
    assert!(pts.iter().all(|p| body.contains(p)));
    let m = estimate_moments(&pts).unwrap();
    for i in 0..3 {
        within(m.mean[i], 0.0, m.mean_se[i], 5.0);
        for j in 0..3 {
            let want = if i == j { 1.0 / 3.0 } else { 0.0 };
            within(m.covariance.get(i, j), want, m.covariance_se[(i, j)], 5.0);
        }
    }
}

#[test]
fn ball_second_moment() {
    let body = ball(3, 1.0).unwrap();
    let pts = pooled(&body, &Tilt::none(3), 64_000, 12);
    let sq: Vec<f64> = pts.iter().map(|p| p.norm_squared()).collect();
    let se = crate::numkit::stats::batch_means_se(&sq);
    within(mean(&sq), 0.6, se, 5.0);
}

#[test]
fn interval_gaussian_tilt_matches_truncated_law() {
    // On [-1, 1] with t = 4 the target is N(0, 1/4) truncated to the interval.
    let body = cube(1).unwrap();
    let tilt = Tilt { t: 4.0, theta: Vector::zeros(1) };
    let pts = pooled(&body, &tilt, 20_000, 13);
    let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
    let (pa, pb) = (normal_cdf(-2.0), normal_cdf(2.0));
    let ks = ks_one_sample(&xs, |x| ((normal_cdf(2.0 * x) - pa) / (pb - pa)).clamp(0.0, 1.0));
    assert!(ks.p_value > 1e-3, "{ks:?}");
}

#[test]
fn untruncated_gaussian_tilt_has_the_right_mean() {
    let body = ball(2, 10.0).unwrap();
    let theta = Vector::from_vec(vec![4.0, 0.0]);
    let tilt = Tilt { t: 4.0, theta };
    let pts = pooled(&body, &tilt, 32_000, 14);
    let m = estimate_moments(&pts).unwrap();
    assert!((m.mean[0] - 1.0).abs() < 0.05 && m.mean[1].abs() < 0.05, "{:?}", m.mean);
    for i in 0..2 {
        within(m.covariance.get(i, i), 0.25, m.covariance_se[(i, i)], 5.0);
    }
}

#[test]
fn linear_tilt_matches_exponential_marginal() {
    // Coordinates of the cube decouple: x₀ has density ∝ eˣ on [-1, 1].
    let body = cube(2).unwrap();
    let tilt = Tilt { t: 0.0, theta: Vector::from_vec(vec![1.0, 0.0]) };
    let pts = pooled(&body, &tilt, 20_000, 15);
    let x0: Vec<f64> = pts.iter().map(|p| p[0]).collect();
    let e = std::f64::consts::E;
    let ks = ks_one_sample(&x0, |x| ((x.exp() - 1.0 / e) / (e - 1.0 / e)).clamp(0.0, 1.0));
    assert!(ks.p_value > 1e-3, "{ks:?}");
    let x1: Vec<f64> = pts.iter().map(|p| p[1]).collect();
    let ks = ks_one_sample(&x1, |x| ((x + 1.0) / 2.0).clamp(0.0, 1.0));
    assert!(ks.p_value > 1e-3, "{ks:?}");
}

#[test]
fn uniform_cells_pass_chi_square() {
    let body = cube(2).unwrap();
    let pts = pooled(&body, &Tilt::none(2), 32_000, 16);
    let mut counts = [0usize; 16];
    for p in &pts {
        let cell = |v: f64| (((v + 1.0) * 2.0).floor() as usize).min(3);
        counts[cell(p[0]) * 4 + cell(p[1])] += 1;
    }
    let expect = pts.len() as f64 / 16.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    // 15 degrees of freedom: the 0.999 quantile is about 37.7.
    assert!(chi2 < 37.7, "chi2 = {chi2}");
}

#[test]
fn third_moment_of_shifted_exponential() {
    let mut rng = RngStream::new(17, 0);
    let pts: Vec<Vector> = (0..200_000).map(|_| Vector::from_vec(vec![-rng.open01().ln()])).collect();
    let h = estimate_third_moment_slice(&pts, &unit_vector(1, 0)).unwrap();
    within(h.matrix.get(0, 0), 2.0, h.se[(0, 0)], 5.0);
}

#[test]
fn cube_third_moment_vanishes() {
    let body = cube(3).unwrap();
    let pts = pooled(&body, &Tilt::none(3), 64_000, 18);
    let theta = Vector::from_vec(vec![1.0, 2.0, -2.0]) / 3.0;
    let h = estimate_third_moment_slice(&pts, &theta).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            within(h.matrix.get(i, j), 0.0, h.se[(i, j)], 5.0);
        }
    }
}

/// `E[Xθ X Xᵀ]` for the uniform simplex, from the Dirichlet(1,…,1) moments
/// of its barycentric coordinates.
fn simplex_third_moment(n: usize, theta: &Vector) -> Matrix {
    let v = simplex_unit_vertices(n);
    let k = n + 1;
    let fact = |m: usize| (1..=m).map(|i| i as f64).product::<f64>();
    let mut h = Matrix::zeros(n, n);
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                let mut mult = [0usize; 3];
                let idx = [a, b, c];
                let distinct: Vec<usize> = {
                    let mut d = idx.to_vec();
                    d.sort();
                    d.dedup();
                    d
                };
                for (slot, d) in distinct.iter().enumerate() {
                    mult[slot] = idx.iter().filter(|&&i| i == *d).count();
                }
                let w = fact(k - 1) * mult.iter().map(|&m| fact(m)).product::<f64>() / fact(k + 2);
                let va = v.row(a).transpose();
                let vb = v.row(b).transpose();
                let vc = v.row(c).transpose();
                h += w * va.dot(theta) * &vb * vc.transpose();
            }
        }
    }
    h
}

#[test]
fn simplex_third_moment_matches_dirichlet_oracle() {
    let n = 3;
    let body = simplex(n).unwrap();
    let pts = pooled(&body, &Tilt::none(n), 128_000, 19);
    let theta = simplex_unit_vertices(n).row(0).transpose();
    let want = simplex_third_moment(n, &theta);
    assert!(want.norm() > 1e-3);
    let h = estimate_third_moment_slice(&pts, &theta).unwrap();
    for i in 0..n {
        for j in 0..n {
            within(h.matrix.get(i, j), want[(i, j)], h.se[(i, j)], 5.0);
        }
    }
}

#[test]
fn moments_reject_tiny_samples() {
    assert!(estimate_moments(&[Vector::zeros(2)]).is_err());
    let pts = vec![Vector::zeros(2), Vector::zeros(2)];
    assert!(estimate_third_moment_slice(&pts, &Vector::from_vec(vec![1.0, 1.0])).is_err());
}

#[test]
fn chains_are_reproducible_and_stay_inside() {
    let body = simplex(4).unwrap();
    let cfg = SamplerConfig::new(50, 3).unwrap();
    let a = uniform_sample(&body, 500, &cfg, &mut RngStream::new(20, 1)).unwrap();
    let b = uniform_sample(&body, 500, &cfg, &mut RngStream::new(20, 1)).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|p| body.contains(p)));
    let c = uniform_sample(&body, 500, &cfg, &mut RngStream::new(20, 2)).unwrap();
    assert_ne!(a, c);
}

#[test]
fn invalid_tilts_are_rejected() {
    let body = cube(2).unwrap();
    let cfg = SamplerConfig::default();
    let mut rng = RngStream::new(1, 0);
    assert!(tilted_sample(&body, -1.0, &Vector::zeros(2), 10, &cfg, &mut rng).is_err());
    assert!(tilted_sample(&body, 1.0, &Vector::zeros(3), 10, &cfg, &mut rng).is_err());
    assert!(SamplerConfig::new(10, 0).is_err());
}

#[test]
fn csv_dump_has_header_and_rows() {
    let pts = vec![Vector::from_vec(vec![1.0, 2.0]), Vector::from_vec(vec![-0.5, 0.25])];
    let mut buf = Vec::new();
    write_points_csv(&pts, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x0,x1");
    assert_eq!(lines.len(), 3);
    let back: Vec<f64> = lines[2].split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(back, vec![-0.5, 0.25]);
}

#[test]
fn sym_estimates_are_symmetric() {
    let body = cube(2).unwrap();
    let pts = pooled(&body, &Tilt::none(2), 3_200, 21);
    let m = estimate_moments(&pts).unwrap();
    let c: &SymMatrix = &m.covariance;
    assert_eq!(c.get(0, 1), c.get(1, 0));
    assert!(m.covariance_se_scale() > 0.0);
}

#[test]
fn third_moment_tensor_matches_slices_and_bounds() {
    let n = 3;
    let body = simplex(n).unwrap();
    let pts = pooled(&body, &Tilt::none(n), 32_000, 22);
    let tensor = estimate_third_moment_tensor(&pts).unwrap();
    let mut rng = RngStream::new(23, 0);
    let theta = crate::numkit::uniform_sphere(n, &mut rng);
    let slice = estimate_third_moment_slice(&pts, &theta).unwrap();
    let mut combo = Matrix::zeros(n, n);
    for (i, h) in tensor.iter().enumerate() {
        combo += h.as_matrix() * theta[i];
    }
    assert!((combo - slice.matrix.as_matrix()).amax() < 1e-12);

    // ‖H_θ‖²_op ≤ 9‖cov‖³_op and the strength dominates every ‖H_θ‖²_HS.
    let cov = estimate_moments(&pts).unwrap().covariance;
    let cov_op = crate::numkit::sym_eig(&cov).unwrap().max();
    let h_op = crate::numkit::operator_norm(slice.matrix.as_matrix());
    assert!(h_op * h_op <= 9.0 * cov_op.powi(3));
    let strength = third_moment_strength(&tensor).unwrap();
    assert!(slice.matrix.as_matrix().norm_squared() <= strength * (1.0 + 1e-12));
}
