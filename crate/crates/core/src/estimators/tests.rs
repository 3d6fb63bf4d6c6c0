use super::*;
use crate::bodies::{ball, cross_polytope, cube, simplex};
use crate::numkit::matrix::matrix_to_rows;
use crate::numkit::{alpha_n, haar_orthogonal, Matrix};

fn rng(seed: u64) -> RngStream {
    RngStream::new(seed, 0)
}

#[test]
fn ball_mean_width_and_gauge_are_exact() {
    let b = ball(5, 2.0).unwrap();
    let m = m_of(&b, 1000, &rng(1)).unwrap();
    assert!((m.value - 0.5).abs() < 1e-12 && m.se < 1e-12);
    let ms = mstar_of(&b, 1000, &rng(2)).unwrap();
    assert!((ms.value - 2.0).abs() < 1e-12);
}

#[test]
fn gaussian_gauge_is_alpha_times_mean_width() {
    let k = cube(6).unwrap();
    let g = mean_gauge_gaussian(&k, 100_000, &rng(3)).unwrap();
    let m = m_of(&k, 100_000, &rng(4)).unwrap();
    let a = alpha_n(6);
    let scaled = ScalarEstimate { value: a * m.value, se: a * m.se, samples: m.samples, method: m.method.clone() };
    assert!(g.agrees_with(&scaled, 4.0), "{g:?} vs {scaled:?}");
}

#[test]
fn mstar_is_mean_width_of_polar() {
    let k = simplex(4).unwrap();
    let a = mstar_of(&k, 50_000, &rng(5)).unwrap();
    let b = m_of(&k.polar().unwrap(), 50_000, &rng(5)).unwrap();
    assert!((a.value - b.value).abs() < 1e-9);
}

#[test]
fn kahane_ratio_of_euclidean_norm() {
    // (E|G|²)^{1/2} / E|G| = √n / α_n
    let n = 4;
    let r = kahane_ratio(&ball(n, 1.0).unwrap(), 2.0, 200_000, &rng(6)).unwrap();
    let exact = (n as f64).sqrt() / alpha_n(n);
    assert!((r.value - exact).abs() < 4.0 * r.se, "{} vs {exact} (se {})", r.value, r.se);
}

#[test]
fn laplace_sup_mean_is_harmonic() {
    let n = 8;
    let h: f64 = (1..=n).map(|k| 1.0 / k as f64).sum();
    let s = mean_sup_laplace(n, 200_000, &rng(7)).unwrap();
    let exact = h / std::f64::consts::SQRT_2;
    assert!((s.value - exact).abs() < 4.0 * s.se);
}

#[test]
fn uniform_cube_sup_norm_mean() {
    let n = 4;
    let k = cube(n).unwrap();
    let e = mean_gauge_uniform(&k, &k, 40_000, &SamplerConfig::default(), &rng(8)).unwrap();
    let exact = n as f64 / (n as f64 + 1.0);
    assert!((e.value - exact).abs() < 4.0 * e.se, "{e:?}");
}

#[test]
fn operator_norm_examples() {
    let n = 3;
    let id = Matrix::identity(n, n);
    let b = ball(n, 1.0).unwrap();
    assert!((operator_gauge_norm(&id, &b, &b).unwrap().value - 1.0).abs() < 1e-3);
    let k = cube(n).unwrap();
    let o = operator_gauge_norm(&(&id * 2.0), &k, &k).unwrap();
    assert!(o.certified && (o.value - 2.0).abs() < 1e-12);
    // cube → cross-polytope: the vertex (1,1,1) has ℓ¹ norm 3
    let o = operator_gauge_norm(&id, &k, &cross_polytope(n).unwrap()).unwrap();
    assert!(o.certified && (o.value - 3.0).abs() < 1e-12);
    // cross-polytope → cube: vertices are unit vectors
    let o = operator_gauge_norm(&id, &cross_polytope(n).unwrap(), &k).unwrap();
    assert!((o.value - 1.0).abs() < 1e-12);
}

#[test]
fn cube_shortcut_matches_sign_enumeration() {
    let n = 5;
    let a = crate::numkit::gaussian_matrix(n, n, &mut rng(9));
    let k = cube(n).unwrap();
    let fast = operator_gauge_norm(&a, &k, &k).unwrap().value;
    let v = k.vertices().unwrap();
    let brute = v.row_iter().map(|r| (&a * r.transpose()).amax()).fold(0.0, f64::max);
    assert!((fast - brute).abs() < 1e-12);
}

#[test]
fn chevet_one_dimensional_is_half_normal() {
    let k = cube(1).unwrap();
    let r = chevet_estimate(&k, &k, 40_000, 100, false, &rng(10)).unwrap();
    let exact = (2.0 / std::f64::consts::PI).sqrt();
    assert!((r.lhs.value - exact).abs() < 4.0 * r.lhs.se);
    assert!((r.bound - 2.0).abs() < 1e-12);
}

#[test]
fn singular_factor_is_bounded_and_diagonal() {
    let f = mean_singular_factor(4, 2000, &rng(11)).unwrap();
    let ratio = f.delta.value / 2.0;
    assert!((0.5..=1.0).contains(&ratio), "{ratio}");
    assert!(f.max_offdiag_z() < 4.5);
}

#[test]
fn containment_examples() {
    let n = 2;
    let id = Matrix::identity(n, n);
    let c2 = cube(n).unwrap().scale(2.0).unwrap();
    let b = ball(n, 8f64.sqrt()).unwrap();
    assert!((containment_lambda(&c2, &b, &id).unwrap() - 1.0).abs() < 1e-12);
    let half = containment_lambda(&c2, &b.scale(2.0).unwrap(), &id).unwrap();
    assert!((half - 0.5).abs() < 1e-12);
    assert!(containment_lambda(&c2, &b, &(&id * 1.1)).is_err());
}

#[test]
fn vertex_and_facet_routes_agree() {
    for (k1, k2) in [(cube(4).unwrap(), simplex(4).unwrap()), (cross_polytope(4).unwrap(), cube(4).unwrap())] {
        for s in 0..5 {
            let u = haar_orthogonal(4, &mut rng(20 + s));
            let a = containment_lambda(&k1, &k2, &u).unwrap();
            let b = containment_lambda_facets(&k1, &k2, &u).unwrap();
            assert!((a - b).abs() < 1e-9 * a.max(1.0), "{a} vs {b}");
        }
    }
}

#[test]
fn ball_partial_containment() {
    let n = 3;
    let b = ball(n, 1.0).unwrap();
    let p = partial_containment_lambda(&b, &b, 0.5, 40_000, &SamplerConfig::default(), &rng(12)).unwrap();
    let exact = 0.5f64.powf(1.0 / n as f64);
    assert!(p.lower <= exact && exact <= p.upper, "{p:?} vs {exact}");
}

#[test]
fn dbm_identical_bodies_is_one() {
    let k = simplex(3).unwrap();
    let c = dbm_upper(&k, &k, 4, 1).unwrap();
    assert!((c.bound - 1.0).abs() < 1e-12);
    assert!(c.verify(&k, &k).unwrap());
}

#[test]
fn dbm_is_monotone_in_rotations() {
    let (a, b) = (cube(3).unwrap(), cross_polytope(3).unwrap());
    let few = dbm_upper(&a, &b, 4, 9).unwrap().bound;
    let many = dbm_upper(&a, &b, 64, 9).unwrap().bound;
    assert!(many <= few);
    assert!(many >= 1.0);
}

#[test]
fn square_and_diamond_distance() {
    // the 45° rotation maps the square onto √2 times the diamond
    let (a, b) = (cube(2).unwrap().scale(2.0).unwrap(), cross_polytope(2).unwrap().scale(2.0).unwrap());
    let c = dbm_upper(&a, &b, 256, 3).unwrap();
    assert!(c.bound <= 1.2, "{}", c.bound);
}

#[test]
fn tampered_certificate_fails() {
    let (a, b) = (cube(3).unwrap(), simplex(3).unwrap());
    let mut c = dbm_upper(&a, &b, 16, 4).unwrap();
    assert!(c.verify(&a, &b).unwrap());
    c.lambda_forward *= 0.99;
    c.bound = c.lambda_forward * c.lambda_backward;
    assert!(!c.verify(&a, &b).unwrap());
    let mut c = dbm_upper(&a, &b, 16, 4).unwrap();
    let mut rows = matrix_to_rows(&Matrix::identity(3, 3));
    rows[0][0] = 1.5;
    c.rotation = Some(rows);
    assert!(c.verify(&a, &b).is_err());
}

#[test]
fn record_round_trip() {
    let r = EstimateRecord {
        op: "dbm".into(),
        bodies: vec!["cube".into(), "simplex".into()],
        n: 4,
        params: serde_json::json!({"rotations": 16}),
        value: 2.5,
        se: None,
        seed: 7,
        certified: true,
    };
    let line = r.to_line().unwrap();
    assert!(!line.contains('\n'));
    assert_eq!(EstimateRecord::from_line(&line).unwrap(), r);
    assert!(EstimateRecord::from_line(&line.replace("\"op\"", "\"extra\":1,\"op\"")).is_err());
}

#[test]
fn isotropic_cube_sup_mean() {
    let n = 16;
    let s = mean_sup_isotropic_cube(n, 100_000, &rng(13)).unwrap();
    let exact = 3f64.sqrt() * n as f64 / (n as f64 + 1.0);
    assert!((s.value - exact).abs() < 4.0 * s.se);
}
