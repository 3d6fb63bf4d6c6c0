use super::*;
use crate::numkit::{haar_orthogonal, gaussian_matrix, gaussian_vector, lp_solve, RngStream};

fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

/// Vertices of `{x : a x ≤ b}` by brute-force enumeration of n-row subsets.
fn enumerate_vertices(a: &Matrix, b: &Vector) -> Vec<Vector> {
    let (m, n) = a.shape();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let sub = Matrix::from_fn(n, n, |r, c| a[(idx[r], c)]);
        let rhs = Vector::from_fn(n, |r, _| b[idx[r]]);
        if let Some(x) = sub.clone().lu().solve(&rhs) {
            if (&sub * &x - &rhs).amax() < 1e-9 && (a * &x - b).max() <= 1e-9 {
                out.push(x);
            }
        }
        let mut k = n;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if idx[k] < m - n + k {
                idx[k] += 1;
                for t in k + 1..n {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

fn random_hpoly(n: usize, m: usize, rng: &mut RngStream) -> HPolytope {
    let mut a = Matrix::zeros(m + 2 * n, n);
    let mut b = Vector::zeros(m + 2 * n);
    for i in 0..n {
        a[(2 * i, i)] = 1.0;
        a[(2 * i + 1, i)] = -1.0;
        b[2 * i] = 2.0;
        b[2 * i + 1] = 2.0;
    }
    for r in 2 * n..m + 2 * n {
        let g = uniform_sphere(n, rng);
        for c in 0..n {
            a[(r, c)] = g[c];
        }
        b[r] = 0.5 + rng.open01();
    }
    HPolytope::new(a, b).unwrap()
}

fn random_vpoly(n: usize, m: usize, rng: &mut RngStream) -> VPolytope {
    loop {
        let verts = Matrix::from_fn(m, n, |_, _| rng.normal());
        if let Ok(p) = VPolytope::new(verts) {
            return p;
        }
    }
}

fn sample_bodies() -> Vec<(&'static str, Body)> {
    let mut rng = RngStream::new(31, 0);
    let t = gaussian_matrix(3, 3, &mut rng) + Matrix::identity(3, 3) * 2.0;
    let mut bodies = vec![
        ("cube", cube(3).unwrap()),
        ("cube_h", cube_hrep(3).unwrap()),
        ("cube_v", cube_vrep(3).unwrap()),
        ("cross", cross_polytope(3).unwrap()),
        ("cross_h", cross_polytope_hrep(3).unwrap()),
        ("cross_v", cross_polytope_vrep(3).unwrap()),
        ("simplex", simplex(3).unwrap()),
        ("simplex_h", simplex_hrep(3).unwrap()),
        ("simplex_v", simplex_vrep(3).unwrap()),
        ("ball", ball(3, 1.5).unwrap()),
        ("off_center_ball", ball(3, 1.0).unwrap().translate(&v(&[0.2, -0.3, 0.1])).unwrap()),
        ("image", simplex(3).unwrap().linear_image(&t).unwrap()),
        ("ball_image", ball(3, 1.0).unwrap().linear_image(&t).unwrap()),
        ("shifted_h", cube_hrep(3).unwrap().translate(&v(&[0.3, 0.1, -0.5])).unwrap()),
        ("random_h", Body::H(random_hpoly(3, 6, &mut rng))),
    ];
    bodies.push(("random_v", Body::V(random_vpoly(3, 9, &mut rng))));
    bodies
}

#[test]
fn gauge_examples() {
    assert_eq!(cube(3).unwrap().gauge(&v(&[0.5, -2.0, 1.0])), 2.0);
    assert_eq!(cube_hrep(3).unwrap().gauge(&v(&[0.5, -2.0, 1.0])), 2.0);
    assert!((ball(2, 2.0).unwrap().gauge(&v(&[3.0, 0.0])) - 1.5).abs() < 1e-15);
    let x = v(&[0.3, 0.3]);
    let lp = cross_polytope_vrep(2).unwrap().gauge(&x);
    assert!((lp - 0.6).abs() < 1e-9);
    assert!((lp - x.lp_norm(1)).abs() < 1e-9);
}

#[test]
fn lp_gauges_match_closed_forms() {
    let mut rng = RngStream::new(32, 0);
    for n in 2..=5 {
        let cv = cube_vrep(n).unwrap();
        let xv = cross_polytope_vrep(n).unwrap();
        for _ in 0..100 {
            let x = gaussian_vector(n, &mut rng);
            assert!((cv.gauge(&x) - x.amax()).abs() < 1e-9);
            assert!((xv.gauge(&x) - x.lp_norm(1)).abs() < 1e-9);
        }
    }
}

#[test]
fn support_examples() {
    assert_eq!(cube(2).unwrap().support(&v(&[1.0, 1.0])), 2.0);
    assert!((cube_hrep(2).unwrap().support(&v(&[1.0, 1.0])) - 2.0).abs() < 1e-12);
    let mut rng = RngStream::new(33, 0);
    for r in [0.5, 1.0, 3.0] {
        let b = ball(4, r).unwrap();
        let th = uniform_sphere(4, &mut rng);
        assert!((b.support(&th) - r).abs() < 1e-14);
    }
}

#[test]
fn hpoly_support_matches_vertex_enumeration() {
    let mut rng = RngStream::new(34, 0);
    for trial in 0..30 {
        let n = 2 + trial % 2;
        let p = random_hpoly(n, 5, &mut rng);
        let verts = enumerate_vertices(&p.a, &p.b);
        for _ in 0..10 {
            let th = gaussian_vector(n, &mut rng);
            let oracle = verts.iter().map(|x| x.dot(&th)).fold(f64::NEG_INFINITY, f64::max);
            assert!((p.support(&th) - oracle).abs() < 1e-8);
        }
    }
}

#[test]
fn chord_examples() {
    let c = cube(3).unwrap();
    assert_eq!(c.chord(&Vector::zeros(3), &v(&[1.0, 0.0, 0.0])).unwrap(), (-1.0, 1.0));
    let (lo, hi) = cube_hrep(3).unwrap().chord(&Vector::zeros(3), &v(&[1.0, 0.0, 0.0])).unwrap();
    assert_eq!((lo, hi), (-1.0, 1.0));
    let b = ball(3, 2.5).unwrap();
    let mut rng = RngStream::new(35, 0);
    let d = uniform_sphere(3, &mut rng);
    let (lo, hi) = b.chord(&Vector::zeros(3), &d).unwrap();
    assert!((lo + 2.5).abs() < 1e-14 && (hi - 2.5).abs() < 1e-14);
    let (lo, hi) = cube(2).unwrap().chord(&v(&[0.5, 0.0]), &v(&[1.0, 0.0])).unwrap();
    assert!((lo + 1.5).abs() < 1e-15 && (hi - 0.5).abs() < 1e-15);
}

#[test]
fn chord_rejects_exterior_points_and_non_unit_directions() {
    let c = cube(2).unwrap();
    assert!(matches!(c.chord(&v(&[1.0, 0.0]), &v(&[1.0, 0.0])), Err(Error::NotInterior(_))));
    assert!(matches!(c.chord(&v(&[0.0, 0.0]), &v(&[2.0, 0.0])), Err(Error::InvalidArgument(_))));
}

#[test]
fn chord_endpoints_on_boundary() {
    let mut rng = RngStream::new(36, 0);
    for (name, body) in sample_bodies() {
        for _ in 0..50 {
            let x = uniform_sphere(3, &mut rng);
            let x = &x * (0.95 * rng.open01() / body.gauge(&x));
            let d = uniform_sphere(3, &mut rng);
            let (lo, hi) = body.chord(&x, &d).unwrap();
            assert!(lo < 0.0 && hi > 0.0, "{name}");
            for t in [lo, hi] {
                let g = body.gauge(&(&x + &d * t));
                assert!((g - 1.0).abs() < 1e-9, "{name}: gauge {g}");
            }
        }
    }
}

#[test]
fn gauge_homogeneity_and_convexity() {
    let mut rng = RngStream::new(37, 0);
    for (name, body) in sample_bodies() {
        assert_eq!(body.gauge(&Vector::zeros(3)), 0.0, "{name}");
        let count = if name.ends_with("_v") || name == "random_v" { 200 } else { 1000 };
        for _ in 0..count {
            let x = gaussian_vector(3, &mut rng);
            let y = gaussian_vector(3, &mut rng);
            let gx = body.gauge(&x);
            for lam in [0.0, 0.5, 2.0] {
                let err = (body.gauge(&(&x * lam)) - lam * gx).abs();
                assert!(err <= 1e-9 * (1.0 + gx), "{name}: homogeneity {err}");
            }
            let mid = body.gauge(&((&x + &y) * 0.5));
            assert!(mid <= 0.5 * (gx + body.gauge(&y)) + 1e-9, "{name}: convexity");
            let inside = body.contains(&(&x / (gx * 1.000001)));
            assert!(inside, "{name}");
        }
    }
}

#[test]
fn support_is_polar_gauge() {
    let mut rng = RngStream::new(38, 0);
    for (name, body) in sample_bodies() {
        let Ok(polar) = body.polar() else {
            assert_eq!(name, "off_center_ball");
            continue;
        };
        for _ in 0..100 {
            let th = gaussian_vector(3, &mut rng);
            let h = body.support(&th);
            let g = polar.gauge(&th);
            assert!((h - g).abs() < 1e-8 * (1.0 + h), "{name}: {h} vs {g}");
        }
    }
}

#[test]
fn double_polar_is_identity_on_gauges() {
    let mut rng = RngStream::new(39, 0);
    for (name, body) in sample_bodies() {
        let Ok(p) = body.polar() else { continue };
        let pp = p.polar().unwrap();
        for _ in 0..50 {
            let x = gaussian_vector(3, &mut rng);
            assert!((pp.gauge(&x) - body.gauge(&x)).abs() < 1e-8 * (1.0 + body.gauge(&x)), "{name}");
        }
    }
}

#[test]
fn polar_examples() {
    let b = ball(3, 2.0).unwrap().polar().unwrap();
    match b {
        Body::Ball(ref bb) => assert_eq!(bb.radius(), 0.5),
        _ => panic!("polar of ball should be a ball"),
    }
    let mut rng = RngStream::new(40, 0);
    let pc = cube_hrep(3).unwrap().polar().unwrap();
    let cross = cross_polytope_vrep(3).unwrap();
    for _ in 0..100 {
        let x = gaussian_vector(3, &mut rng);
        assert!((pc.gauge(&x) - cross.gauge(&x)).abs() < 1e-9);
    }
    // random V-polytope: gauge of the polar vs an LP over barycentric weights
    let p = random_vpoly(4, 12, &mut rng);
    let m = p.vertices.nrows();
    let body = Body::V(p.clone());
    let polar = body.polar().unwrap();
    let mut cons = Matrix::zeros(m + 2, m);
    let mut rhs = Vector::zeros(m + 2);
    for j in 0..m {
        cons[(j, j)] = -1.0;
        cons[(m, j)] = 1.0;
        cons[(m + 1, j)] = -1.0;
    }
    rhs[m] = 1.0;
    rhs[m + 1] = -1.0;
    for _ in 0..100 {
        let th = gaussian_vector(4, &mut rng);
        let via_lp = lp_solve(&(&p.vertices * &th), &cons, &rhs).unwrap().value;
        assert!((polar.gauge(&th) - via_lp).abs() < 1e-8 * (1.0 + via_lp.abs()));
    }
}

#[test]
fn radius_examples() {
    for n in [1, 3, 8] {
        let r = cube(n).unwrap().radius();
        assert!(r.certified && (r.value - (n as f64).sqrt()).abs() < 1e-14);
        let iso = cube(n).unwrap().scale(3f64.sqrt()).unwrap().radius().value;
        assert!((iso - (3.0 * n as f64).sqrt()).abs() < 1e-12);
        assert!(iso <= (n as f64 * (n as f64 + 2.0)).sqrt());
    }
    let r = ball(5, 1.7).unwrap().radius();
    assert!(r.certified && r.value == 1.7);
    let plain = cube_hrep(3).unwrap().radius();
    assert!(!plain.certified);
    assert!(plain.value <= 3f64.sqrt() + 1e-9 && plain.value > 1.5);
    let rp = cube(3).unwrap().radius_polar().unwrap();
    assert!(rp.certified && (rp.value - 1.0).abs() < 1e-15);
}

#[test]
fn inradius_examples() {
    for n in [2, 3, 6] {
        let nf = n as f64;
        let r = cube(n).unwrap().inradius();
        assert!(r.certified && (r.value - 1.0).abs() < 1e-14);
        let r = simplex(n).unwrap().inradius();
        assert!(r.certified && (r.value - 1.0 / nf).abs() < 1e-12);
        let r = cross_polytope(n).unwrap().inradius();
        assert!(r.certified && (r.value - 1.0 / nf.sqrt()).abs() < 1e-12);
        // facets are enumerated from the vertex list
        let listed = Body::V(VPolytope::new(simplex_unit_vertices(n)).unwrap()).inradius();
        assert!(listed.certified && (listed.value - 1.0 / nf).abs() < 1e-12);
        let sampled = simplex_vrep(n).unwrap().inradius();
        assert!(!sampled.certified && sampled.value >= 1.0 / nf - 1e-9);
    }
    let shifted = ball(3, 2.0).unwrap().translate(&v(&[0.5, 0.0, 0.0])).unwrap();
    assert!((shifted.inradius().value - 1.5).abs() < 1e-14);
    let ellipse = ball(2, 1.0).unwrap().linear_image(&Matrix::from_diagonal(&v(&[2.0, 3.0]))).unwrap();
    let r = ellipse.inradius();
    assert!(r.certified && (r.value - 2.0).abs() < 1e-12);
}

#[test]
fn linear_image_examples() {
    let b2 = ball(3, 1.0).unwrap().linear_image(&(Matrix::identity(3, 3) * 2.0)).unwrap();
    let reference = ball(3, 2.0).unwrap();
    let mut rng = RngStream::new(41, 0);
    for _ in 0..50 {
        let x = gaussian_vector(3, &mut rng);
        assert!((b2.gauge(&x) - reference.gauge(&x)).abs() < 1e-14);
    }

    let u = haar_orthogonal(4, &mut rng);
    let c = cube(4).unwrap();
    let uc = c.linear_image(&u).unwrap();
    for _ in 0..50 {
        let x = gaussian_vector(4, &mut rng);
        assert!((uc.gauge(&(&u * &x)) - c.gauge(&x)).abs() < 1e-12);
    }

    let t = gaussian_matrix(3, 3, &mut rng) + Matrix::identity(3, 3);
    let p = random_vpoly(3, 8, &mut rng);
    let img = Body::V(p.clone()).linear_image(&t).unwrap();
    let expected_vertices = &p.vertices * t.transpose();
    assert!((img.vertices().unwrap() - expected_vertices).amax() < 1e-12);
    let tinv = t.clone().try_inverse().unwrap();
    let base = Body::V(p);
    for _ in 0..50 {
        let x = gaussian_vector(3, &mut rng);
        let g = img.gauge(&x);
        assert!((g - base.gauge(&(&tinv * &x))).abs() < 1e-8 * (1.0 + g));
        let th = gaussian_vector(3, &mut rng);
        assert!((img.support(&th) - base.support(&(t.transpose() * &th))).abs() < 1e-10);
    }
}

#[test]
fn affine_gauge_pullback_is_consistent() {
    let mut rng = RngStream::new(42, 0);
    let t = gaussian_matrix(3, 3, &mut rng) + Matrix::identity(3, 3) * 2.0;
    let base = cube_hrep(3).unwrap();
    let img = base.linear_image(&t).unwrap();
    let Body::Affine(a) = &img else { panic!("expected affine body") };
    assert!((a.map() * a.inverse() - Matrix::identity(3, 3)).amax() < 1e-10);
    for _ in 0..100 {
        let x = gaussian_vector(3, &mut rng);
        assert!((img.gauge(&(&t * &x)) - base.gauge(&x)).abs() < 1e-10 * (1.0 + base.gauge(&x)));
    }
}

#[test]
fn singular_maps_are_rejected() {
    let mut t = Matrix::identity(3, 3);
    t[(2, 2)] = 1e-14;
    assert!(matches!(cube(3).unwrap().linear_image(&t), Err(Error::Singular(_))));
}

#[test]
fn constructor_examples() {
    let s = simplex(2).unwrap().vertices().unwrap();
    assert_eq!(s.nrows(), 3);
    let d01 = (s.row(0) - s.row(1)).norm();
    let d02 = (s.row(0) - s.row(2)).norm();
    let d12 = (s.row(1) - s.row(2)).norm();
    assert!((d01 - d02).abs() < 1e-14 && (d01 - d12).abs() < 1e-14);
    assert!(s.row_sum().amax() < 1e-14);
    for n in 1..=10 {
        let verts = simplex_unit_vertices(n);
        assert_eq!(verts.nrows(), n + 1);
        let gram = &verts * verts.transpose();
        for i in 0..=n {
            for j in 0..=n {
                let want = if i == j { 1.0 } else { -1.0 / n as f64 };
                assert!((gram[(i, j)] - want).abs() < 1e-13);
            }
        }
    }
    let mut rng = RngStream::new(43, 0);
    let pc = cube(3).unwrap().polar().unwrap();
    let cross = cross_polytope(3).unwrap();
    for _ in 0..100 {
        let x = gaussian_vector(3, &mut rng);
        assert!((pc.gauge(&x) - cross.gauge(&x)).abs() < 1e-12);
    }
    assert!(cube(0).is_err() && named("dodecahedron", 3).is_err());
}

#[test]
fn h_and_v_representations_agree() {
    let mut rng = RngStream::new(44, 0);
    for n in [2, 3, 4] {
        let pairs = [
            (cube_hrep(n).unwrap(), cube_vrep(n).unwrap()),
            (cross_polytope_hrep(n).unwrap(), cross_polytope_vrep(n).unwrap()),
            (simplex_hrep(n).unwrap(), simplex_vrep(n).unwrap()),
        ];
        for (h, vb) in &pairs {
            for _ in 0..1000 {
                let x = gaussian_vector(n, &mut rng);
                assert!((h.gauge(&x) - vb.gauge(&x)).abs() <= 1e-8);
                assert!((h.support(&x) - vb.support(&x)).abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn invalid_bodies_are_rejected() {
    let a = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
    assert!(matches!(HPolytope::new(a.clone(), v(&[1.0, 1.0])), Err(Error::InvalidBody(_))));
    assert!(matches!(HPolytope::new(a, v(&[1.0, -1.0])), Err(Error::InvalidBody(_))));
    let off = Matrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 1.0, 1.0, 2.0]);
    assert!(matches!(VPolytope::new(off), Err(Error::InvalidBody(_))));
    assert!(ball(2, -1.0).is_err());
}

#[test]
fn translate_rebases_origin() {
    let c = cube_hrep(2).unwrap();
    let shifted = c.translate(&v(&[0.5, 0.0])).unwrap();
    // K + y is [-0.5, 1.5] × [-1, 1]
    assert!((shifted.gauge(&v(&[1.5, 0.0])) - 1.0).abs() < 1e-15);
    assert!((shifted.gauge(&v(&[-0.5, 0.0])) - 1.0).abs() < 1e-15);
    assert!(c.translate(&v(&[1.5, 0.0])).is_err());

    let b = ball(1, 1.0).unwrap().translate(&v(&[0.5])).unwrap();
    assert!((b.gauge(&v(&[1.5])) - 1.0).abs() < 1e-15);
    assert!((b.gauge(&v(&[-0.5])) - 1.0).abs() < 1e-15);
    assert!((b.support(&v(&[1.0])) - 1.5).abs() < 1e-15);
}

#[test]
fn literal_round_trip() {
    let spec = BodySpec::parse(r#"{"type":"hpoly","A":[[1,0],[-1,0],[0,1],[0,-1]],"b":[1,1,1,1]}"#).unwrap();
    let body = spec.build(None).unwrap();
    assert_eq!(body.gauge(&v(&[0.5, -2.0])), 2.0);
    let spec = BodySpec::parse(r#"{"type":"vpoly","vertices":[[1,0],[0,1],[-1,-1]]}"#).unwrap();
    assert_eq!(spec.build(None).unwrap().vertex_count(), Some(3));
    let spec: BodySpec = r#"{"type":"ball","r":2.0}"#.parse().unwrap();
    assert!(spec.build(None).is_err());
    assert_eq!(spec.build(Some(3)).unwrap().dim(), 3);
    let spec = BodySpec::parse(r#"{"type":"named","name":"cube","n":4}"#).unwrap();
    assert_eq!(spec.build(None).unwrap().dim(), 4);
    assert!(BodySpec::parse(r#"{"type":"named","name":"cube","n":4,"extra":1}"#).is_err());
    let text = serde_json::to_string(&spec).unwrap();
    assert_eq!(BodySpec::parse(&text).unwrap(), spec);
}

#[test]
fn vertex_only_chord_matches_facets() {
    let mut rng = RngStream::new(38, 0);
    for n in [2, 3, 5] {
        for full in [cube_vrep(n).unwrap(), simplex_vrep(n).unwrap(), cross_polytope_vrep(n).unwrap()] {
            let Body::V(p) = &full else { panic!("expected a V-polytope") };
            let bare = Body::V(p.plain());
            for _ in 0..20 {
                let x = uniform_sphere(n, &mut rng);
                let x = &x * (0.9 * rng.open01() / full.gauge(&x));
                let d = uniform_sphere(n, &mut rng);
                let (a, b) = full.chord(&x, &d).unwrap();
                let (c, e) = bare.chord(&x, &d).unwrap();
                assert!((a - c).abs() < 1e-9 && (b - e).abs() < 1e-9, "n={n}: ({a}, {b}) vs ({c}, {e})");
            }
        }
    }
}

#[test]
fn facets_enumerated_from_vertices() {
    let tri = VPolytope::new(Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, -1.0, -1.0])).unwrap();
    let (a, b) = tri.known_facets().unwrap();
    assert_eq!(a.nrows(), 3);
    // x + y ≤ 1 is one of them
    assert!((0..3).any(|i| (a[(i, 0)] / b[i] - 1.0).abs() < 1e-12 && (a[(i, 1)] / b[i] - 1.0).abs() < 1e-12));
    // a non-simplicial facet (cube) is listed once
    let Body::V(p) = cube_vrep(3).unwrap() else { panic!("expected a V-polytope") };
    let c = VPolytope::new(p.vertices().clone()).unwrap();
    assert_eq!(c.known_facets().unwrap().0.nrows(), 6);
}
