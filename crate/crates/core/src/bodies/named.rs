//! Standard bodies: cube, cross-polytope, regular simplex and ball, all with
//! barycenter at the origin.
//!
//! The plain constructors carry both representations (where the size allows)
//! plus the coordinate shape, so gauges and supports take the cheapest exact
//! route. The `_hrep` / `_vrep` variants carry a single bare representation.

use super::{Ball, Body, HPolytope, Shape, VPolytope};
use crate::error::{Error, Result};
use crate::numkit::{Matrix, Vector};

/// Largest dimension for which `2ⁿ` companion lists are materialized.
const MAX_EXPONENTIAL_DIM: usize = 16;

pub const NAMED_BODIES: &[&str] = &["cube", "crosspoly", "simplex", "ball"];

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    Ok(())
}

fn check_exponential(n: usize) -> Result<()> {
    check_dim(n)?;
    if n > 20 {
        return Err(Error::invalid(format!("2^{n} rows is too many to materialize")));
    }
    Ok(())
}

fn box_facets(n: usize) -> (Matrix, Vector) {
    let mut a = Matrix::zeros(2 * n, n);
    for i in 0..n {
        a[(2 * i, i)] = 1.0;
        a[(2 * i + 1, i)] = -1.0;
    }
    (a, Vector::from_element(2 * n, 1.0))
}

/// All `2ⁿ` sign vectors, one per row.
fn sign_rows(n: usize) -> Matrix {
    let m = 1usize << n;
    Matrix::from_fn(m, n, |r, c| if (r >> c) & 1 == 1 { -1.0 } else { 1.0 })
}

fn cross_vertices(n: usize) -> Matrix {
    box_facets(n).0
}

/// `[-1, 1]ⁿ`.
pub fn cube(n: usize) -> Result<Body> {
    check_dim(n)?;
    let (a, b) = box_facets(n);
    let vertices = (n <= MAX_EXPONENTIAL_DIM).then(|| sign_rows(n));
    Ok(Body::H(HPolytope::from_parts_unchecked(a, b, vertices, Shape::Cube { half_side: 1.0 })))
}

pub fn cube_hrep(n: usize) -> Result<Body> {
    check_dim(n)?;
    let (a, b) = box_facets(n);
    Ok(Body::H(HPolytope::new(a, b)?))
}

pub fn cube_vrep(n: usize) -> Result<Body> {
    check_exponential(n)?;
    Ok(Body::V(VPolytope::new(sign_rows(n))?.plain()))
}

/// `conv(±eᵢ)`, the unit ℓ¹ ball.
pub fn cross_polytope(n: usize) -> Result<Body> {
    check_dim(n)?;
    let facets = (n <= MAX_EXPONENTIAL_DIM).then(|| {
        let a = sign_rows(n);
        let m = a.nrows();
        (a, Vector::from_element(m, 1.0))
    });
    Ok(Body::V(VPolytope::from_parts_unchecked(cross_vertices(n), facets, Shape::CrossPolytope { radius: 1.0 })))
}

pub fn cross_polytope_hrep(n: usize) -> Result<Body> {
    check_exponential(n)?;
    let a = sign_rows(n);
    let m = a.nrows();
    Ok(Body::H(HPolytope::new(a, Vector::from_element(m, 1.0))?))
}

pub fn cross_polytope_vrep(n: usize) -> Result<Body> {
    check_dim(n)?;
    Ok(Body::V(VPolytope::new(cross_vertices(n))?.plain()))
}

/// Vertices of the regular simplex inscribed in the unit sphere, centered at
/// the origin (pairwise inner products `−1/n`).
pub fn simplex_unit_vertices(n: usize) -> Matrix {
    let nf = n as f64;
    let diag = (1.0 + 1.0 / nf).sqrt();
    let shift = ((nf + 1.0).sqrt() + 1.0) / nf.powf(1.5);
    Matrix::from_fn(n + 1, n, |r, c| {
        if r == n {
            1.0 / nf.sqrt()
        } else if r == c {
            diag - shift
        } else {
            -shift
        }
    })
}

fn simplex_facets(n: usize) -> (Matrix, Vector) {
    // The facet opposite vⱼ is {x : −vⱼ·x ≤ 1/n}.
    (-simplex_unit_vertices(n), Vector::from_element(n + 1, 1.0 / n as f64))
}

/// Regular simplex with circumradius 1 and barycenter at the origin.
pub fn simplex(n: usize) -> Result<Body> {
    check_dim(n)?;
    Ok(Body::V(VPolytope::from_parts_unchecked(simplex_unit_vertices(n), Some(simplex_facets(n)), Shape::Generic)))
}

pub fn simplex_hrep(n: usize) -> Result<Body> {
    check_dim(n)?;
    let (a, b) = simplex_facets(n);
    Ok(Body::H(HPolytope::new(a, b)?))
}

pub fn simplex_vrep(n: usize) -> Result<Body> {
    check_dim(n)?;
    Ok(Body::V(VPolytope::new(simplex_unit_vertices(n))?.plain()))
}

pub fn ball(n: usize, r: f64) -> Result<Body> {
    Ok(Body::Ball(Ball::new(n, r)?))
}

/// Looks up a standard body by name (`cube`, `crosspoly`, `simplex`, `ball`).
pub fn named(name: &str, n: usize) -> Result<Body> {
    match name {
        "cube" => cube(n),
        "crosspoly" | "cross-polytope" | "cross_polytope" | "cross" => cross_polytope(n),
        "simplex" => simplex(n),
        "ball" => ball(n, 1.0),
        other => Err(Error::invalid(format!("unknown body name '{other}'"))),
    }
}
