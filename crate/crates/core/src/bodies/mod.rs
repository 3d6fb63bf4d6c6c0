//! Convex bodies with the origin in their interior: gauge, support,
//! membership, chords, polars and linear images.

mod affine;
mod ball;
mod literal;
mod named;
mod polytope;

pub use affine::{checked_inverse, condition_number, AffineBody};
pub use ball::Ball;
pub use literal::BodySpec;
pub use named::{
    ball, cross_polytope, cross_polytope_hrep, cross_polytope_vrep, cube, cube_hrep, cube_vrep, named, simplex,
    simplex_hrep, simplex_vrep, simplex_unit_vertices, NAMED_BODIES,
};
pub use polytope::{HPolytope, Shape, VPolytope};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{operator_norm, uniform_sphere, Matrix, RngStream, Vector};

/// Membership slack: `x ∈ K` iff `gauge(x) ≤ 1 + MEMBERSHIP_TOL`.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
const BISECTION_TOL: f64 = 1e-10;
const BISECTION_MAX_ITERS: usize = 200;
const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "repr", rename_all = "lowercase")]
pub enum Body {
    H(HPolytope),
    V(VPolytope),
    Ball(Ball),
    Affine(AffineBody),
}

/// Circumradius `max_{x∈K} |x|`. `certified` is false when the value is only
/// a lower bound from sampled directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusBound {
    pub value: f64,
    pub certified: bool,
}

impl From<HPolytope> for Body {
    fn from(p: HPolytope) -> Self {
        Body::H(p)
    }
}

impl From<VPolytope> for Body {
    fn from(p: VPolytope) -> Self {
        Body::V(p)
    }
}

impl From<Ball> for Body {
    fn from(b: Ball) -> Self {
        Body::Ball(b)
    }
}

impl From<AffineBody> for Body {
    fn from(b: AffineBody) -> Self {
        Body::Affine(b)
    }
}

impl Body {
    pub fn dim(&self) -> usize {
        match self {
            Body::H(p) => p.dim(),
            Body::V(p) => p.dim(),
            Body::Ball(b) => b.dim(),
            Body::Affine(a) => a.map.nrows(),
        }
    }

    fn check_dim(&self, x: &Vector) {
        assert_eq!(x.len(), self.dim(), "point dimension does not match body dimension");
    }

    /// Minkowski functional `inf{λ ≥ 0 : x ∈ λK}`.
    pub fn gauge(&self, x: &Vector) -> f64 {
        self.check_dim(x);
        match self {
            Body::H(p) => p.gauge(x),
            Body::V(p) => p.gauge(x),
            Body::Ball(b) => b.gauge(x),
            Body::Affine(a) => a.gauge(x),
        }
    }

    /// Support function `h_K(θ) = max_{x∈K} x·θ`.
    pub fn support(&self, theta: &Vector) -> f64 {
        self.check_dim(theta);
        match self {
            Body::H(p) => p.support(theta),
            Body::V(p) => p.support(theta),
            Body::Ball(b) => b.support(theta),
            Body::Affine(a) => a.support(theta),
        }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        self.gauge(x) <= 1.0 + MEMBERSHIP_TOL
    }

    /// Interval `[t⁻, t⁺]` with `x + t·d ∈ K` exactly for `t` in it.
    /// `x` must be strictly interior and `d` a unit vector.
    pub fn chord(&self, x: &Vector, d: &Vector) -> Result<(f64, f64)> {
        self.check_dim(x);
        self.check_dim(d);
        if (d.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::invalid("chord direction must be a unit vector"));
        }
        let g = self.gauge(x);
        if !(g < 1.0) {
            return Err(Error::NotInterior(g));
        }
        Ok(self.chord_raw(x, d))
    }

    /// Chord for any nonzero `d`, without checks.
    pub(crate) fn chord_raw(&self, x: &Vector, d: &Vector) -> (f64, f64) {
        match self {
            Body::H(p) => p.chord_raw(x, d),
            Body::V(p) => p.chord_raw(x, d).unwrap_or_else(|| self.bisect_chord(x, d)),
            Body::Ball(b) => b.chord_raw(x, d),
            Body::Affine(a) => a.chord_raw(x, d),
        }
    }

    /// Bisection on the convex map `t ↦ gauge(x + t d)` in both directions.
    fn bisect_chord(&self, x: &Vector, d: &Vector) -> (f64, f64) {
        let exit = |sign: f64| -> f64 {
            let dir = d * sign;
            let at = |t: f64| self.gauge(&(x + &dir * t));
            let mut hi = 1.0 / dir.norm();
            let mut iters = 0;
            while at(hi) < 1.0 && iters < BISECTION_MAX_ITERS {
                hi *= 2.0;
                iters += 1;
            }
            let mut lo = 0.0;
            for _ in 0..BISECTION_MAX_ITERS {
                if hi - lo <= BISECTION_TOL * 1e-2 * (1.0 + hi) {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if at(mid) < 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        (-exit(-1.0), exit(1.0))
    }

    /// Known coordinate structure (`Generic` for balls and linear images).
    pub fn shape(&self) -> Shape {
        match self {
            Body::H(p) => p.shape,
            Body::V(p) => p.shape,
            _ => Shape::Generic,
        }
    }

    /// Vertex list (one vertex per row) when the body is a polytope whose
    /// vertices are known.
    pub fn vertices(&self) -> Option<Matrix> {
        match self {
            Body::H(p) => p.vertices.clone(),
            Body::V(p) => Some(p.vertices.clone()),
            Body::Ball(_) => None,
            Body::Affine(a) => a.base.vertices().map(|v| v * a.map.transpose()),
        }
    }

    /// Facet description `(A, b)` of `{x : A x ≤ b}` when known.
    pub fn facets(&self) -> Option<(Matrix, Vector)> {
        match self {
            Body::H(p) => Some((p.a.clone(), p.b.clone())),
            Body::V(p) => p.facets.clone(),
            Body::Ball(_) => None,
            Body::Affine(a) => a.base.facets().map(|(f, b)| (f * &a.inverse, b)),
        }
    }

    pub fn vertex_count(&self) -> Option<usize> {
        match self {
            Body::H(p) => p.vertices.as_ref().map(|v| v.nrows()),
            Body::V(p) => Some(p.vertices.nrows()),
            Body::Ball(_) => None,
            Body::Affine(a) => a.base.vertex_count(),
        }
    }

    pub fn facet_count(&self) -> Option<usize> {
        match self {
            Body::H(p) => Some(p.b.len()),
            Body::V(p) => p.facets.as_ref().map(|f| f.1.len()),
            Body::Ball(_) => None,
            Body::Affine(a) => a.base.facet_count(),
        }
    }

    /// Polar body `{y : x·y ≤ 1 ∀x ∈ K}`.
    pub fn polar(&self) -> Result<Body> {
        match self {
            Body::V(p) => {
                let ones = Vector::from_element(p.vertices.nrows(), 1.0);
                let verts = p.facets.as_ref().map(|(a, b)| normalized_rows(a, b));
                Ok(Body::H(HPolytope::from_parts_unchecked(p.vertices.clone(), ones, verts, p.shape.polar())))
            }
            Body::H(p) => {
                let verts = normalized_rows(&p.a, &p.b);
                let facets = p.vertices.as_ref().map(|v| (v.clone(), Vector::from_element(v.nrows(), 1.0)));
                Ok(Body::V(VPolytope::from_parts_unchecked(verts, facets, p.shape.polar())))
            }
            Body::Ball(b) => {
                if !b.is_centered() {
                    return Err(Error::Unsupported("polar of an off-center ball".into()));
                }
                Ok(Body::Ball(Ball { radius: 1.0 / b.radius, center: b.center.clone() }))
            }
            Body::Affine(a) => {
                // (T K)° = T⁻ᵀ K°
                let base = a.base.polar()?;
                Ok(Body::Affine(AffineBody { base: Box::new(base), map: a.inverse.transpose(), inverse: a.map.transpose() }))
            }
        }
    }

    /// Circumradius `R(K) = max_{x∈K} |x|`.
    pub fn radius(&self) -> RadiusBound {
        if let Some(v) = self.vertices() {
            let r = v.row_iter().map(|row| row.norm()).fold(0.0, f64::max);
            return RadiusBound { value: r, certified: true };
        }
        match self {
            Body::Ball(b) => RadiusBound { value: b.radius + b.center.norm(), certified: true },
            Body::Affine(a) => match a.base.as_ref() {
                Body::Ball(b) if b.is_centered() => {
                    RadiusBound { value: b.radius * operator_norm(&a.map), certified: true }
                }
                _ => self.sampled_radius(),
            },
            _ => self.sampled_radius(),
        }
    }

    /// Lower bound on the circumradius from `64·n` fixed pseudo-random
    /// directions: the norm of each support maximizer (H-polytopes) or the
    /// support value itself.
    fn sampled_radius(&self) -> RadiusBound {
        let n = self.dim();
        let mut rng = RngStream::new(0x005E_ED0F_4AD1, n as u64);
        let mut best: f64 = 0.0;
        for _ in 0..64 * n {
            let theta = uniform_sphere(n, &mut rng);
            let val = match self {
                Body::H(p) => p.support_point(&theta).map(|x| x.norm()).unwrap_or(f64::INFINITY),
                _ => self.support(&theta),
            };
            best = best.max(val);
        }
        RadiusBound { value: best, certified: false }
    }

    /// Inradius about the origin, `min_{|θ|=1} h_K(θ)`: exact from facets or
    /// for (images of) centered balls, otherwise an upper bound from `64·n`
    /// fixed directions with `certified = false`.
    pub fn inradius(&self) -> RadiusBound {
        if let Some((a, b)) = self.facets() {
            let r = a.row_iter().zip(b.iter()).map(|(row, &bi)| bi / row.norm()).fold(f64::INFINITY, f64::min);
            return RadiusBound { value: r, certified: true };
        }
        match self {
            Body::Ball(b) => RadiusBound { value: b.radius - b.center.norm(), certified: true },
            Body::Affine(a) if matches!(a.base.as_ref(), Body::Ball(b) if b.is_centered()) => {
                let r = match a.base.as_ref() {
                    Body::Ball(b) => b.radius,
                    _ => unreachable!(),
                };
                RadiusBound { value: r / operator_norm(&a.inverse), certified: true }
            }
            _ => {
                let n = self.dim();
                let mut rng = RngStream::new(0x005E_ED0F_4AD1, n as u64);
                let r = (0..64 * n).map(|_| self.support(&uniform_sphere(n, &mut rng))).fold(f64::INFINITY, f64::min);
                RadiusBound { value: r, certified: false }
            }
        }
    }

    /// Circumradius of the polar body, `R(K°)`: the reciprocal inradius.
    pub fn radius_polar(&self) -> Result<RadiusBound> {
        Ok(self.polar()?.radius())
    }

    /// `T(K)`. Rejects maps with condition number above `1e12`.
    pub fn linear_image(&self, t: &Matrix) -> Result<Body> {
        let n = self.dim();
        if t.nrows() != n || t.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: t.nrows() });
        }
        let inverse = checked_inverse(t)?;
        if let Some(s) = scalar_multiple(t) {
            if s > 0.0 {
                return self.scale(s);
            }
        }
        match self {
            Body::V(p) => {
                let vertices = &p.vertices * t.transpose();
                let facets = p.facets.as_ref().map(|(a, b)| (a * &inverse, b.clone()));
                Ok(Body::V(VPolytope::from_parts_unchecked(vertices, facets, Shape::Generic)))
            }
            Body::Affine(a) => {
                let map = t * &a.map;
                let inv = &a.inverse * &inverse;
                Ok(Body::Affine(AffineBody { base: a.base.clone(), map, inverse: inv }))
            }
            _ => Ok(Body::Affine(AffineBody { base: Box::new(self.clone()), map: t.clone(), inverse })),
        }
    }

    /// Dilation `sK` for `s > 0`; keeps coordinate shapes intact.
    pub fn scale(&self, s: f64) -> Result<Body> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::invalid("scale factor must be positive"));
        }
        Ok(match self {
            Body::H(p) => Body::H(HPolytope::from_parts_unchecked(
                p.a.clone(),
                &p.b * s,
                p.vertices.as_ref().map(|v| v * s),
                p.shape.scaled(s),
            )),
            Body::V(p) => Body::V(VPolytope::from_parts_unchecked(
                &p.vertices * s,
                p.facets.as_ref().map(|(a, b)| (a.clone(), b * s)),
                p.shape.scaled(s),
            )),
            Body::Ball(b) => Body::Ball(Ball { radius: b.radius * s, center: &b.center * s }),
            Body::Affine(a) => {
                Body::Affine(AffineBody { base: a.base.clone(), map: &a.map * s, inverse: &a.inverse / s })
            }
        })
    }

    /// The translate `K + y`, re-based so the origin stays at the same place in
    /// space. Fails when the origin would leave the interior.
    pub fn translate(&self, y: &Vector) -> Result<Body> {
        self.check_dim(y);
        match self {
            Body::H(p) => {
                // a(x − y) ≤ b  ⇔  a x ≤ b + a y
                let b = &p.b + &p.a * y;
                if let Some(i) = b.iter().position(|&bi| bi <= 0.0) {
                    return Err(Error::NotInterior(1.0 - b[i]));
                }
                let vertices = p.vertices.as_ref().map(|v| shift_rows(v, y));
                Ok(Body::H(HPolytope::from_parts_unchecked(p.a.clone(), b, vertices, Shape::Generic)))
            }
            Body::V(p) => {
                let vertices = shift_rows(&p.vertices, y);
                let facets = match &p.facets {
                    Some((a, b)) => {
                        let nb = b + a * y;
                        if let Some(i) = nb.iter().position(|&bi| bi <= 0.0) {
                            return Err(Error::NotInterior(1.0 - nb[i]));
                        }
                        Some((a.clone(), nb))
                    }
                    None => None,
                };
                let out = VPolytope::from_parts_unchecked(vertices, facets, Shape::Generic);
                if out.facets.is_none() {
                    VPolytope::new(out.vertices.clone())?;
                }
                Ok(Body::V(out))
            }
            Body::Ball(b) => Ok(Body::Ball(b.translated(y)?)),
            Body::Affine(a) => {
                // T K + y = T (K + T⁻¹ y)
                let base = a.base.translate(&(&a.inverse * y))?;
                Ok(Body::Affine(AffineBody { base: Box::new(base), map: a.map.clone(), inverse: a.inverse.clone() }))
            }
        }
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        match self {
            Body::H(p) => format!("hpoly(n={}, m={})", p.dim(), p.b.len()),
            Body::V(p) => format!("vpoly(n={}, m={})", p.dim(), p.vertices.nrows()),
            Body::Ball(b) => format!("ball(n={}, r={})", b.dim(), b.radius),
            Body::Affine(a) => format!("linear image of {}", a.base.describe()),
        }
    }
}

fn normalized_rows(a: &Matrix, b: &Vector) -> Matrix {
    let mut out = a.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row /= b[i];
    }
    out
}

fn shift_rows(v: &Matrix, y: &Vector) -> Matrix {
    let mut out = v.clone();
    for mut row in out.row_iter_mut() {
        row += y.transpose();
    }
    out
}

fn scalar_multiple(t: &Matrix) -> Option<f64> {
    let s = t[(0, 0)];
    let n = t.nrows();
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { s } else { 0.0 };
            if t[(i, j)] != want {
                return None;
            }
        }
    }
    Some(s)
}

#[cfg(test)]
mod tests;
