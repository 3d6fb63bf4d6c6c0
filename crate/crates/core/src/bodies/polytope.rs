use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{lp_solve, unit_vector, Matrix, Vector};

/// Coordinate structure a polytope is known to have, enabling closed-form
/// gauges, supports and chords that avoid touching facet or vertex lists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Generic,
    /// `[-h, h]ⁿ`
    Cube { half_side: f64 },
    /// `{x : Σ|xᵢ| ≤ r}`
    CrossPolytope { radius: f64 },
}

impl Shape {
    pub(crate) fn scaled(self, s: f64) -> Shape {
        match self {
            Shape::Generic => Shape::Generic,
            Shape::Cube { half_side } => Shape::Cube { half_side: half_side * s },
            Shape::CrossPolytope { radius } => Shape::CrossPolytope { radius: radius * s },
        }
    }

    pub(crate) fn polar(self) -> Shape {
        match self {
            Shape::Generic => Shape::Generic,
            Shape::Cube { half_side } => Shape::CrossPolytope { radius: 1.0 / half_side },
            Shape::CrossPolytope { radius } => Shape::Cube { half_side: 1.0 / radius },
        }
    }

    pub(crate) fn gauge(self, x: &Vector) -> Option<f64> {
        match self {
            Shape::Generic => None,
            Shape::Cube { half_side } => Some(x.amax() / half_side),
            Shape::CrossPolytope { radius } => Some(x.lp_norm(1) / radius),
        }
    }

    pub(crate) fn support(self, theta: &Vector) -> Option<f64> {
        match self {
            Shape::Generic => None,
            Shape::Cube { half_side } => Some(theta.lp_norm(1) * half_side),
            Shape::CrossPolytope { radius } => Some(theta.amax() * radius),
        }
    }

    pub(crate) fn chord(self, x: &Vector, d: &Vector) -> Option<(f64, f64)> {
        match self {
            Shape::Generic => None,
            Shape::Cube { half_side } => {
                let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                for (xi, di) in x.iter().zip(d.iter()) {
                    if *di > 0.0 {
                        hi = hi.min((half_side - xi) / di);
                        lo = lo.max((-half_side - xi) / di);
                    } else if *di < 0.0 {
                        hi = hi.min((-half_side - xi) / di);
                        lo = lo.max((half_side - xi) / di);
                    }
                }
                Some((lo, hi))
            }
            Shape::CrossPolytope { radius } => {
                let hi = l1_exit(x, d, radius, 1.0);
                let lo = -l1_exit(x, d, radius, -1.0);
                Some((lo, hi))
            }
        }
    }
}

/// Smallest `t > 0` with `|x + t·sign·d|₁ = r`, walking the breakpoints of
/// the piecewise-linear map.
fn l1_exit(x: &Vector, d: &Vector, r: f64, sign: f64) -> f64 {
    let mut value = x.lp_norm(1);
    let mut slope = 0.0;
    let mut breaks: Vec<(f64, f64)> = Vec::new();
    for (&xi, &di) in x.iter().zip(d.iter()) {
        let di = sign * di;
        if di == 0.0 {
            continue;
        }
        if xi * di >= 0.0 {
            slope += di.abs();
        } else {
            slope -= di.abs();
            breaks.push((-xi / di, 2.0 * di.abs()));
        }
    }
    breaks.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut t = 0.0;
    for (tb, jump) in breaks {
        let at_break = value + slope * (tb - t);
        if at_break >= r && slope > 0.0 {
            return t + (r - value) / slope;
        }
        value = at_break;
        t = tb;
        slope += jump;
    }
    t + (r - value) / slope
}

/// Facet description `{x : a x ≤ b}` with `b > 0`, so the origin is interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HPolytope {
    pub(crate) a: Matrix,
    pub(crate) b: Vector,
    pub(crate) vertices: Option<Matrix>,
    pub(crate) shape: Shape,
}

/// Vertex description `conv(v₁, …, v_m)` (one vertex per row) with the
/// origin strictly inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VPolytope {
    pub(crate) vertices: Matrix,
    pub(crate) facets: Option<(Matrix, Vector)>,
    pub(crate) shape: Shape,
}

fn check_bounded_polar(rows: &Matrix, rhs: &Vector) -> Result<()> {
    // {y : rows·y ≤ rhs} must be bounded in every coordinate direction.
    let n = rows.ncols();
    for i in 0..n {
        for s in [1.0, -1.0] {
            match lp_solve(&(unit_vector(n, i) * s), rows, rhs) {
                Ok(_) => {}
                Err(Error::Unbounded) => return Err(Error::InvalidBody("unbounded polyhedron".into())),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(())
}

impl HPolytope {
    /// Validates `b > 0` and boundedness.
    pub fn new(a: Matrix, b: Vector) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), got: b.len() });
        }
        if a.iter().chain(b.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("hpolytope"));
        }
        if b.iter().any(|&bi| bi <= 0.0) {
            return Err(Error::InvalidBody("offsets must be positive (origin interior)".into()));
        }
        check_bounded_polar(&a, &b)?;
        Ok(HPolytope { a, b, vertices: None, shape: Shape::Generic })
    }

    pub(crate) fn from_parts_unchecked(a: Matrix, b: Vector, vertices: Option<Matrix>, shape: Shape) -> Self {
        HPolytope { a, b, vertices, shape }
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn constraints(&self) -> (&Matrix, &Vector) {
        (&self.a, &self.b)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn known_vertices(&self) -> Option<&Matrix> {
        self.vertices.as_ref()
    }

    /// Drops the vertex companion list and coordinate shape.
    pub fn plain(&self) -> Self {
        HPolytope { a: self.a.clone(), b: self.b.clone(), vertices: None, shape: Shape::Generic }
    }

    pub fn gauge(&self, x: &Vector) -> f64 {
        if let Some(g) = self.shape.gauge(x) {
            return g;
        }
        facet_gauge(&self.a, &self.b, x)
    }

    pub fn support(&self, theta: &Vector) -> f64 {
        if let Some(h) = self.shape.support(theta) {
            return h;
        }
        if let Some(v) = &self.vertices {
            return vertex_support(v, theta);
        }
        match lp_solve(theta, &self.a, &self.b) {
            Ok(sol) => sol.value,
            Err(_) => f64::INFINITY,
        }
    }

    /// Maximizer of `θ·x`, used for radius lower bounds.
    pub(crate) fn support_point(&self, theta: &Vector) -> Option<Vector> {
        lp_solve(theta, &self.a, &self.b).ok().map(|s| s.x)
    }

    pub(crate) fn chord_raw(&self, x: &Vector, d: &Vector) -> (f64, f64) {
        if let Some(c) = self.shape.chord(x, d) {
            return c;
        }
        facet_chord(&self.a, &self.b, x, d)
    }
}

impl VPolytope {
    /// Validates that the origin lies strictly inside the hull.
    pub fn new(vertices: Matrix) -> Result<Self> {
        if vertices.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("vpolytope"));
        }
        if vertices.nrows() <= vertices.ncols() {
            return Err(Error::InvalidBody("need at least n+1 vertices".into()));
        }
        let ones = Vector::from_element(vertices.nrows(), 1.0);
        check_bounded_polar(&vertices, &ones)
            .map_err(|_| Error::InvalidBody("origin is not strictly inside the vertex hull".into()))?;
        let facets = enumerate_facets(&vertices);
        Ok(VPolytope { vertices, facets, shape: Shape::Generic })
    }

    pub(crate) fn from_parts_unchecked(vertices: Matrix, facets: Option<(Matrix, Vector)>, shape: Shape) -> Self {
        VPolytope { vertices, facets, shape }
    }

    pub fn dim(&self) -> usize {
        self.vertices.ncols()
    }

    pub fn vertices(&self) -> &Matrix {
        &self.vertices
    }

    pub fn known_facets(&self) -> Option<&(Matrix, Vector)> {
        self.facets.as_ref()
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn plain(&self) -> Self {
        VPolytope { vertices: self.vertices.clone(), facets: None, shape: Shape::Generic }
    }

    /// Gauge as the support of the polar: `max{x·y : vⱼ·y ≤ 1}`.
    pub fn gauge(&self, x: &Vector) -> f64 {
        if let Some(g) = self.shape.gauge(x) {
            return g;
        }
        if let Some((a, b)) = &self.facets {
            return facet_gauge(a, b, x);
        }
        if x.iter().all(|&v| v == 0.0) {
            return 0.0;
        }
        let ones = Vector::from_element(self.vertices.nrows(), 1.0);
        match lp_solve(x, &self.vertices, &ones) {
            Ok(sol) => sol.value.max(0.0),
            Err(_) => f64::INFINITY,
        }
    }

    pub fn support(&self, theta: &Vector) -> f64 {
        if let Some(h) = self.shape.support(theta) {
            return h;
        }
        vertex_support(&self.vertices, theta)
    }

    pub(crate) fn chord_raw(&self, x: &Vector, d: &Vector) -> Option<(f64, f64)> {
        if let Some(c) = self.shape.chord(x, d) {
            return Some(c);
        }
        match &self.facets {
            Some((a, b)) => Some(facet_chord(a, b, x, d)),
            None => vertex_chord(&self.vertices, x, d),
        }
    }
}

/// Subsets of `n` vertices tried before giving up on listing facets.
const MAX_FACET_SUBSETS: usize = 20_000;

/// Facets `a·x ≤ 1` of `conv(V)` (origin inside), by testing the hyperplane
/// through every `n`-subset of vertices. `None` when there are too many
/// subsets.
fn enumerate_facets(v: &Matrix) -> Option<(Matrix, Vector)> {
    let (m, n) = v.shape();
    let mut subsets = 1usize;
    for k in 0..n {
        subsets = subsets.checked_mul(m - k)? / (k + 1);
        if subsets > MAX_FACET_SUBSETS {
            return None;
        }
    }
    let scale = v.amax();
    let mut normals: Vec<Vector> = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let sub = Matrix::from_fn(n, n, |r, c| v[(idx[r], c)]);
        if let Some(a) = sub.lu().solve(&Vector::from_element(n, 1.0)) {
            let tol = 1e-9 * (1.0 + a.norm() * scale);
            let supporting = a.iter().all(|x| x.is_finite()) && (v * &a).iter().all(|&h| h <= 1.0 + tol);
            if supporting && !normals.iter().any(|b| (b - &a).amax() <= tol) {
                normals.push(a);
            }
        }
        // next subset in lexicographic order
        let mut i = n;
        while i > 0 && idx[i - 1] == m - n + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for j in i..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
    if normals.len() <= n {
        return None;
    }
    let a = Matrix::from_fn(normals.len(), n, |r, c| normals[r][c]);
    Some((a, Vector::from_element(normals.len(), 1.0)))
}

/// Chord of `conv(V)` through `x` along `d` from two LPs in `(λ, s)`:
/// `max ±s` with `Vᵀλ = x + s d`, `λ ≥ 0`, `Σλ = 1`.
pub(crate) fn vertex_chord(v: &Matrix, x: &Vector, d: &Vector) -> Option<(f64, f64)> {
    let (m, n) = v.shape();
    let mut a = Matrix::zeros(2 * n + 2 + m, m + 1);
    let mut b = Vector::zeros(2 * n + 2 + m);
    for i in 0..n {
        for j in 0..m {
            a[(i, j)] = v[(j, i)];
            a[(n + i, j)] = -v[(j, i)];
        }
        a[(i, m)] = -d[i];
        a[(n + i, m)] = d[i];
        b[i] = x[i];
        b[n + i] = -x[i];
    }
    for j in 0..m {
        a[(2 * n, j)] = 1.0;
        a[(2 * n + 1, j)] = -1.0;
        a[(2 * n + 2 + j, j)] = -1.0;
    }
    b[2 * n] = 1.0;
    b[2 * n + 1] = -1.0;
    let hi = lp_solve(&unit_vector(m + 1, m), &a, &b).ok()?.value;
    let lo = -lp_solve(&-unit_vector(m + 1, m), &a, &b).ok()?.value;
    Some((lo, hi))
}

pub(crate) fn facet_gauge(a: &Matrix, b: &Vector, x: &Vector) -> f64 {
    let ax = a * x;
    ax.iter().zip(b.iter()).map(|(v, bi)| v / bi).fold(0.0, f64::max)
}

pub(crate) fn vertex_support(v: &Matrix, theta: &Vector) -> f64 {
    (v * theta).max()
}

pub(crate) fn facet_chord(a: &Matrix, b: &Vector, x: &Vector, d: &Vector) -> (f64, f64) {
    let ax = a * x;
    let ad = a * d;
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..b.len() {
        let slack = b[i] - ax[i];
        if ad[i] > 0.0 {
            hi = hi.min(slack / ad[i]);
        } else if ad[i] < 0.0 {
            lo = lo.max(slack / ad[i]);
        }
    }
    (lo, hi)
}
