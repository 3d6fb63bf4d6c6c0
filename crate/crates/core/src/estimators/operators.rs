use serde::{Deserialize, Serialize};

use super::{m_of, mc_values, mstar_of, ScalarEstimate};
use crate::bodies::{Body, Shape};
use crate::error::{Error, Result};
use crate::numkit::stats::{mean, std_error};
use crate::numkit::{gaussian_matrix, haar_orthogonal, psd_sqrt, uniform_sphere, Matrix, RngStream, SymMatrix, Vector};

/// Sign patterns are enumerated for cube-shaped domains up to this dimension.
const MAX_SIGN_ENUMERATION: usize = 20;

/// `‖A : K → T‖ = sup_{x≠0} ‖Ax‖_T / ‖x‖_K`. `certified` is false when the
/// value is only a lower bound from sampled directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorNorm {
    pub value: f64,
    pub certified: bool,
}

/// The supremum of the convex function `x ↦ ‖Ax‖_T` over `K` is attained at
/// a vertex, so polytopes with known vertices give the exact norm. Cube
/// domains without a vertex list use the row-sum formula when `T` is also a
/// cube and sign enumeration otherwise; any other body falls back to a
/// sampled lower bound.
pub fn operator_gauge_norm(a: &Matrix, k: &Body, t: &Body) -> Result<OperatorNorm> {
    let n = k.dim();
    if a.nrows() != t.dim() || a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
    }
    if let Some(v) = k.vertices() {
        let value = v
            .row_iter()
            .map(|row| {
                let x = row.transpose();
                t.gauge(&(a * &x)) / k.gauge(&x)
            })
            .fold(0.0, f64::max);
        return Ok(OperatorNorm { value, certified: true });
    }
    if let Shape::Cube { half_side } = k.shape() {
        if let Shape::Cube { half_side: ht } = t.shape() {
            let rows = a.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
            return Ok(OperatorNorm { value: half_side * rows / ht, certified: true });
        }
        if n <= MAX_SIGN_ENUMERATION {
            let mut best: f64 = 0.0;
            for mask in 0u64..(1u64 << n) {
                let x = Vector::from_fn(n, |i, _| if mask >> i & 1 == 1 { half_side } else { -half_side });
                best = best.max(t.gauge(&(a * &x)));
            }
            return Ok(OperatorNorm { value: best, certified: true });
        }
    }
    let mut rng = RngStream::new(0x00DE_7A11, n as u64);
    let value = (0..256 * n)
        .map(|_| {
            let u = uniform_sphere(n, &mut rng);
            t.gauge(&(a * &u)) / k.gauge(&u)
        })
        .fold(0.0, f64::max);
    Ok(OperatorNorm { value, certified: false })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChevetReport {
    pub n: usize,
    pub orthogonal: bool,
    /// `E‖Γ : K → T‖` (Gaussian Γ) or `E‖U : K → T‖` (Haar U).
    pub lhs: ScalarEstimate,
    pub radius_k: f64,
    pub m_t: ScalarEstimate,
    pub radius_t_polar: f64,
    pub mstar_k: ScalarEstimate,
    /// `√n·[R(K)M(T) + R(T°)M(K°)]` for Gaussian matrices, without the `√n`
    /// for rotations.
    pub bound: f64,
    pub certified: bool,
}

impl ChevetReport {
    pub fn ratio(&self) -> f64 {
        self.lhs.value / self.bound
    }
}

/// Average operator norm of random Gaussian matrices (or Haar rotations)
/// from `K` to `T`, with the comparison expression built from Monte Carlo
/// estimates of `M(T)` and `M(K°) = M*(K)` over `count` directions.
pub fn chevet_estimate(k: &Body, t: &Body, trials: usize, count: usize, orthogonal: bool, rng: &RngStream) -> Result<ChevetReport> {
    let n = k.dim();
    if t.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: t.dim() });
    }
    if trials < 2 {
        return Err(Error::invalid("need at least two random matrices"));
    }
    let certified = std::sync::atomic::AtomicBool::new(true);
    let norms = mc_values(trials, &rng.spawn(0), |r| {
        let a = if orthogonal { haar_orthogonal(n, r) } else { gaussian_matrix(n, n, r) };
        match operator_gauge_norm(&a, k, t) {
            Ok(v) => {
                if !v.certified {
                    certified.store(false, std::sync::atomic::Ordering::Relaxed);
                }
                v.value
            }
            Err(_) => f64::NAN,
        }
    });
    if norms.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("operator norm"));
    }
    let radius_k = k.radius();
    let radius_t_polar = t.radius_polar()?;
    let m_t = m_of(t, count, &rng.spawn(1))?;
    let mstar_k = mstar_of(k, count, &rng.spawn(2))?;
    let factor = if orthogonal { 1.0 } else { (n as f64).sqrt() };
    let bound = factor * (radius_k.value * m_t.value + radius_t_polar.value * mstar_k.value);
    let method = if orthogonal { "haar" } else { "gaussian" };
    Ok(ChevetReport {
        n,
        orthogonal,
        lhs: ScalarEstimate { value: mean(&norms), se: std_error(&norms), samples: trials, method: method.into() },
        radius_k: radius_k.value,
        m_t,
        radius_t_polar: radius_t_polar.value,
        mstar_k,
        bound,
        certified: certified.into_inner() && radius_k.certified && radius_t_polar.certified,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularFactor {
    pub n: usize,
    /// `δ̂_n = (1/n)·E tr(Γ*Γ)^{1/2}`.
    pub delta: ScalarEstimate,
    /// Entrywise mean of `(Γ*Γ)^{1/2}` and its standard errors.
    pub mean_root: Matrix,
    pub root_se: Matrix,
}

impl SingularFactor {
    /// Largest off-diagonal entry of the mean root in units of its se.
    pub fn max_offdiag_z(&self) -> f64 {
        let mut z: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j && self.root_se[(i, j)] > 0.0 {
                    z = z.max(self.mean_root[(i, j)].abs() / self.root_se[(i, j)]);
                }
            }
        }
        z
    }
}

pub fn mean_singular_factor(n: usize, trials: usize, rng: &RngStream) -> Result<SingularFactor> {
    if n == 0 || trials < 2 {
        return Err(Error::invalid("singular factor needs n ≥ 1 and at least two trials"));
    }
    let roots: Vec<Matrix> = (0..trials)
        .map(|i| {
            let mut r = rng.spawn(i as u64);
            let g = gaussian_matrix(n, n, &mut r);
            let gram = SymMatrix::from_matrix(&(g.transpose() * &g))?;
            Ok(psd_sqrt(&gram, 1e-12)?.into_matrix())
        })
        .collect::<Result<_>>()?;
    let deltas: Vec<f64> = roots.iter().map(|m| m.trace() / n as f64).collect();
    let mut mean_root = Matrix::zeros(n, n);
    let mut root_se = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v: Vec<f64> = roots.iter().map(|m| m[(i, j)]).collect();
            mean_root[(i, j)] = mean(&v);
            root_se[(i, j)] = std_error(&v);
        }
    }
    Ok(SingularFactor {
        n,
        delta: ScalarEstimate { value: mean(&deltas), se: std_error(&deltas), samples: trials, method: "gaussian".into() },
        mean_root,
        root_se,
    })
}
