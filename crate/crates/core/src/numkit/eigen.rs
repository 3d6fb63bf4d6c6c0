//! Symmetric eigendecomposition (cyclic Jacobi) and spectral matrix functions.

use serde::{Deserialize, Serialize};

use super::matrix::{Matrix, SymMatrix};
use super::special::gauss_legendre;
use crate::error::{Error, Result};

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;
const HESSIAN_NODES: usize = 32;

/// Eigenvalues in descending order with the matching orthonormal eigenvectors
/// stored as the columns of `vectors`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDecomposition {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn min(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `Q diag(f(λ)) Qᵀ`, without checking `f`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let fl = f(lam);
            scaled.column_mut(j).scale_mut(fl);
        }
        let m = scaled * self.vectors.transpose();
        debug_assert_eq!(m.nrows(), n);
        SymMatrix::from_matrix(&m).expect("square")
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.apply(|x| x)
    }
}

/// Eigendecomposition of a symmetric matrix by the cyclic Jacobi method.
///
/// Sweeps over all off-diagonal pairs until the off-diagonal Frobenius norm
/// drops below `1e-12 · ‖A‖_F`.
pub fn sym_eig(a: &SymMatrix) -> Result<SpectralDecomposition> {
    if !a.is_finite() {
        return Err(Error::NonFinite("sym_eig input"));
    }
    let n = a.dim();
    let mut m = a.as_matrix().clone();
    let mut v = Matrix::identity(n, n);
    let scale = m.norm();
    let target = JACOBI_TOL * scale;

    let off_norm = |m: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * m[(i, j)] * m[(i, j)];
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&m) > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { what: "jacobi eigensolver".into(), iterations: sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SpectralDecomposition { values, vectors })
}

/// `f(A) = Σ f(λᵢ) uᵢuᵢᵀ`. Fails when `f` is not finite at some eigenvalue.
pub fn matrix_function(a: &SymMatrix, f: impl Fn(f64) -> f64) -> Result<SymMatrix> {
    let dec = sym_eig(a)?;
    for &lam in &dec.values {
        if !f(lam).is_finite() {
            return Err(Error::UndefinedOnSpectrum(lam));
        }
    }
    Ok(dec.apply(f))
}

pub fn matrix_exp(a: &SymMatrix) -> Result<SymMatrix> {
    matrix_function(a, f64::exp)
}

/// Symmetric inverse square root `A^{-1/2}`.
pub fn inverse_sqrt(a: &SymMatrix) -> Result<SymMatrix> {
    matrix_function(a, |x| if x > 0.0 { 1.0 / x.sqrt() } else { f64::NAN })
}

/// Symmetric square root of a PSD matrix; eigenvalues in `[-tol, 0)` are clipped to 0.
pub fn psd_sqrt(a: &SymMatrix, tol: f64) -> Result<SymMatrix> {
    matrix_function(a, |x| {
        if x >= 0.0 {
            x.sqrt()
        } else if x >= -tol {
            0.0
        } else {
            f64::NAN
        }
    })
}

fn log_sum_exp_shifted(values: &[f64], beta: f64, top: f64) -> f64 {
    values.iter().map(|&l| (beta * (l - top)).exp()).sum::<f64>().ln()
}

/// Soft maximum `f_β(A) = β⁻¹ log tr exp(βA)`, evaluated as
/// `λ_max + β⁻¹ log Σ exp(β(λᵢ − λ_max))`.
pub fn eig_proxy_max(a: &SymMatrix, beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::invalid("beta must be positive"));
    }
    let dec = sym_eig(a)?;
    Ok(proxy_max_from_values(&dec.values, beta))
}

/// Soft minimum `g_β(A) = −f_β(−A)`.
pub fn eig_proxy_min(a: &SymMatrix, beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::invalid("beta must be positive"));
    }
    let dec = sym_eig(a)?;
    Ok(proxy_min_from_values(&dec.values, beta))
}

pub(crate) fn proxy_max_from_values(values: &[f64], beta: f64) -> f64 {
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top + log_sum_exp_shifted(values, beta, top) / beta
}

pub(crate) fn proxy_min_from_values(values: &[f64], beta: f64) -> f64 {
    let neg: Vec<f64> = values.iter().map(|x| -x).collect();
    -proxy_max_from_values(&neg, beta)
}

/// Gradient of `Φ(A) = tr e^A`, which is `e^A`.
pub fn phi_gradient(a: &SymMatrix) -> Result<SymMatrix> {
    matrix_exp(a)
}

/// Second derivative `D²Φ(A)(H, H)` of `Φ(A) = tr e^A`, from the integral
/// representation `∫₀¹ tr(e^{(1−s)A} H e^{sA} H) ds` on 32 Gauss–Legendre nodes.
pub fn phi_hessian_qform(a: &SymMatrix, h: &SymMatrix) -> Result<f64> {
    if a.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: h.dim() });
    }
    if !h.is_finite() {
        return Err(Error::NonFinite("phi_hessian_qform direction"));
    }
    let dec = sym_eig(a)?;
    let q = &dec.vectors;
    // In the eigenbasis the integrand is Σᵢⱼ H̃ᵢⱼ² e^{(1−s)λᵢ + sλⱼ}.
    let ht = q.transpose() * h.as_matrix() * q;
    let (nodes, weights) = gauss_legendre(HESSIAN_NODES);
    let n = a.dim();
    let mut total = 0.0;
    for (&x, &w) in nodes.iter().zip(&weights) {
        let s = 0.5 * (x + 1.0);
        let mut inner = 0.0;
        for i in 0..n {
            for j in 0..n {
                let hij = ht[(i, j)];
                inner += hij * hij * ((1.0 - s) * dec.values[i] + s * dec.values[j]).exp();
            }
        }
        total += 0.5 * w * inner;
    }
    Ok(total)
}

/// `tr(e^A H²)`, the upper bound for [`phi_hessian_qform`].
pub fn phi_hessian_bound(a: &SymMatrix, h: &SymMatrix) -> Result<f64> {
    let ea = matrix_exp(a)?;
    let h2 = h.as_matrix() * h.as_matrix();
    Ok((ea.as_matrix() * h2).trace())
}

/// Eigenvalues in descending order.
pub fn eigenvalues(a: &SymMatrix) -> Result<Vec<f64>> {
    Ok(sym_eig(a)?.values)
}
