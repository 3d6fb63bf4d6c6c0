use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::Body;
use crate::error::{Error, Result};
use crate::numkit::matrix::{matrix_to_rows, orthogonality_defect, rows_to_matrix};
use crate::numkit::stats::quantile_with_ci;
use crate::numkit::{haar_orthogonal, Matrix, RngStream};
use crate::sampling::{tilted_sample_parallel, SamplerConfig, Tilt};

const ORTHOGONALITY_TOL: f64 = 1e-8;
/// Relative tolerance when re-checking a stored certificate.
pub const CERTIFICATE_TOL: f64 = 1e-8;

fn check_rotation(u: &Matrix, n: usize) -> Result<()> {
    if u.nrows() != n || u.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: u.nrows() });
    }
    let defect = orthogonality_defect(u);
    if defect > ORTHOGONALITY_TOL {
        return Err(Error::invalid(format!("matrix is not orthogonal (defect {defect:.2e})")));
    }
    Ok(())
}

/// Smallest `λ` with `U(K₁) ⊆ λK₂`: the largest `K₂`-gauge of a rotated
/// vertex of `K₁`. Falls back to the facet route when `K₁` has no vertex list.
pub fn containment_lambda(k1: &Body, k2: &Body, u: &Matrix) -> Result<f64> {
    let n = k1.dim();
    if k2.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: k2.dim() });
    }
    check_rotation(u, n)?;
    match k1.vertices() {
        Some(v) => Ok(v
            .row_iter()
            .map(|row| {
                let x = row.transpose();
                k2.gauge(&(u * &x)) / k1.gauge(&x)
            })
            .fold(0.0, f64::max)),
        None => containment_lambda_facets(k1, k2, u),
    }
}

/// The same `λ` from the facets `aᵢ·y ≤ bᵢ` of `K₂`:
/// `max_i h_{K₁}(Uᵀaᵢ)/bᵢ`.
pub fn containment_lambda_facets(k1: &Body, k2: &Body, u: &Matrix) -> Result<f64> {
    let n = k1.dim();
    check_rotation(u, n)?;
    let (a, b) = k2
        .facets()
        .ok_or_else(|| Error::Unsupported("containment needs vertices of K₁ or facets of K₂".into()))?;
    let ut = u.transpose();
    Ok(a.row_iter()
        .zip(b.iter())
        .map(|(row, &bi)| k1.support(&(&ut * row.transpose())) / bi)
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialContainment {
    pub beta: f64,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub samples: usize,
}

/// Smallest `λ` with `Vol(λK ∩ T) ≥ β·Vol(T)`: the `β`-quantile of `‖X‖_K`
/// for `X` uniform in `T`, with an order-statistic 95% interval.
pub fn partial_containment_lambda(
    k: &Body,
    t: &Body,
    beta: f64,
    count: usize,
    sampler: &SamplerConfig,
    rng: &RngStream,
) -> Result<PartialContainment> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::invalid("mass β must lie in (0, 1)"));
    }
    if k.dim() != t.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: t.dim() });
    }
    let chains = 16;
    let pts = tilted_sample_parallel(t, &Tilt::none(t.dim()), count.div_ceil(chains).max(1), chains, sampler, rng)?;
    let g: Vec<f64> = pts.iter().map(|x| k.gauge(x)).collect();
    let q = quantile_with_ci(&g, beta, 0.05);
    Ok(PartialContainment { beta, value: q.value, lower: q.lower, upper: q.upper, samples: g.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    Dbm,
    Dpc,
}

/// Upper bound on a distance between two bodies with what is needed to
/// re-check it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceCertificate {
    pub kind: DistanceKind,
    pub bodies: [String; 2],
    pub n: usize,
    /// The rotation `U` achieving the bound (`Dbm` only).
    pub rotation: Option<Vec<Vec<f64>>>,
    /// `U(K₁) ⊆ λK₂` (`Dbm`), or the quantile of `‖X‖_{K₁}` over `X ∈ K₂` (`Dpc`).
    pub lambda_forward: f64,
    pub lambda_backward: f64,
    pub bound: f64,
    pub seed: u64,
    pub candidates: usize,
}

impl DistanceCertificate {
    /// Recomputes the containment factors from the stored rotation (or, for
    /// `Dpc`, the bound from the stored quantiles) and compares within a
    /// relative `1e-8`.
    pub fn verify(&self, k1: &Body, k2: &Body) -> Result<bool> {
        let close = |a: f64, b: f64| (a - b).abs() <= CERTIFICATE_TOL * a.abs().max(b.abs()).max(1.0);
        match self.kind {
            DistanceKind::Dbm => {
                let rows = self.rotation.as_ref().ok_or_else(|| Error::Parse("certificate lacks its rotation".into()))?;
                let u = rows_to_matrix(rows)?;
                let fwd = containment_lambda(k1, k2, &u)?;
                let bwd = containment_lambda(k2, k1, &u.transpose())?;
                Ok(close(fwd, self.lambda_forward) && close(bwd, self.lambda_backward) && close(fwd * bwd, self.bound))
            }
            DistanceKind::Dpc => {
                let m = self.lambda_forward.max(self.lambda_backward);
                Ok(close(m * m, self.bound))
            }
        }
    }
}

/// Banach–Mazur upper bound `min_U λ(U)·λ'(Uᵀ)` over the identity and
/// `rotations` Haar rotations, where `U(K₁) ⊆ λK₂ ⊆ λλ'U(K₁)`. Candidate
/// `i` depends only on `(seed, i)`, so more rotations never raise the bound.
pub fn dbm_upper(k1: &Body, k2: &Body, rotations: usize, seed: u64) -> Result<DistanceCertificate> {
    let n = k1.dim();
    let base = RngStream::new(seed, 0);
    let evaluated: Vec<(f64, f64, Matrix)> = (0..=rotations)
        .into_par_iter()
        .map(|i| {
            let u = if i == 0 { Matrix::identity(n, n) } else { haar_orthogonal(n, &mut base.spawn(i as u64)) };
            let fwd = containment_lambda(k1, k2, &u)?;
            let bwd = containment_lambda(k2, k1, &u.transpose())?;
            Ok((fwd, bwd, u))
        })
        .collect::<Result<_>>()?;
    let (fwd, bwd, u) = evaluated
        .into_iter()
        .reduce(|best, c| if c.0 * c.1 < best.0 * best.1 { c } else { best })
        .expect("identity candidate is always present");
    Ok(DistanceCertificate {
        kind: DistanceKind::Dbm,
        bodies: [k1.describe(), k2.describe()],
        n,
        rotation: Some(matrix_to_rows(&u)),
        lambda_forward: fwd,
        lambda_backward: bwd,
        bound: fwd * bwd,
        seed,
        candidates: rotations + 1,
    })
}

/// Partial-containment upper bound: with `q₁` the `β`-quantile of `‖X‖_{K₁}`
/// over `X ∈ K₂` and `q₂` the reverse, `λ = max(q₁, q₂)²` so that `√λ K₁`
/// and `√λ K₂` each hold mass `β` of the other body.
pub fn dpc_upper(k1: &Body, k2: &Body, beta: f64, count: usize, sampler: &SamplerConfig, seed: u64) -> Result<DistanceCertificate> {
    let rng = RngStream::new(seed, 0);
    let fwd = partial_containment_lambda(k1, k2, beta, count, sampler, &rng.spawn(0))?;
    let bwd = partial_containment_lambda(k2, k1, beta, count, sampler, &rng.spawn(1))?;
    let m = fwd.value.max(bwd.value);
    Ok(DistanceCertificate {
        kind: DistanceKind::Dpc,
        bodies: [k1.describe(), k2.describe()],
        n: k1.dim(),
        rotation: None,
        lambda_forward: fwd.value,
        lambda_backward: bwd.value,
        bound: m * m,
        seed,
        candidates: fwd.samples + bwd.samples,
    })
}
