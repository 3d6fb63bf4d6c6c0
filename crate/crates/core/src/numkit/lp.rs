//! Dense two-phase simplex for `max c·x  s.t.  A x ≤ b` with free `x`.
//!
//! Pivoting follows Bland's rule (lowest eligible index for both the entering
//! and the leaving variable), so the method terminates without cycling and the
//! pivot sequence is deterministic. Instances here have at most a few hundred
//! rows and a few dozen columns.

use serde::{Deserialize, Serialize};

use super::matrix::{Matrix, Vector};
use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vector,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, cost: &mut [f64], obj: &mut f64) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rhs[r] /= p;
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r];
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c];
            if f != 0.0 {
                for (v, pv) in self.rows[i].iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
                self.rhs[i] -= f * prhs;
                if self.rhs[i] < 0.0 && self.rhs[i] > -PIVOT_EPS {
                    self.rhs[i] = 0.0;
                }
            }
        }
        let f = cost[c];
        if f != 0.0 {
            for (v, pv) in cost.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            *obj += f * prhs;
        }
        self.basis[r] = c;
    }

    /// Reduced costs `c − c_Bᵀ B⁻¹ A` and the current objective value.
    fn reduced_costs(&self, c: &[f64]) -> (Vec<f64>, f64) {
        let mut red = c.to_vec();
        let mut obj = 0.0;
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = c[b];
            if cb != 0.0 {
                for (r, v) in red.iter_mut().zip(&self.rows[i]) {
                    *r -= cb * v;
                }
                obj += cb * self.rhs[i];
            }
        }
        (red, obj)
    }

    /// Maximizes `c·z` over the current feasible basis. Columns flagged in
    /// `blocked` never enter.
    fn optimize(&mut self, c: &[f64], blocked: &[bool]) -> Result<f64> {
        let (mut red, mut obj) = self.reduced_costs(c);
        for _ in 0..MAX_PIVOTS {
            let entering = (0..self.ncols).find(|&j| !blocked[j] && red[j] > PIVOT_EPS);
            let Some(col) = entering else {
                return Ok(obj);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a > PIVOT_EPS {
                    let ratio = self.rhs[i] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-14 || (ratio <= lr + 1e-14 && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leave else {
                return Err(Error::Unbounded);
            };
            self.pivot(row, col, &mut red, &mut obj);
        }
        Err(Error::NoConvergence { what: "simplex".into(), iterations: MAX_PIVOTS })
    }
}

/// Maximizes `c·x` subject to `a x ≤ b` over free `x ∈ ℝⁿ`.
pub fn lp_solve(c: &Vector, a: &Matrix, b: &Vector) -> Result<LpSolution> {
    let (m, n) = a.shape();
    if c.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: c.len() });
    }
    if b.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: b.len() });
    }
    if c.iter().chain(a.iter()).chain(b.iter()).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("lp_solve input"));
    }

    // Columns: x⁺ (n), x⁻ (n), slacks (m), artificials (one per negative b).
    let neg_rows: Vec<usize> = (0..m).filter(|&i| b[i] < 0.0).collect();
    let n_art = neg_rows.len();
    let ncols = 2 * n + m + n_art;
    let art_start = 2 * n + m;

    let mut rows = vec![vec![0.0; ncols]; m];
    let mut rhs = vec![0.0; m];
    let mut basis = vec![0; m];
    let mut art_index = 0;
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            rows[i][j] = sign * a[(i, j)];
            rows[i][n + j] = -sign * a[(i, j)];
        }
        rows[i][2 * n + i] = sign;
        rhs[i] = sign * b[i];
        if b[i] < 0.0 {
            rows[i][art_start + art_index] = 1.0;
            basis[i] = art_start + art_index;
            art_index += 1;
        } else {
            basis[i] = 2 * n + i;
        }
    }
    let mut tab = Tableau { rows, rhs, basis, ncols };

    let mut blocked = vec![false; ncols];
    if n_art > 0 {
        let mut phase1 = vec![0.0; ncols];
        for v in phase1.iter_mut().skip(art_start) {
            *v = -1.0;
        }
        let best = tab.optimize(&phase1, &blocked)?;
        if best < -FEAS_EPS * (1.0 + b.amax()) {
            return Err(Error::Infeasible);
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= art_start {
                let col = (0..art_start).find(|&j| tab.rows[r][j].abs() > 1e-9);
                match col {
                    Some(j) => {
                        let mut dummy = vec![0.0; ncols];
                        let mut o = 0.0;
                        tab.pivot(r, j, &mut dummy, &mut o);
                        r += 1;
                    }
                    None => {
                        tab.rows.remove(r);
                        tab.rhs.remove(r);
                        tab.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
        for v in blocked.iter_mut().skip(art_start) {
            *v = true;
        }
    }

    let mut cost = vec![0.0; ncols];
    for j in 0..n {
        cost[j] = c[j];
        cost[n + j] = -c[j];
    }
    tab.optimize(&cost, &blocked)?;

    let mut z = vec![0.0; ncols];
    for (i, &bv) in tab.basis.iter().enumerate() {
        z[bv] = tab.rhs[i];
    }
    let x = Vector::from_fn(n, |j, _| z[j] - z[n + j]);
    let x = polish(a, b, x, &tab.basis, n, m);
    Ok(LpSolution { value: c.dot(&x), x })
}

/// Re-solves the optimal basis' active constraints directly to remove
/// round-off accumulated by the tableau pivots.
fn polish(a: &Matrix, b: &Vector, x: Vector, basis: &[usize], n: usize, m: usize) -> Vector {
    let slack_basic: Vec<bool> = {
        let mut v = vec![false; m];
        for &bv in basis {
            if bv >= 2 * n && bv < 2 * n + m {
                v[bv - 2 * n] = true;
            }
        }
        v
    };
    let active: Vec<usize> = (0..m).filter(|&i| !slack_basic[i]).collect();
    if active.len() != n {
        return x;
    }
    let sub = Matrix::from_fn(n, n, |r, c| a[(active[r], c)]);
    let rhs = Vector::from_fn(n, |r, _| b[active[r]]);
    match sub.lu().solve(&rhs) {
        Some(y) if (&y - &x).amax() < 1e-6 * (1.0 + x.amax()) => y,
        _ => x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::rng::RngStream;
    use rand::Rng;

    fn brute_force(c: &Vector, a: &Matrix, b: &Vector) -> Option<f64> {
        let (m, n) = a.shape();
        let mut best: Option<f64> = None;
        let mut idx: Vec<usize> = (0..n).collect();
        loop {
            let sub = Matrix::from_fn(n, n, |r, col| a[(idx[r], col)]);
            let rhs = Vector::from_fn(n, |r, _| b[idx[r]]);
            if let Some(x) = sub.clone().lu().solve(&rhs) {
                if (&sub * &x - &rhs).amax() < 1e-9 && (a * &x - b).max() <= 1e-9 {
                    let v = c.dot(&x);
                    best = Some(best.map_or(v, |bv: f64| bv.max(v)));
                }
            }
            // next combination
            let mut k = n;
            loop {
                if k == 0 {
                    return best;
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

    #[test]
    fn one_dimensional_interval() {
        let a = Matrix::from_row_slice(2, 1, &[1.0, -1.0]);
        let b = Vector::from_vec(vec![1.0, 1.0]);
        let s = lp_solve(&Vector::from_vec(vec![1.0]), &a, &b).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12 && (s.x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_square() {
        let a = Matrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0]);
        let b = Vector::from_vec(vec![1.0, 1.0, 0.0, 0.0]);
        let s = lp_solve(&Vector::from_vec(vec![1.0, 1.0]), &a, &b).unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn verdicts() {
        let a = Matrix::from_row_slice(2, 1, &[1.0, -1.0]);
        let infeasible = lp_solve(&Vector::from_vec(vec![1.0]), &a, &Vector::from_vec(vec![-1.0, -1.0]));
        assert_eq!(infeasible, Err(Error::Infeasible));
        let a = Matrix::from_row_slice(1, 1, &[-1.0]);
        let unbounded = lp_solve(&Vector::from_vec(vec![1.0]), &a, &Vector::from_vec(vec![1.0]));
        assert_eq!(unbounded, Err(Error::Unbounded));
    }

    #[test]
    fn degenerate_vertex_does_not_cycle() {
        // Many constraints through the optimal vertex (1, 1).
        let mut rows = vec![];
        let mut rhs = vec![];
        for k in 0..12 {
            let t = k as f64 / 11.0;
            rows.extend_from_slice(&[t, 1.0 - t]);
            rhs.push(1.0);
        }
        rows.extend_from_slice(&[-1.0, 0.0, 0.0, -1.0]);
        rhs.extend_from_slice(&[5.0, 5.0]);
        let a = Matrix::from_row_slice(14, 2, &rows);
        let s = lp_solve(&Vector::from_vec(vec![1.0, 1.0]), &a, &Vector::from_vec(rhs)).unwrap();
        assert!((s.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn matches_vertex_enumeration() {
        let mut rng = RngStream::new(21, 0);
        for trial in 0..300 {
            let n = 1 + trial % 5;
            let extra = rng.random_range(1..=(10 - 2 * n).max(1));
            let m = 2 * n + extra;
            let mut a = Matrix::zeros(m, n);
            let mut b = Vector::zeros(m);
            for j in 0..n {
                a[(2 * j, j)] = 1.0;
                a[(2 * j + 1, j)] = -1.0;
                b[2 * j] = rng.random_range(0.5..3.0);
                b[2 * j + 1] = rng.random_range(-1.0..3.0);
            }
            for i in 2 * n..m {
                for j in 0..n {
                    a[(i, j)] = rng.normal();
                }
                b[i] = rng.random_range(-0.5..2.0);
            }
            let c = Vector::from_fn(n, |_, _| rng.normal());
            let oracle = brute_force(&c, &a, &b);
            match (lp_solve(&c, &a, &b), oracle) {
                (Ok(s), Some(v)) => {
                    assert!((s.value - v).abs() < 1e-8, "trial {trial}: {} vs {v}", s.value);
                    assert!((&a * &s.x - &b).max() < 1e-9);
                }
                (Err(Error::Infeasible), None) => {}
                (got, want) => panic!("trial {trial}: {got:?} vs {want:?}"),
            }
        }
    }
}
