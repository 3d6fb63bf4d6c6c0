//! The named experiments. Each returns result rows (with property checks
//! where a bound applies) and any extra tables.

use anyhow::{bail, Result};
use isoloc_core::bodies::{cross_polytope, cube, Body};
use isoloc_core::estimators::{
    chevet_estimate, containment_lambda, dbm_upper, dpc_upper, kahane_ratio, m_of, mean_gauge_gaussian,
    mean_gauge_uniform, mean_singular_factor, mean_sup_isotropic_cube, mean_sup_laplace, mstar_of,
    partial_containment_lambda, DistanceCertificate,
};
use isoloc_core::localization::{
    clipped_martingale, convex_order_check, covariance_trace, ensemble, freedman_check, gaussian_battery,
    maurey_decompose, path_states, tilt_path_exact, CovarianceTrace, InnerConfig, TimeGrid, Volatility,
};
use isoloc_core::numkit::stats::{binomial_se, quantile_with_ci};
use isoloc_core::numkit::{alpha_n, haar_orthogonal};
use isoloc_core::sampling::SamplerConfig;
use isoloc_core::{RngStream, Vector};

use crate::config::{BodyEntry, Settings};
use crate::record::{Outcome, Row, Table};
use crate::resolve::resolve_body;

type Functional<'a> = Box<dyn Fn(&Vector) -> f64 + 'a>;

pub fn run_experiment(s: &Settings) -> Result<Outcome> {
    match s.experiment.as_str() {
        "sandwich" => sandwich(s),
        "mm" => mm(s),
        "localize" => localize(s),
        "maurey" => maurey(s),
        "convex-order" => convex_order(s),
        "kahane" => kahane(s),
        "chevet" => chevet(s),
        "rotate" => rotate(s),
        "partial" => partial(s),
        "dbm" => dbm(s),
        "dpc" => dpc(s),
        "freedman" => freedman(s),
        other => bail!("unknown experiment {other:?}"),
    }
}

fn bodies_at(s: &Settings, n: usize) -> Result<Vec<(String, Body)>> {
    s.bodies.iter().map(|e| Ok((e.label(), resolve_body(e, n, s.isotropic, s.seed)?))).collect()
}

fn pair_at(s: &Settings, pair: &(BodyEntry, BodyEntry), n: usize) -> Result<([String; 2], Body, Body)> {
    let k1 = resolve_body(&pair.0, n, s.isotropic, s.seed)?;
    let k2 = resolve_body(&pair.1, n, s.isotropic, s.seed)?;
    Ok(([pair.0.label(), pair.1.label()], k1, k2))
}

fn first_body(s: &Settings, n: usize) -> Result<(String, Body)> {
    let e = s.bodies.first().ok_or_else(|| anyhow::anyhow!("experiment needs a body"))?;
    Ok((e.label(), resolve_body(e, n, s.isotropic, s.seed)?))
}

fn log_n(n: usize) -> Result<f64> {
    if n < 2 {
        bail!("this experiment needs n ≥ 2");
    }
    Ok((n as f64).ln())
}

fn sandwich(s: &Settings) -> Result<Outcome> {
    let root = RngStream::new(s.seed, 1);
    let sampler = SamplerConfig::default();
    let mut rows = Vec::new();
    for &n in &s.n {
        let rn = root.spawn(n as u64);
        let bodies = bodies_at(s, n)?;
        let q = s.constants.q(n);
        let (lo, hi) = (s.constants.lower / q, s.constants.upper * q);
        for (i, (lx, x)) in bodies.iter().enumerate() {
            for (j, (lk, k)) in bodies.iter().enumerate() {
                let tag = 2 * (i * bodies.len() + j) as u64;
                let ex = mean_gauge_uniform(k, x, s.samples, &sampler, &rn.spawn(tag))?;
                let eg = mean_gauge_gaussian(k, s.samples, &rn.spawn(tag + 1))?;
                let ratio = ex.value / eg.value;
                let se = ratio * (ex.se / ex.value).hypot(eg.se / eg.value);
                rows.push(
                    Row::new("sandwich", &[lx.clone(), lk.clone()], n, ratio, s.seed)
                        .se(se)
                        .param("e_x", ex.value)
                        .param("e_x_se", ex.se)
                        .param("e_g", eg.value)
                        .param("e_g_se", eg.se)
                        .param("samples", s.samples)
                        .check(Some(lo), Some(hi))
                        .build()?,
                );
            }
        }
        if n >= 2 {
            let (ln, rr) = ((n as f64).ln(), rn.spawn(1 << 20));
            let c = mean_sup_isotropic_cube(n, s.samples, &rr.spawn(0))?;
            rows.push(Row::new("remark_cube", &["cube".into()], n, c.value, s.seed).se(c.se).check(Some(1.0), Some(3f64.sqrt())).build()?);
            let g = mean_gauge_gaussian(&cube(n)?, s.samples, &rr.spawn(1))?;
            let v = g.value / ln.sqrt();
            rows.push(Row::new("remark_gauss", &["cube".into()], n, v, s.seed).se(g.se / ln.sqrt()).check(Some(0.8), Some(2.2)).build()?);
            let y = mean_sup_laplace(n, s.samples, &rr.spawn(2))?;
            rows.push(Row::new("remark_laplace", &["cube".into()], n, y.value / ln, s.seed).se(y.se / ln).check(Some(0.5), Some(2.5)).build()?);
        }
    }
    Ok(Outcome { rows, tables: vec![] })
}

fn mm(s: &Settings) -> Result<Outcome> {
    let root = RngStream::new(s.seed, 2);
    let mut rows = Vec::new();
    for &n in &s.n {
        let ln = log_n(n)?;
        let rn = root.spawn(n as u64);
        let (sq, psi, alpha) = ((n as f64).sqrt(), s.constants.psi(n), alpha_n(n));
        for (i, (label, k)) in bodies_at(s, n)?.into_iter().enumerate() {
            let r = rn.spawn(i as u64);
            let m = m_of(&k, s.samples, &r.spawn(0))?;
            let ms = mstar_of(&k, s.samples, &r.spawn(1))?;
            let g = mean_gauge_gaussian(&k, s.samples, &r.spawn(2))?;
            let scale = sq / (psi * ln.sqrt());
            let b = std::slice::from_ref(&label);
            rows.push(Row::new("m", b, n, m.value * scale, s.seed).se(m.se * scale).param("m", m.value).check(None, Some(s.constants.upper)).build()?);
            let scale = 1.0 / (sq * ln * ln);
            rows.push(Row::new("mstar", b, n, ms.value * scale, s.seed).se(ms.se * scale).param("mstar", ms.value).check(None, Some(s.constants.upper)).build()?);
            let diff = g.value - alpha * m.value;
            let se = g.se.hypot(alpha * m.se);
            rows.push(
                Row::new("gauss_identity", b, n, diff, s.seed)
                    .se(se)
                    .param("e_g", g.value)
                    .param("alpha_m", alpha * m.value)
                    .check(Some(-3.0 * se), Some(3.0 * se))
                    .build()?,
            );
        }
    }
    Ok(Outcome { rows, tables: vec![] })
}

fn kahane(s: &Settings) -> Result<Outcome> {
    let root = RngStream::new(s.seed, 3);
    let mut rows = Vec::new();
    for &n in &s.n {
        for (i, (label, k)) in bodies_at(s, n)?.into_iter().enumerate() {
            for (j, &p) in s.p.iter().enumerate() {
                let r = kahane_ratio(&k, p, s.samples, &root.spawn(n as u64).spawn(i as u64).spawn(j as u64))?;
                rows.push(
                    Row::new("kahane", std::slice::from_ref(&label), n, r.value, s.seed)
                        .se(r.se)
                        .param("p", p)
                        .check(Some(1.0), Some(3.0 * p.sqrt()))
                        .build()?,
                );
            }
        }
    }
    Ok(Outcome { rows, tables: vec![] })
}

fn chevet(s: &Settings) -> Result<Outcome> {
    let root = RngStream::new(s.seed, 4);
    let mut rows = Vec::new();
    for &n in &s.n {
        let rn = root.spawn(n as u64);
        for (i, pair) in s.pairs.iter().enumerate() {
            let (labels, k, t) = pair_at(s, pair, n)?;
            for orthogonal in [false, true] {
                let rep = chevet_estimate(&k, &t, s.trials, s.samples, orthogonal, &rn.spawn(2 * i as u64 + orthogonal as u64))?;
                let op = if orthogonal { "chevet_orthogonal" } else { "chevet" };
                rows.push(
                    Row::new(op, &labels, n, rep.ratio(), s.seed)
                        .se(rep.lhs.se / rep.bound)
                        .param("lhs", rep.lhs.value)
                        .param("bound", rep.bound)
                        .param("trials", s.trials)
                        .check(None, Some(s.constants.upper))
                        .build()?,
                );
            }
        }
        let f = mean_singular_factor(n, s.trials, &rn.spawn(1 << 20))?;
        let sq = (n as f64).sqrt();
        rows.push(
            Row::new("singular_factor", &[], n, f.delta.value / sq, s.seed)
                .se(f.delta.se / sq)
                .param("max_offdiag_z", f.max_offdiag_z())
                .check(Some(0.5), Some(1.0))
                .build()?,
        );
    }
    Ok(Outcome { rows, tables: vec![] })
}

/// `10·√n·log²(n+1)` with the configured multiplier.
fn rotation_bound(s: &Settings, n: usize) -> f64 {
    s.constants.upper * (n as f64).sqrt() * (n as f64 + 1.0).ln().powi(2)
}

fn rotate(s: &Settings) -> Result<Outcome> {
    let root = RngStream::new(s.seed, 5);
    let mut rows = Vec::new();
    for &n in &s.n {
        for (i, pair) in s.pairs.iter().enumerate() {
            let (labels, k1, k2) = pair_at(s, pair, n)?;
            let rng = root.spawn(n as u64).spawn(i as u64);
            let lambdas = ensemble(s.rotations, &rng, |_, r| containment_lambda(&k1, &k2, &haar_orthogonal(n, r)))?;
            let q = quantile_with_ci(&lambdas, 0.9, 0.05);
            rows.push(
                Row::new("rotate", &labels, n, q.value, s.seed)
                    .param("quantile", 0.9)
                    .param("lower", q.lower)
                    .param("upper", q.upper)
                    .param("rotations", s.rotations)
                    .check(None, Some(rotation_bound(s, n)))
                    .build()?,
            );
        }
    }
    Ok(Outcome { rows, tables: vec![] })
}

fn certificate_row(op: &str, cert: &DistanceCertificate, s: &Settings) -> Row {
    Row::new(op, &cert.bodies, cert.n, cert.bound, s.seed)
        .certified(op == "dbm")
        .param("isotropic", s.isotropic)
        .param("certificate", cert)
}

fn partial(s: &Settings) -> Result<Outcome> {
    let root = RngStream::new(s.seed, 6);
    let sampler = SamplerConfig::default();
    let mut rows = Vec::new();
    for &n in &s.n {
        let l = (n as f64 + 1.0).ln();
        for (i, pair) in s.pairs.iter().enumerate() {
            let (labels, k, t) = pair_at(s, pair, n)?;
            let rng = root.spawn(n as u64).spawn(i as u64);
            let pc = partial_containment_lambda(&k, &t, s.beta, s.samples, &sampler, &rng.spawn(0))?;
            rows.push(
                Row::new("partial", &labels, n, pc.value, s.seed)
                    .param("beta", s.beta)
                    .param("lower", pc.lower)
                    .param("upper", pc.upper)
                    .check(None, Some(s.constants.upper * l * l))
                    .build()?,
            );
            if labels.iter().all(|b| b == "ball") && s.isotropic {
                let exact = s.beta.powf(1.0 / n as f64);
                rows.push(
                    Row::new("partial_ball_exact", &labels, n, exact, s.seed)
                        .certified(true)
                        .param("beta", s.beta)
                        .check(Some(pc.lower), Some(pc.upper))
                        .build()?,
                );
            }
            let mut cert = dpc_upper(&k, &t, s.beta, s.samples, &sampler, dist_seed(s, n, i))?;
            cert.bodies = labels.clone();
            rows.push(certificate_row("dpc", &cert, s).param("beta", s.beta).check(None, Some(s.constants.upper * l.powi(4))).build()?);
        }
    }
    Ok(Outcome { rows, tables: vec![] })
}

fn dist_seed(s: &Settings, n: usize, pair: usize) -> u64 {
    RngStream::new(s.seed, 7).spawn(n as u64).spawn(pair as u64).id().seed
}

fn dbm(s: &Settings) -> Result<Outcome> {
    let mut rows = Vec::new();
    for &n in &s.n {
        for (i, pair) in s.pairs.iter().enumerate() {
            let (labels, k1, k2) = pair_at(s, pair, n)?;
            let mut cert = dbm_upper(&k1, &k2, s.rotations, dist_seed(s, n, i))?;
            cert.bodies = labels;
            rows.push(certificate_row("dbm", &cert, s).param("rotations", s.rotations).check(Some(1.0 - 1e-9), None).build()?);
        }
    }
    Ok(Outcome { rows, tables: vec![] })
}

fn dpc(s: &Settings) -> Result<Outcome> {
    let sampler = SamplerConfig::default();
    let mut rows = Vec::new();
    for &n in &s.n {
        let l = (n as f64 + 1.0).ln();
        for (i, pair) in s.pairs.iter().enumerate() {
            let (labels, k1, k2) = pair_at(s, pair, n)?;
            let mut cert = dpc_upper(&k1, &k2, s.beta, s.samples, &sampler, dist_seed(s, n, i))?;
            cert.bodies = labels;
            rows.push(certificate_row("dpc", &cert, s).param("beta", s.beta).check(None, Some(s.constants.upper * l.powi(4))).build()?);
        }
    }
    Ok(Outcome { rows, tables: vec![] })
}

fn localize(s: &Settings) -> Result<Outcome> {
    let root = RngStream::new(s.seed, 8);
    let inner = InnerConfig::new(s.inner);
    let mut out = Outcome::default();
    for &n in &s.n {
        let (label, body) = first_body(s, n)?;
        let horizon = s.horizon_for(n);
        let grid = TimeGrid::new(horizon, s.steps)?;
        let betas = CovarianceTrace::default_betas(n);
        let traces = ensemble(s.paths, &root.spawn(n as u64), |_, r| {
            let path = tilt_path_exact(&body, &grid, &inner.sampler, r)?;
            covariance_trace(&body, &path, &betas, &inner, &r.spawn(1 << 20))
        })?;
        let frac = |f: &dyn Fn(&CovarianceTrace) -> bool| traces.iter().filter(|t| f(t)).count() as f64 / traces.len() as f64;
        let stayed = frac(&|t| t.stayed_in_window());
        let b = std::slice::from_ref(&label);
        rows_push(&mut out, Row::new("window", b, n, stayed, s.seed).param("horizon", horizon).param("paths", s.paths).check(Some(0.9), None))?;
        let violating = traces.iter().filter(|t| !t.inverse_time_violations().is_empty()).count();
        rows_push(&mut out, Row::new("inverse_time", b, n, violating as f64, s.seed).param("horizon", horizon).check(None, Some(0.0)))?;
        let sandwich = frac(&|t| t.proxy_sandwich_holds());
        rows_push(&mut out, Row::new("proxy_sandwich", b, n, sandwich, s.seed).check(Some(1.0), None))?;
        for (p, trace) in traces.iter().enumerate() {
            for j in 0..betas.len() {
                let mut buf = Vec::new();
                trace.write_csv(j, &mut buf)?;
                out.tables.push(Table { name: format!("trace_n{n}_p{p:03}_b{j}"), text: String::from_utf8(buf)? });
            }
        }
    }
    Ok(out)
}

fn rows_push(out: &mut Outcome, row: Row) -> Result<()> {
    out.rows.push(row.build()?);
    Ok(())
}

fn maurey(s: &Settings) -> Result<Outcome> {
    let root = RngStream::new(s.seed, 9);
    let inner = InnerConfig::new(s.inner);
    let mut out = Outcome::default();
    for &n in &s.n {
        let (label, body) = first_body(s, n)?;
        let horizon = s.horizon_for(n);
        let r = s.r.unwrap_or(4.0 * horizon);
        let grid = TimeGrid::new(horizon, s.steps)?;
        let pairs = ensemble(s.paths, &root.spawn(n as u64), |_, rng| {
            let path = tilt_path_exact(&body, &grid, &inner.sampler, rng)?;
            let states = path_states(&body, &path, &inner, &rng.spawn(1 << 20))?;
            let v = clipped_martingale(&path, &states)?;
            let pair = maurey_decompose(v.endpoint(), v.endpoint_qv(), r, rng)?;
            let err = (pair.reconstruct() - v.endpoint()).amax();
            Ok((pair, err))
        })?;
        let b = std::slice::from_ref(&label);
        let err = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
        rows_push(&mut out, Row::new("maurey_reconstruction", b, n, err, s.seed).certified(true).param("r", r).check(None, Some(1e-12)))?;
        for i in 0..n {
            for z in [1, 2] {
                let xs: Vec<f64> = pairs.iter().map(|(p, _)| if z == 1 { p.z1[i] } else { p.z2[i] }).collect();
                let bt = gaussian_battery(&xs);
                let row = |op: &str, v: f64, se: f64| Row::new(op, b, n, v, s.seed).se(se).param("coordinate", i).param("z", z).param("r", r);
                rows_push(&mut out, row("maurey_mean", bt.mean, bt.mean_se).check(Some(-3.0 * bt.mean_se), Some(3.0 * bt.mean_se)))?;
                rows_push(&mut out, row("maurey_var", bt.var, bt.var_se).check(Some(1.0 - 3.0 * bt.var_se), Some(1.0 + 3.0 * bt.var_se)))?;
                rows_push(
                    &mut out,
                    row("maurey_kurtosis", bt.kurtosis, bt.kurtosis_se).check(Some(3.0 - 5.0 * bt.kurtosis_se), Some(3.0 + 5.0 * bt.kurtosis_se)),
                )?;
            }
        }
    }
    Ok(out)
}

fn convex_order(s: &Settings) -> Result<Outcome> {
    let root = RngStream::new(s.seed, 10);
    let inner = InnerConfig::new(s.inner);
    let mut out = Outcome::default();
    let r_lower = s.r.unwrap_or(0.25);
    for &n in &s.n {
        let (label, body) = first_body(s, n)?;
        let horizon = s.horizon_for(n);
        let grid = TimeGrid::new(horizon, s.steps)?;
        let runs = ensemble(s.paths, &root.spawn(n as u64), |_, rng| {
            let path = tilt_path_exact(&body, &grid, &inner.sampler, rng)?;
            let states = path_states(&body, &path, &inner, &rng.spawn(1 << 20))?;
            let v = clipped_martingale(&path, &states)?;
            Ok((v.endpoint().clone(), path.brownian()[grid.steps].clone()))
        })?;
        let (ends, bs): (Vec<Vector>, Vec<Vector>) = runs.into_iter().unzip();
        let (c, x) = (cube(n)?, cross_polytope(n)?);
        let functionals: [(&str, Functional<'_>); 3] = [
            ("square", Box::new(|v: &Vector| v.norm_squared())),
            ("cube_gauge", Box::new(|v: &Vector| c.gauge(v))),
            ("crosspoly_gauge", Box::new(|v: &Vector| x.gauge(v))),
        ];
        let b = std::slice::from_ref(&label);
        for (name, f) in &functionals {
            let rep = convex_order_check(name, f, &ends, &bs, r_lower, 4.0)?;
            for (op, cmp) in [("convex_order_lower", rep.lower), ("convex_order_upper", rep.upper)] {
                rows_push(
                    &mut out,
                    Row::new(op, b, n, cmp.mean_diff, s.seed)
                        .se(cmp.se)
                        .param("functional", *name)
                        .param("r_lower", r_lower)
                        .param("r_upper", 4.0)
                        .check(Some(-3.0 * cmp.se), None),
                )?;
            }
        }
    }
    Ok(out)
}

fn freedman(s: &Settings) -> Result<Outcome> {
    let root = RngStream::new(s.seed, 11);
    let mut out = Outcome::default();
    for (i, &b) in s.b.iter().enumerate() {
        let rng = root.spawn(i as u64);
        let constant = freedman_check(b, 1.0, &s.a, s.paths, s.steps, Volatility::Constant, &rng.spawn(0))?;
        for row in &constant.rows {
            let base = |op: &str| Row::new(op, &[], 1, row.exceedance, s.seed).se(row.se).param("a", row.a).param("b", b).param("bound", row.bound);
            rows_push(&mut out, base("freedman").check(None, Some(row.bound + 3.0 * row.se)))?;
            if let Some(p) = row.reflection {
                let se = binomial_se(p, row.paths);
                rows_push(&mut out, base("freedman_reflection").param("reflection", p).check(Some(p - 3.0 * se), Some(p + 3.0 * se)))?;
            }
        }
        let adaptive = freedman_check(b, 1.0, &s.a, s.paths, s.steps.max(50), Volatility::Adaptive { low: 0.3 }, &rng.spawn(1))?;
        for row in &adaptive.rows {
            rows_push(
                &mut out,
                Row::new("freedman_adaptive", &[], 1, row.exceedance, s.seed)
                    .se(row.se)
                    .param("a", row.a)
                    .param("b", b)
                    .param("bound", row.bound)
                    .check(None, Some(row.bound + 3.0 * row.se)),
            )?;
        }
    }
    Ok(out)
}
