//! Charts from a record: one per result op (value against `n`, or against
//! `a` for the tail experiment) with dashed bound curves, plus one per
//! trace statistic for localization runs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use isoloc_core::EstimateRecord;

use crate::record::{read_record, row_check, META_OP};
use crate::svg::{Chart, Style};

const SERIES_PARAMS: [&str; 5] = ["b", "p", "functional", "coordinate", "z"];
const TRACE_STATS: [&str; 5] = ["lambda_min", "lambda_max", "f_beta", "g_beta", "se_scale"];
const MAX_TRACE_PATHS: usize = 40;

fn series_key(r: &EstimateRecord) -> String {
    let mut key = r.bodies.join(":");
    for p in SERIES_PARAMS {
        if let Some(v) = r.params.get(p) {
            let v = v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string());
            key = if key.is_empty() { format!("{p}={v}") } else { format!("{key} {p}={v}") };
        }
    }
    if key.is_empty() {
        "value".into()
    } else {
        key
    }
}

fn op_chart(op: &str, rows: &[&EstimateRecord]) -> Result<Chart> {
    let x_key = if rows.iter().all(|r| r.params.get("a").is_some()) { "a" } else { "n" };
    let x_of = |r: &EstimateRecord| -> f64 {
        if x_key == "a" {
            r.params["a"].as_f64().unwrap_or(f64::NAN)
        } else {
            r.n as f64
        }
    };
    let mut values: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut bounds: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        let key = series_key(r);
        values.entry(key.clone()).or_default().push((x_of(r), r.value));
        if let Some((lo, hi, _)) = row_check(r)? {
            for (side, b) in [("lower", lo), ("upper", hi)] {
                if let Some(b) = b.filter(|b| b.is_finite()) {
                    bounds.entry(format!("{key} {side}")).or_default().push((x_of(r), b));
                }
            }
        }
    }
    let mut chart = Chart::new(op, x_key, "value");
    for (name, mut pts) in values {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let style = if pts.windows(2).any(|w| w[0].0 != w[1].0) { Style::Line } else { Style::Scatter };
        chart.push(&name, pts, style);
    }
    let mut seen: Vec<Vec<(f64, f64)>> = Vec::new();
    for (name, mut pts) in bounds {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if !seen.contains(&pts) {
            seen.push(pts.clone());
            let style = if pts.len() > 1 { Style::Dashed } else { Style::Scatter };
            chart.push(&format!("bound {name}"), pts, style);
        }
    }
    Ok(chart)
}

fn parse_trace(path: &Path) -> Result<BTreeMap<String, Vec<f64>>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().context("empty trace table")?.split(',').collect();
    let mut cols: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for name in ["t"].iter().chain(TRACE_STATS.iter()) {
        if !header.contains(name) {
            bail!("{} lacks column {name}", path.display());
        }
    }
    for line in lines.filter(|l| !l.is_empty()) {
        for (h, v) in header.iter().zip(line.split(',')) {
            if let Ok(x) = v.parse::<f64>() {
                cols.entry(h.to_string()).or_default().push(x);
            }
        }
    }
    Ok(cols)
}

fn trace_charts(tables: &Path) -> Result<Vec<(String, Chart)>> {
    let mut files: Vec<PathBuf> = match std::fs::read_dir(tables) {
        Ok(d) => d.filter_map(|e| e.ok().map(|e| e.path())).collect(),
        Err(_) => return Ok(vec![]),
    };
    files.retain(|p| {
        let name = p.file_name().and_then(|s| s.to_str()).unwrap_or("");
        name.starts_with("trace_n") && name.ends_with("_b0.csv")
    });
    files.sort();
    let mut by_n: BTreeMap<String, Vec<PathBuf>> = BTreeMap::new();
    for f in files {
        let name = f.file_name().and_then(|s| s.to_str()).unwrap_or("").to_string();
        let n = name.trim_start_matches("trace_n").split('_').next().unwrap_or("").to_string();
        by_n.entry(n).or_default().push(f);
    }
    let mut charts = Vec::new();
    for (n, files) in by_n {
        let traces: Vec<BTreeMap<String, Vec<f64>>> = files.iter().take(MAX_TRACE_PATHS).map(|f| parse_trace(f)).collect::<Result<_>>()?;
        for stat in TRACE_STATS {
            let mut chart = Chart::new(&format!("{stat} (n = {n})"), "t", stat);
            chart.legend_limit = 0;
            for (i, tr) in traces.iter().enumerate() {
                let pts = tr["t"].iter().copied().zip(tr.get(stat).cloned().unwrap_or_default()).collect();
                chart.push(&format!("path {i}"), pts, Style::Line);
            }
            charts.push((format!("trace_n{n}_{stat}"), chart));
        }
    }
    Ok(charts)
}

/// Writes `plots/*.svg` next to the record. Nothing is written if any
/// chart fails to build.
pub fn plot_record(record: &Path) -> Result<Vec<PathBuf>> {
    let rows = read_record(record)?;
    let data: Vec<&EstimateRecord> = rows.iter().filter(|r| r.op != META_OP).collect();
    if data.is_empty() {
        bail!("record {} has no result rows", record.display());
    }
    let dir = record.parent().unwrap_or(Path::new("."));
    let mut by_op: BTreeMap<&str, Vec<&EstimateRecord>> = BTreeMap::new();
    for r in &data {
        by_op.entry(r.op.as_str()).or_default().push(r);
    }
    let mut rendered = Vec::new();
    for (op, rows) in by_op {
        rendered.push((op.to_string(), op_chart(op, &rows)?.render()?));
    }
    for (name, chart) in trace_charts(&dir.join("tables"))? {
        rendered.push((name, chart.render()?));
    }
    let plots = dir.join("plots");
    std::fs::create_dir_all(&plots)?;
    let mut written = Vec::new();
    for (name, svg) in rendered {
        let path = plots.join(format!("{name}.svg"));
        std::fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}

