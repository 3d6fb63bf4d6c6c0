//! Result rows, tables and the on-disk layout of a run.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use isoloc_core::EstimateRecord;
use serde::Serialize;
use serde_json::{json, Map, Value};

/// Builder for one [`EstimateRecord`].
pub struct Row(EstimateRecord);

impl Row {
    pub fn new(op: &str, bodies: &[String], n: usize, value: f64, seed: u64) -> Row {
        Row(EstimateRecord {
            op: op.into(),
            bodies: bodies.to_vec(),
            n,
            params: Value::Object(Map::new()),
            value,
            se: None,
            seed,
            certified: false,
        })
    }

    pub fn se(mut self, se: f64) -> Row {
        self.0.se = Some(se);
        self
    }

    pub fn certified(mut self, certified: bool) -> Row {
        self.0.certified = certified;
        self
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Row {
        let v = serde_json::to_value(value).expect("parameter serializes");
        self.0.params.as_object_mut().expect("params is an object").insert(key.into(), v);
        self
    }

    /// Attaches the property `lo ≤ value ≤ hi`; `verify` re-evaluates it.
    pub fn check(self, lo: Option<f64>, hi: Option<f64>) -> Row {
        let holds = check_holds(self.0.value, lo, hi);
        self.param("check", json!({"lo": lo, "hi": hi, "holds": holds}))
    }

    pub fn build(self) -> Result<EstimateRecord> {
        if !self.0.value.is_finite() {
            bail!("{} produced a non-finite value", self.0.op);
        }
        Ok(self.0)
    }
}

pub fn check_holds(value: f64, lo: Option<f64>, hi: Option<f64>) -> bool {
    value.is_finite() && lo.map_or(true, |l| value >= l) && hi.map_or(true, |h| value <= h)
}

/// `(lo, hi, holds)` of a row's property, if it has one.
/// `(lo, hi, holds)` of a row's check object.
pub type CheckFields = (Option<f64>, Option<f64>, bool);

pub fn row_check(rec: &EstimateRecord) -> Result<Option<CheckFields>> {
    let Some(c) = rec.params.get("check") else { return Ok(None) };
    let bound = |k: &str| -> Result<Option<f64>> {
        match c.get(k) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v.as_f64().map(Some).with_context(|| format!("check bound {k} is not a number")),
        }
    };
    let holds = c.get("holds").and_then(Value::as_bool).context("check lacks its holds flag")?;
    Ok(Some((bound("lo")?, bound("hi")?, holds)))
}

pub struct Table {
    pub name: String,
    pub text: String,
}

/// Everything an experiment produces besides the run metadata.
#[derive(Default)]
pub struct Outcome {
    pub rows: Vec<EstimateRecord>,
    pub tables: Vec<Table>,
}

impl Outcome {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| matches!(row_check(r), Ok(Some((_, _, false))))).count()
    }
}

fn csv_field(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// `op,bodies,n,<scalar params>,value,se,lo,hi,holds`, with the scalar
/// parameters sorted by name.
pub fn rows_table(rows: &[EstimateRecord]) -> Result<String> {
    let keys: BTreeSet<&String> = rows
        .iter()
        .filter_map(|r| r.params.as_object())
        .flat_map(|m| m.iter().filter(|(_, v)| !v.is_object() && !v.is_array()).map(|(k, _)| k))
        .collect();
    let mut out = String::from("op,bodies,n");
    for k in &keys {
        write!(out, ",{k}")?;
    }
    out.push_str(",value,se,lo,hi,holds\n");
    for r in rows {
        write!(out, "{},{},{}", r.op, csv_field(&Value::String(r.bodies.join(":"))), r.n)?;
        for k in &keys {
            write!(out, ",{}", r.params.get(k.as_str()).map(csv_field).unwrap_or_default())?;
        }
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let (lo, hi, holds) = match row_check(r)? {
            Some((lo, hi, h)) => (opt(lo), opt(hi), h.to_string()),
            None => (String::new(), String::new(), String::new()),
        };
        writeln!(out, ",{},{},{lo},{hi},{holds}", r.value, opt(r.se))?;
    }
    Ok(out)
}

pub fn record_path(outdir: &Path) -> PathBuf {
    outdir.join("record.jsonl")
}

pub fn write_record(path: &Path, rows: &[EstimateRecord]) -> Result<()> {
    let mut text = String::new();
    for r in rows {
        text.push_str(&r.to_line()?);
        text.push('\n');
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_record(path: &Path) -> Result<Vec<EstimateRecord>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| EstimateRecord::from_line(l).with_context(|| format!("{}:{}", path.display(), i + 1)))
        .collect()
}

/// Op of the metadata line that opens every record.
pub const META_OP: &str = "experiment";

pub fn experiment_of(rows: &[EstimateRecord]) -> Option<String> {
    rows.iter()
        .find(|r| r.op == META_OP)
        .and_then(|r| r.params.get("experiment")?.as_str().map(str::to_string))
}
