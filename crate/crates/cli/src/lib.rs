//! Experiment orchestration for `isoloc`: configuration, the experiment
//! registry, on-disk records, plots and verification.

pub mod config;
pub mod experiments;
pub mod plot;
pub mod record;
pub mod resolve;
pub mod svg;
pub mod verify;

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};

use config::Settings;
use record::{record_path, rows_table, write_record, Row, META_OP};

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub outdir: PathBuf,
    pub rows: usize,
    pub violations: usize,
    pub plots: Vec<PathBuf>,
}

/// Runs an experiment and writes `record.jsonl`, `tables/`, `plots/` and
/// `config.json` under the output directory.
pub fn run(settings: &Settings) -> Result<RunSummary> {
    let start = Instant::now();
    let outcome = experiments::run_experiment(settings)?;
    let outdir = settings.outdir.clone();
    let tables = outdir.join("tables");
    std::fs::create_dir_all(&tables).with_context(|| format!("creating {}", tables.display()))?;

    let snapshot = serde_json::to_string_pretty(&settings.snapshot())?;
    std::fs::write(outdir.join("config.json"), snapshot + "\n")?;

    let labels: Vec<String> = settings.bodies.iter().map(|b| b.label()).collect();
    let meta = Row::new(META_OP, &labels, settings.n.iter().copied().max().unwrap_or(0), outcome.rows.len() as f64, settings.seed)
        .certified(true)
        .param("experiment", &settings.experiment)
        .param("version", env!("CARGO_PKG_VERSION"))
        .param("wall_clock_seconds", start.elapsed().as_secs_f64())
        .build()?;
    let mut rows = vec![meta];
    rows.extend(outcome.rows.iter().cloned());
    let record = record_path(&outdir);
    write_record(&record, &rows)?;

    std::fs::write(tables.join(format!("{}.csv", settings.experiment)), rows_table(&outcome.rows)?)?;
    for t in &outcome.tables {
        std::fs::write(tables.join(format!("{}.csv", t.name)), &t.text)?;
    }
    let plots = plot::plot_record(&record)?;
    Ok(RunSummary { outdir, rows: outcome.rows.len(), violations: outcome.violations(), plots })
}
