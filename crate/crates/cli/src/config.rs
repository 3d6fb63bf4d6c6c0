//! Experiment configuration: a JSON file merged with command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use isoloc_core::bodies::{BodySpec, NAMED_BODIES};
use isoloc_core::estimators::TheoryConstants;
use serde::{Deserialize, Serialize};

pub const EXPERIMENTS: [&str; 12] = [
    "sandwich",
    "mm",
    "localize",
    "maurey",
    "convex-order",
    "kahane",
    "chevet",
    "rotate",
    "partial",
    "dbm",
    "dpc",
    "freedman",
];

/// A body named in [`NAMED_BODIES`] or a JSON literal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BodyEntry {
    Name(String),
    Literal(BodySpec),
}

impl BodyEntry {
    pub fn label(&self) -> String {
        match self {
            BodyEntry::Name(s) => s.clone(),
            BodyEntry::Literal(spec) => serde_json::to_string(spec).expect("body literal serializes"),
        }
    }

    /// Inverse of [`BodyEntry::label`].
    pub fn from_label(label: &str) -> Result<Self> {
        if label.trim_start().starts_with('{') {
            Ok(BodyEntry::Literal(BodySpec::parse(label)?))
        } else {
            Ok(BodyEntry::Name(label.to_string()))
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantOverrides {
    pub kappa: Option<f64>,
    pub upper: Option<f64>,
    pub lower: Option<f64>,
}

/// Every field is optional; unset fields take per-experiment defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bodies: Option<Vec<BodyEntry>>,
    /// `"first:second"` name pairs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rotations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isotropic: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outdir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantOverrides>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("invalid config")
    }

    /// Fields set in `flags` replace those in `self`.
    pub fn merge(self, flags: ExperimentConfig) -> ExperimentConfig {
        macro_rules! pick {
            ($($f:ident),*) => {
                ExperimentConfig { $($f: flags.$f.or(self.$f)),* }
            };
        }
        let constants = match (self.constants, flags.constants) {
            (Some(c), Some(f)) => Some(ConstantOverrides {
                kappa: f.kappa.or(c.kappa),
                upper: f.upper.or(c.upper),
                lower: f.lower.or(c.lower),
            }),
            (c, f) => f.or(c),
        };
        let merged = pick!(
            experiment, bodies, pairs, n, samples, paths, inner, horizon, steps, rotations, trials, beta, p, a, b, r,
            isotropic, seed, outdir, constants
        );
        ExperimentConfig { constants, ..merged }
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub experiment: String,
    pub bodies: Vec<BodyEntry>,
    pub pairs: Vec<(BodyEntry, BodyEntry)>,
    pub n: Vec<usize>,
    pub samples: usize,
    pub paths: usize,
    pub inner: usize,
    pub horizon: Option<f64>,
    pub steps: usize,
    pub rotations: usize,
    pub trials: usize,
    pub beta: f64,
    pub p: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub r: Option<f64>,
    pub isotropic: bool,
    pub seed: u64,
    pub outdir: PathBuf,
    pub constants: TheoryConstants,
}

fn default_n(experiment: &str) -> Vec<usize> {
    match experiment {
        "sandwich" | "kahane" => vec![8],
        "mm" | "rotate" | "partial" => vec![4, 8, 16],
        "chevet" => vec![2, 4, 8],
        "freedman" => vec![1],
        _ => vec![4],
    }
}

fn default_pairs(experiment: &str) -> Vec<&'static str> {
    match experiment {
        "rotate" => vec!["crosspoly:simplex", "simplex:crosspoly"],
        "partial" => vec!["cube:crosspoly", "cube:simplex"],
        "chevet" => vec!["cube:crosspoly", "crosspoly:simplex", "simplex:cube"],
        _ => vec!["cube:crosspoly"],
    }
}

fn default_bodies(experiment: &str) -> Vec<&'static str> {
    match experiment {
        "localize" | "maurey" | "convex-order" => vec!["cube"],
        "kahane" => vec!["cube", "crosspoly", "simplex"],
        _ => NAMED_BODIES.to_vec(),
    }
}

pub fn parse_pair(s: &str) -> Result<(BodyEntry, BodyEntry)> {
    match s.split_once(':') {
        Some((a, b)) if !a.is_empty() && !b.is_empty() => Ok((BodyEntry::Name(a.into()), BodyEntry::Name(b.into()))),
        _ => bail!("pair {s:?} is not of the form first:second"),
    }
}

impl Settings {
    /// `env_seed` is used only when neither the config nor the flags set a seed.
    pub fn resolve(cfg: ExperimentConfig, env_seed: Option<u64>) -> Result<Settings> {
        let experiment = cfg.experiment.clone().context("no experiment given")?;
        if !EXPERIMENTS.contains(&experiment.as_str()) {
            bail!("unknown experiment {experiment:?} (expected one of {})", EXPERIMENTS.join(", "));
        }
        let seed = cfg.seed.or(env_seed).context("a seed is required: pass --seed, set it in the config, or set ISOLOC_SEED")?;
        let e = experiment.as_str();
        let bodies = cfg.bodies.unwrap_or_else(|| default_bodies(e).into_iter().map(|s| BodyEntry::Name(s.into())).collect());
        let pairs = match cfg.pairs {
            Some(p) => p.iter().map(|s| parse_pair(s)).collect::<Result<_>>()?,
            None => default_pairs(e).into_iter().map(parse_pair).collect::<Result<_>>()?,
        };
        let n = cfg.n.unwrap_or_else(|| default_n(e));
        if n.is_empty() || n.contains(&0) {
            bail!("dimensions must be positive");
        }
        let defaults = TheoryConstants::default();
        let c = cfg.constants.unwrap_or_default();
        let beta = cfg.beta.unwrap_or(0.99);
        if !(beta > 0.0 && beta < 1.0) {
            bail!("beta must lie in (0, 1)");
        }
        Ok(Settings {
            bodies,
            pairs,
            n,
            samples: cfg.samples.unwrap_or(20_000),
            paths: cfg.paths.unwrap_or(match e {
                "freedman" => 10_000,
                "localize" => 50,
                _ => 200,
            }),
            inner: cfg.inner.unwrap_or(2_000),
            horizon: cfg.horizon,
            steps: cfg.steps.unwrap_or(8),
            rotations: cfg.rotations.unwrap_or(1_000),
            trials: cfg.trials.unwrap_or(200),
            beta,
            p: cfg.p.unwrap_or_else(|| vec![2.0, 4.0, 8.0]),
            a: cfg.a.unwrap_or_else(|| vec![0.5, 1.0, 1.5, 2.0]),
            b: cfg.b.unwrap_or_else(|| vec![0.5, 1.0]),
            r: cfg.r,
            isotropic: cfg.isotropic.unwrap_or(true),
            seed,
            outdir: cfg.outdir.unwrap_or_else(|| PathBuf::from(format!("isoloc-{experiment}"))),
            constants: TheoryConstants {
                kappa: c.kappa.unwrap_or(defaults.kappa),
                upper: c.upper.unwrap_or(defaults.upper),
                lower: c.lower.unwrap_or(defaults.lower),
            },
            experiment,
        })
    }

    /// Horizon of the localization experiments: `1/(32κ̂² log n)` unless set.
    pub fn horizon_for(&self, n: usize) -> f64 {
        self.horizon.unwrap_or_else(|| 1.0 / (32.0 * self.constants.kappa.powi(2) * (n.max(2) as f64).ln()))
    }

    /// The snapshot written to `config.json`; it re-runs to the same record.
    pub fn snapshot(&self) -> ExperimentConfig {
        ExperimentConfig {
            experiment: Some(self.experiment.clone()),
            bodies: Some(self.bodies.clone()),
            pairs: Some(self.pairs.iter().map(|(a, b)| format!("{}:{}", a.label(), b.label())).collect()),
            n: Some(self.n.clone()),
            samples: Some(self.samples),
            paths: Some(self.paths),
            inner: Some(self.inner),
            horizon: self.horizon,
            steps: Some(self.steps),
            rotations: Some(self.rotations),
            trials: Some(self.trials),
            beta: Some(self.beta),
            p: Some(self.p.clone()),
            a: Some(self.a.clone()),
            b: Some(self.b.clone()),
            r: self.r,
            isotropic: Some(self.isotropic),
            seed: Some(self.seed),
            outdir: Some(self.outdir.clone()),
            constants: Some(ConstantOverrides {
                kappa: Some(self.constants.kappa),
                upper: Some(self.constants.upper),
                lower: Some(self.constants.lower),
            }),
        }
    }
}
