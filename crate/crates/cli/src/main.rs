use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use isoloc_cli::config::{parse_pair, BodyEntry, ConstantOverrides, ExperimentConfig, Settings};
use isoloc_cli::plot::plot_record;
use isoloc_cli::verify::verify_record;
use isoloc_core::bodies::NAMED_BODIES;

const RUN_HELP: &str = "\
Experiments:
  sandwich      E‖X‖_K / E‖G‖_K for every (X, K) pair, plus sup-norm magnitudes
                of the isotropic cube, Gaussian and Laplace vectors
  mm            M(K)·√n/(ψ·√log n), M*(K)/(√n·log² n) and E‖G‖_K − α_n·M(K)
  localize      covariance traces of exact-driver localization paths
  maurey        Gaussian battery of the Maurey pair of clipped-martingale endpoints
  convex-order  paired comparisons E F(√r B_T) ≤ E F(M_T) ≤ E F(2 B_T)
  kahane        (E‖G‖^p)^{1/p} / E‖G‖ for each p
  chevet        E‖Γ : K → T‖ and E‖U : K → T‖ against their comparison bounds
  rotate        90th percentile of U(K₁) ⊆ λK₂ over Haar rotations
  partial       β-quantile of ‖X‖_K over X uniform in T, and the symmetric bound
  dbm           rotation-search Banach–Mazur certificates
  dpc           partial-containment distance certificates
  freedman      sup-exceedance of martingales with bounded quadratic variation

Output: OUTDIR/{record.jsonl, tables/*.csv, plots/*.svg, config.json}.

record.jsonl has one JSON object per line with keys
  op, bodies, n, params, value, se, seed, certified
The first line (op \"experiment\") holds the experiment name, version and
wall-clock time. Rows carrying params.check = {lo, hi, holds} assert
lo ≤ value ≤ hi.

tables/<experiment>.csv columns:
  op,bodies,n,<scalar params, sorted>,value,se,lo,hi,holds
where the scalar params are
  sandwich      e_g,e_g_se,e_x,e_x_se,samples
  mm            alpha_m,e_g,m,mstar
  localize      horizon,paths
  maurey        coordinate,r,z
  convex-order  functional,r_lower,r_upper
  kahane        p
  chevet        bound,lhs,max_offdiag_z,trials
  rotate        lower,quantile,rotations,upper
  partial       beta,isotropic,lower,upper
  dbm           isotropic,rotations
  dpc           beta,isotropic
  freedman      a,b,bound,reflection
localize also writes tables/trace_n<N>_p<PATH>_b<J>.csv with columns
  t,lambda_min,lambda_max,f_beta,g_beta,se_scale,exited_window
for the proxy parameters β₀ = 2 log n and β₁ = 8 log n.

Exit status: 0 when every check holds, 2 when a check fails, 1 on errors.";

#[derive(Parser)]
#[command(name = "isoloc", version, about = "Stochastic localization and convex-body estimators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment
    #[command(after_long_help = RUN_HELP)]
    Run(Box<RunArgs>),
    /// Render the charts of a record into plots/ beside it
    Plot { record: PathBuf },
    /// Re-check every certificate and property flag of a record
    Verify { record: PathBuf },
    /// Named bodies and literal formats
    Bodies {
        #[command(subcommand)]
        command: BodiesCommand,
    },
}

#[derive(Subcommand)]
enum BodiesCommand {
    List,
}

#[derive(Args)]
struct RunArgs {
    experiment: String,
    /// JSON config; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dimensions, e.g. 4,8,16
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Body names or JSON literals, comma separated
    #[arg(long)]
    bodies: Option<String>,
    /// Body pairs first:second, repeatable or comma separated
    #[arg(long = "pair", value_delimiter = ',')]
    pairs: Option<Vec<String>>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    paths: Option<usize>,
    /// Inner Monte Carlo samples per measure state
    #[arg(long)]
    inner: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    rotations: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    a: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    b: Option<Vec<f64>>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    isotropic: Option<bool>,
    /// Falls back to the config file, then ISOLOC_SEED
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    outdir: Option<PathBuf>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    upper: Option<f64>,
    #[arg(long)]
    lower: Option<f64>,
}

/// Splits on commas outside braces and brackets, so JSON literals survive.
fn split_top_level(s: &str) -> Vec<String> {
    let (mut depth, mut cur, mut out) = (0i32, String::new(), Vec::new());
    for c in s.chars() {
        match c {
            '{' | '[' => depth += 1,
            '}' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur).trim().to_string());
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

impl RunArgs {
    fn settings(self) -> Result<Settings> {
        let base = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        let bodies = self.bodies.as_deref().map(|s| split_top_level(s).iter().map(|b| BodyEntry::from_label(b)).collect()).transpose()?;
        if let Some(p) = &self.pairs {
            p.iter().try_for_each(|s| parse_pair(s).map(|_| ()))?;
        }
        let constants = (self.kappa.is_some() || self.upper.is_some() || self.lower.is_some())
            .then_some(ConstantOverrides { kappa: self.kappa, upper: self.upper, lower: self.lower });
        let flags = ExperimentConfig {
            experiment: Some(self.experiment),
            bodies,
            pairs: self.pairs,
            n: self.n,
            samples: self.samples,
            paths: self.paths,
            inner: self.inner,
            horizon: self.horizon,
            steps: self.steps,
            rotations: self.rotations,
            trials: self.trials,
            beta: self.beta,
            p: self.p,
            a: self.a,
            b: self.b,
            r: self.r,
            isotropic: self.isotropic,
            seed: self.seed,
            outdir: self.outdir,
            constants,
        };
        let env_seed = match std::env::var("ISOLOC_SEED") {
            Ok(v) => Some(v.trim().parse::<u64>().context("ISOLOC_SEED is not an unsigned integer")?),
            Err(_) => None,
        };
        Settings::resolve(base.merge(flags), env_seed)
    }
}

fn list_bodies() {
    let about = |name: &str| match name {
        "cube" => "[-1, 1]^n; isotropic scale √3",
        "crosspoly" => "unit ℓ¹ ball conv(±eᵢ); isotropic scale √((n+1)(n+2)/2)",
        "simplex" => "regular simplex with unit circumradius; isotropic scale √(n(n+2))",
        "ball" => "Euclidean unit ball; isotropic scale √(n+2)",
        _ => "",
    };
    for name in NAMED_BODIES {
        println!("{name:<10} {}", about(name));
    }
    println!();
    println!("Literals (JSON):");
    println!(r#"  {{"type":"hpoly","A":[[1,0],[-1,0],[0,1],[0,-1]],"b":[1,1,1,1]}}"#);
    println!(r#"  {{"type":"vpoly","vertices":[[1,0],[0,1],[-1,-1]]}}"#);
    println!(r#"  {{"type":"ball","r":2.0,"n":3}}"#);
    println!(r#"  {{"type":"named","name":"cube","n":4}}"#);
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(args) => {
            let settings = args.settings()?;
            let s = isoloc_cli::run(&settings)?;
            println!("{} rows written to {}", s.rows, s.outdir.display());
            if s.violations > 0 {
                eprintln!("{} check(s) failed", s.violations);
                return Ok(ExitCode::from(2));
            }
        }
        Command::Plot { record } => {
            for p in plot_record(&record)? {
                println!("{}", p.display());
            }
        }
        Command::Verify { record } => {
            let r = verify_record(&record)?;
            for f in &r.failures {
                println!("FAIL {f}");
            }
            println!(
                "{}: {} rows, {} certificates, {} checks, {} failures",
                if r.passed() { "pass" } else { "fail" },
                r.rows,
                r.certificates,
                r.checks,
                r.failures.len()
            );
            if !r.passed() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Bodies { command: BodiesCommand::List } => list_bodies(),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::split_top_level;

    #[test]
    fn literals_keep_their_commas() {
        let parts = split_top_level(r#"cube, {"type":"ball","r":2,"n":3},simplex"#);
        assert_eq!(parts, vec!["cube", r#"{"type":"ball","r":2,"n":3}"#, "simplex"]);
    }
}
