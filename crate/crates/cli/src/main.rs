#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use crate::config::{RunConfig, Solver};

/// Cross-point robust multi-trace domain decomposition for 2D Helmholtz problems.
#[derive(Debug, Parser)]
#[command(name = "mtf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat `key = value` run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    solver: Option<Solver>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    omega: Option<f64>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Extra `key=value` overrides applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate or load the mesh, write it and report the partition.
    Mesh,
    /// Solve the skeleton equation and write the field and a JSON report.
    Solve,
    /// Run the invariant suite; exit code 3 if any check fails.
    Verify,
    /// Sweep one parameter and tabulate iterations, α and errors.
    Study {
        /// `beta=…`, `h=…`, `omega=…` or `gamma=…` with comma separated values.
        #[arg(long, default_value = "beta=0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
        ladder: String,
    },
}

#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Numerical(anyhow::Error),
    Verification(usize),
}

impl Failure {
    pub fn classify(e: mtf_core::Error) -> Self {
        use mtf_core::Error as E;
        match e {
            E::SingularPivot { .. } | E::Factorization(_) | E::Overflow(_) | E::KernelSingularity | E::Breakdown(_) => {
                Failure::Numerical(e.into())
            }
            _ => Failure::Usage(e.into()),
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Verification(_) => 3,
        }
    }
}

fn resolve(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("--set expects KEY=VALUE, got {kv:?}"))?;
        cfg.set(k.trim(), v.trim()).with_context(|| format!("--set {kv}"))?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(s) = cli.solver {
        cfg.solver = s;
    }
    if let Some(b) = cli.beta {
        cfg.beta = b;
    }
    if cli.omega.is_some() {
        cfg.omega = cli.omega;
    }
    if cli.gamma.is_some() {
        cfg.gamma = cli.gamma;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = resolve(cli).map_err(Failure::Usage)?;
    std::fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating {}", cli.out.display()))
        .map_err(Failure::Usage)?;
    match &cli.command {
        Command::Mesh => commands::cmd_mesh(&cfg, &cli.out),
        Command::Solve => commands::cmd_solve(&cfg, &cli.out),
        Command::Verify => commands::cmd_verify(&cfg, &cli.out),
        Command::Study { ladder } => {
            let (param, values) = commands::parse_ladder(ladder).map_err(Failure::Usage)?;
            commands::cmd_study(&cfg, &cli.out, param, &values)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(e) => eprintln!("error: {e:#}"),
                Failure::Numerical(e) => eprintln!("numerical failure: {e:#}"),
                Failure::Verification(n) => eprintln!("verification failed: {n} check(s) out of tolerance"),
            }
            ExitCode::from(f.code())
        }
    }
}
