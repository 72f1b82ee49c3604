//! `bchlab`: Chern characters, super parallel transport and the Bismut–Chern
//! character on discretized loop space, from the command line.

mod commands;
mod config;
mod error;
mod output;
mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, Overrides};
use error::CliError;
use output::{write_csv, ResultRow};

#[derive(Parser)]
#[command(name = "bchlab", version, about = "Loop-space Chern character experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Chern number and pointwise Chern form of a bundle.
    Chern(Flags),
    /// Bismut–Chern character along a loop by both routes.
    Bch(Flags),
    /// Dump the super parallel transport along a loop.
    Sp(Flags),
    /// Run a verification suite.
    Verify(Flags),
}

#[derive(Args)]
struct Flags {
    /// Bundle id, e.g. `cp1-tautological` or `t2-flux:k=2`.
    #[arg(long)]
    bundle: Option<String>,
    /// Loop spec, e.g. `latitude:alpha=1.0` or `random-fourier:modes=3,seed=1`.
    #[arg(long = "loop")]
    loop_spec: Option<String>,
    /// Field spec: `none` or `random:p=<count>[,seed=<s>]`.
    #[arg(long)]
    fields: Option<String>,
    /// Integration steps along the loop.
    #[arg(long)]
    steps: Option<usize>,
    /// Integrator: `rk4` or `midpoint`.
    #[arg(long)]
    method: Option<String>,
    /// Quadrature nodes per chart direction.
    #[arg(long)]
    quad: Option<usize>,
    /// Tolerance applied to every compared row.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Verification suite for `verify`.
    #[arg(long)]
    suite: Option<String>,
    /// Use the reversed composition order in the loop-deloop route.
    #[arg(long)]
    reverse: bool,
}

impl Flags {
    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        cfg.apply(&Overrides {
            bundle: self.bundle.clone(),
            loop_spec: self.loop_spec.clone(),
            fields: self.fields.clone(),
            method: self.method.clone(),
            steps: self.steps,
            quad: self.quad,
            tol: self.tol,
            seed: self.seed,
            out: self.out.clone(),
            suite: self.suite.clone(),
            reverse: self.reverse,
        })?;
        Ok(cfg)
    }
}

fn init_pool() -> Result<(), CliError> {
    let Ok(value) = std::env::var("BCHLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("BCHLAB_THREADS must be a thread count, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("worker pool: {e}")))
}

fn emit(cfg: &ExperimentConfig, rows: &[ResultRow]) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            write_csv(&mut w, cfg.seed, rows)?;
            w.flush()?;
        }
        None => write_csv(io::stdout().lock(), cfg.seed, rows)?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    init_pool()?;
    let (cfg, rows) = match &cli.command {
        Command::Chern(f) => {
            let cfg = f.resolve()?;
            let rows = commands::chern(&cfg)?;
            (cfg, rows)
        }
        Command::Bch(f) => {
            let cfg = f.resolve()?;
            let rows = commands::bch(&cfg)?;
            (cfg, rows)
        }
        Command::Sp(f) => {
            let cfg = f.resolve()?;
            let rows = commands::sp(&cfg)?;
            (cfg, rows)
        }
        Command::Verify(f) => {
            let cfg = f.resolve()?;
            let rows = verify::run(&cfg.suite, cfg.seed, cfg.tol)?;
            (cfg, rows)
        }
    };
    emit(&cfg, &rows)?;
    let failed: Vec<&ResultRow> = rows.iter().filter(|r| !r.passes()).collect();
    if let Command::Verify(_) = cli.command {
        eprintln!("verify {}: {} checks, {} failed", cfg.suite, rows.len(), failed.len());
    }
    for r in &failed {
        eprintln!("check failed: {}", r.quantity);
    }
    Ok(failed.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("bchlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
