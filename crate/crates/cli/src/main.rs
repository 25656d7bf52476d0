mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;

use commands::Command;
use config::Config;
use error::CliError;
use output::Manifest;

const KEYS_HELP: &str = "\
CONFIG KEYS (flat `key = value`, `#` comments, lists comma-separated):
  model.h, model.v [1], model.x0 | model.dim [1]      first fOU process
  model2.h, model2.v, model2.x0                        second process (defaults to model.*)
  grid.t [1], grid.n [256]                             horizon and step count
  grid.generator [fbm-circulant]                       fbm-circulant | fbm-cholesky | volterra
  mc.paths, mc.seed [1]                                ensemble size and master seed
  query.x [0], query.t, query.eps [0.05], query.k [0]  local-time arguments
  output.prefix [<command>]                            output path prefix
  localtime.kind [single]                              single | intersection
  sweep.values                                         x values (localtime), epsilons (convergence),
                                                       increments or separations (scaling)
  sweep.ratio [0.5]                                    theta = ratio * epsilon (convergence)
  sweep.snap [false]                                   snap increments to the grid (scaling)
  scaling.kind [temporal]                              temporal | spatial | holder
  scaling.order [2], scaling.tolerance [0.15 | 0.2]    moment order, --check slope tolerance
  lattice.lo [-4], lattice.hi [4], lattice.spacing     x lattice of the holder sup search
  bounds.h [0.3,0.5,0.7], bounds.grids [100],          probe Hurst values, grid count,
  bounds.seed, bounds.floor [1e-6]                     probe seed and --check floor
  condition.kind [existence], condition.delta          existence | holder

ENVIRONMENT:
  FOULT_THREADS   worker threads (0 or unset = all cores); outputs do not depend on it

EXIT STATUS:
  0 success, 1 config or I/O error, 2 numerical failure, 3 --check failure";

/// Monte Carlo experiments on fractional Ornstein-Uhlenbeck local times.
#[derive(Debug, Parser)]
#[command(name = "foult", version, after_long_help = KEYS_HELP)]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    /// Experiment configuration file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Enforce the acceptance tolerances; exit 3 when they fail.
    #[arg(long)]
    check: bool,

    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Output path prefix (overrides `output.prefix`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure_threads() -> Result<usize, CliError> {
    let n = match std::env::var("FOULT_THREADS") {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map_err(|e| CliError::config("FOULT_THREADS", e.to_string()))?,
        Err(_) => 0,
    };
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config("FOULT_THREADS", e.to_string()))?;
    }
    Ok(rayon::current_num_threads())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::config("--config", format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut cfg = Config::parse(&text)?;
    if let Some(seed) = cli.seed {
        cfg.set(cli.command.seed_key(), seed);
    }
    let prefix: PathBuf = match &cli.out {
        Some(p) => p.clone(),
        None => cfg
            .get_or("output.prefix", cli.command.name().to_string())?
            .into(),
    };
    let threads = configure_threads()?;

    let plan = commands::plan(cli.command, &cfg)?;
    let report = plan.run()?;

    let written = report.outputs.write_tables(&prefix)?;
    let mut manifest = Manifest::new(cli.command.name());
    manifest.push("csv.columns", report.outputs.main.columns().join(","));
    for (name, table) in &report.outputs.extra {
        manifest.push(format!("csv.{name}.columns"), table.columns().join(","));
    }
    for (k, v) in cfg.resolved() {
        manifest.push(format!("param.{k}"), v);
    }
    manifest.push("check", cli.check);
    manifest.push("threads", threads);
    let since_epoch = started
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    manifest.push("started_unix", since_epoch);
    manifest.push("wall_time_s", clock.elapsed().as_secs_f64());
    let manifest_path = manifest.write(&prefix)?;

    for line in &report.summary {
        println!("{line}");
    }
    for p in written.iter().chain(std::iter::once(&manifest_path)) {
        eprintln!("wrote {}", p.display());
    }
    if cli.check {
        report.check.map_err(CliError::Check)?;
        println!("check passed");
    }
    Ok(())
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("foult: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
