//! `cpz-sim` command-line driver.
//!
//! Exit codes: 0 success, 1 failed verification, 2 configuration or usage
//! error, 3 I/O error.

pub mod config;
pub mod output;
pub mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use cpz_core::sim::{run_comparison, sweep_distance, sweep_sectors};
use cpz_core::{ScenarioConfig, SchemeKind, SimError, TrialReport};

use crate::config::CliConfigFile;
use crate::verify::{run_checks, Status, VerifyOptions};

pub const SEED_ENV: &str = "CPZ_SIM_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("verification failed")]
    VerifyFailed,
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
            CliError::VerifyFailed => EXIT_VERIFY_FAILED,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cpz-sim", version, about = "Massive-MIMO partition zooming simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// JSON scenario file; every key optional.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the file seed; falls back to $CPZ_SIM_SEED when neither is set.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the results as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepVar {
    Distance,
    Sectors,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check zero forcing, the trace identity, SINR uniformity and Wishart convergence.
    Verify {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 1e-9)]
        zf_tol: f64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Compare the three schemes over seeded trials.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Sweep coverage distance or sector count.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum)]
        variable: SweepVar,
        /// Comma separated values, e.g. 200,400,600.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
}

/// Seed precedence: flag, then config file, then the environment, then 0.
fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("{SEED_ENV}={v:?} is not a u64"))),
        Err(_) => Ok(None),
    }
}

fn load_scenario(args: &RunArgs) -> Result<ScenarioConfig, CliError> {
    let file = match &args.config {
        Some(p) => CliConfigFile::load(p)?,
        None => CliConfigFile::default(),
    };
    let file_has_seed = file.has_seed();
    let mut cfg = file.resolve()?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    } else if !file_has_seed {
        if let Some(seed) = env_seed()? {
            cfg.seed = seed;
        }
    }
    if let Some(t) = args.trials {
        cfg.n_trials = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit_csv(out: Option<&Path>, csv: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_file(p, csv),
        None => std::io::stdout()
            .write_all(csv.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn summarize(trials: &[TrialReport]) -> String {
    let mut lines = vec![format!("{} trials", trials.len())];
    for (i, kind) in SchemeKind::ALL.iter().enumerate() {
        let n = trials.len() as f64;
        let power = trials.iter().map(|t| t.reports[i].total_power).sum::<f64>() / n;
        let rate = trials.iter().map(|t| t.reports[i].sum_rate).sum::<f64>() / n;
        let ees: Vec<f64> = trials.iter().filter_map(|t| t.reports[i].ee).collect();
        let ee = if ees.is_empty() {
            "undefined".to_string()
        } else {
            format!("{:.4e} bit/J", ees.iter().sum::<f64>() / ees.len() as f64)
        };
        lines.push(format!(
            "{:<10} mean power {power:.4e} W  mean sum rate {rate:.4e} bit/s  mean EE {ee}",
            kind.as_str()
        ));
    }
    let ordered = trials.iter().all(|t| {
        t.reports[2].total_power <= t.reports[1].total_power
            && t.reports[1].total_power <= t.reports[0].total_power
    });
    lines.push(format!(
        "scheme ordering P_cpz <= P_zoom <= P_max: {}",
        if ordered { "holds" } else { "VIOLATED" }
    ));
    lines.join("\n")
}

fn cmd_verify(seed: Option<u64>, trials: usize, zf_tol: f64, workers: usize) -> Result<(), CliError> {
    let seed = match seed {
        Some(s) => s,
        None => env_seed()?.unwrap_or(0),
    };
    let opts = VerifyOptions { seed, trials, zf_tol };
    let checks = with_pool(workers, || run_checks(&opts))??;
    for c in &checks {
        println!("{c}");
    }
    if checks.iter().any(|c| c.status == Status::Fail) {
        Err(CliError::VerifyFailed)
    } else {
        Ok(())
    }
}

fn cmd_simulate(run: &RunArgs) -> Result<(), CliError> {
    let cfg = load_scenario(run)?;
    let trials = with_pool(run.workers, || run_comparison(&cfg))??;
    emit_csv(run.out.as_deref(), &output::trials_csv(&trials))?;
    if let Some(p) = &run.json {
        write_file(p, &to_json(&trials)?)?;
    }
    let summary = summarize(&trials);
    if run.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn cmd_sweep(run: &RunArgs, variable: SweepVar, values: &[String]) -> Result<(), CliError> {
    let cfg = load_scenario(run)?;
    let result = match variable {
        SweepVar::Distance => {
            let ds = values
                .iter()
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::Config(format!("bad distance {v:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            with_pool(run.workers, || sweep_distance(&cfg, &ds))??
        }
        SweepVar::Sectors => {
            let ns = values
                .iter()
                .map(|v| {
                    v.trim()
                        .parse::<usize>()
                        .map_err(|_| CliError::Config(format!("bad sector count {v:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            with_pool(run.workers, || sweep_sectors(&cfg, &ns))??
        }
    };
    emit_csv(run.out.as_deref(), &output::sweep_csv(&result))?;
    if let Some(p) = &run.json {
        write_file(p, &to_json(&result)?)?;
    }
    Ok(())
}

/// Execute a parsed command line and return the process exit code.
pub fn run(cli: Cli) -> i32 {
    let res = match &cli.command {
        Command::Verify { seed, trials, zf_tol, workers } => {
            cmd_verify(*seed, *trials, *zf_tol, *workers)
        }
        Command::Simulate { run } => cmd_simulate(run),
        Command::Sweep { run, variable, values } => cmd_sweep(run, *variable, values),
    };
    match res {
        Ok(()) => EXIT_OK,
        Err(e) => {
            if !matches!(e, CliError::VerifyFailed) {
                eprintln!("error: {e}");
            }
            e.exit_code()
        }
    }
}
