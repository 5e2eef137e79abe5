//! Command-line front end: `solve`, `simulate`, `sweep` and `validate`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::config::{load_config, ExperimentConfig, SweepAxis};
use crate::error::{Error, Result};
use crate::policy::PolicyKind;
use crate::reward::LambdaTable;
use crate::scalar::linear_to_db;
use crate::sim::Execution;
use crate::sweep::{run_sweep, solve_config, write_csv, SweepRow};

#[derive(Debug, Parser)]
#[command(
    name = "hstjps",
    version,
    about = "Throughput solver and renewal simulator for joint probing and scheduling"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration; the shipped default scenario when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run frames one after another instead of across threads.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct RunControls {
    #[arg(long)]
    pub frames: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated policy names.
    #[arg(long, value_delimiter = ',')]
    pub policy: Vec<String>,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the maximal throughput of the scenario.
    Solve {
        #[command(flatten)]
        common: Common,
    },
    /// Simulate policies at the configured point.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunControls,
    },
    /// Re-solve and simulate along one axis.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunControls,
        /// p_ts_dbm, p_tr_dbm or tau_s_ms.
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated grid values in the axis unit.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        grid: Vec<f64>,
    },
    /// Check a configuration without running anything.
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    match &common.config {
        Some(p) => load_config(p),
        None => Ok(ExperimentConfig::reference_scenario()),
    }
}

fn execution(common: &Common) -> Execution {
    if common.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn apply(cfg: &mut ExperimentConfig, run: &RunControls) -> Result<Vec<PolicyKind>> {
    if let Some(f) = run.frames {
        cfg.frames = f;
    }
    if let Some(s) = run.seed {
        cfg.seed = s;
    }
    if !run.policy.is_empty() {
        cfg.policies = run.policy.clone();
    }
    cfg.validate()?;
    cfg.policy_kinds()
}

fn emit(rows: &[SweepRow], out: &Option<PathBuf>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| Error::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            write_csv(rows, file)
        }
        None => write_csv(rows, stdout),
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Io {
        path: "<stdout>".into(),
        message: e.to_string(),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return write!(stdout, "{e}").map_err(io);
        }
        Err(e) => return Err(Error::config("arguments", e.to_string())),
    };
    execute(cli.command, stdout)
}

pub fn execute(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Validate { common } => {
            let cfg = load(&common)?;
            let env = cfg.network()?;
            writeln!(
                stdout,
                "ok: {} files, {} modes, gbar_s = {:.2} dB, gbar_t = {:.2} dB",
                env.catalog.len(),
                env.rates.modes(),
                linear_to_db(env.gbar_s()),
                linear_to_db(env.gbar_t())
            )
            .map_err(io)
        }
        Command::Solve { common } => {
            let cfg = load(&common)?;
            let (env, sol) = solve_config(&cfg)?;
            let table = LambdaTable::build(&env, &cfg.quadrature(), cfg.reading())?;
            let masses = table.decision_masses(sol.eta_star);
            writeln!(stdout, "eta_star_bps = {}", sol.eta_star).map_err(io)?;
            writeln!(stdout, "residual_bits = {:.3e}", sol.residual).map_err(io)?;
            writeln!(stdout, "iterations = {}", sol.iterations).map_err(io)?;
            writeln!(stdout, "lambda_at_zero_bits = {}", table.eval(0.0)).map_err(io)?;
            writeln!(
                stdout,
                "stage1_fractions = direct {:.4}, probe {:.4}, wait {:.4}",
                masses.direct, masses.probe, masses.wait
            )
            .map_err(io)
        }
        Command::Simulate { common, run } => {
            let mut cfg = load(&common)?;
            let policies = apply(&mut cfg, &run)?;
            let point = cfg.p_ts_dbm;
            let rows = run_sweep(
                &cfg,
                SweepAxis::PTsDbm,
                &[point],
                &policies,
                execution(&common),
            )?;
            emit(&rows, &run.out, stdout)
        }
        Command::Sweep {
            common,
            run,
            axis,
            grid,
        } => {
            let mut cfg = load(&common)?;
            let policies = apply(&mut cfg, &run)?;
            let axis = match axis {
                Some(a) => SweepAxis::parse(&a)?,
                None => cfg.sweep_axis.ok_or_else(|| {
                    Error::config(
                        "sweep_axis",
                        "no axis given on the command line or in the config",
                    )
                })?,
            };
            let grid = if grid.is_empty() {
                cfg.sweep_grid.clone()
            } else {
                grid
            };
            let rows = run_sweep(&cfg, axis, &grid, &policies, execution(&common))?;
            emit(&rows, &run.out, stdout)
        }
    }
}
