//! Command-line front end for the hybrid bilevel solver.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure,
//! 3 rank-deficient Jacobian in `diagnose`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tphsd_cli::commands;
use tphsd_core::{ErrorKind, SolverError};

#[derive(Parser)]
#[command(
    name = "tphsd",
    version,
    about = "Two-phase hybrid subgradient descent for bilevel optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured problem and write {trace.csv, summary.json}.
    Run {
        /// Flat key=value config file.
        #[arg(long)]
        config: PathBuf,
        /// Override a config key, e.g. --set alpha=0.99 (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Use the single-timescale penalty-descent comparator instead of
        /// the hybrid driver.
        #[arg(long)]
        baseline: bool,
    },
    /// Validate the finite-difference penalty gradient order.
    Gradcheck {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Largest finite-difference step; subsequent rows halve it.
        #[arg(long, default_value_t = 1e-2)]
        t0: f64,
        /// Number of halved steps to evaluate.
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Number of sampled infeasible points.
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
    /// Print penalty diagnostics at one point.
    Diagnose {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Comma-separated coordinates, x block then y block.
        #[arg(long)]
        point: Option<String>,
        /// Read the point from a previous run's summary.json.
        #[arg(long)]
        from_summary: Option<PathBuf>,
    },
    /// Grid-search eta0 (and optionally theta0), then run the winner.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Max concurrent cells; defaults to BILEVEL_TPHSD_THREADS or the
        /// rayon default.
        #[arg(long)]
        jobs: Option<usize>,
        /// theta0 = ratio * eta0 when theta is tied to the grid value.
        #[arg(long, default_value_t = 1.0)]
        theta_ratio: f64,
        /// Sweep theta0 over the full grid instead of tying it to eta0.
        #[arg(long)]
        sweep_theta: bool,
    },
}

fn exit_code_for(err: &SolverError) -> u8 {
    match err.kind() {
        ErrorKind::Config | ErrorKind::DimensionMismatch => 1,
        ErrorKind::NumericalFailure => 2,
        ErrorKind::RankDeficient => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run {
            config,
            overrides,
            out_dir,
            baseline,
        } => commands::run::cmd_run(config, overrides, out_dir, *baseline),
        Command::Gradcheck {
            config,
            overrides,
            t0,
            levels,
            points,
        } => commands::gradcheck::cmd_gradcheck(config, overrides, *t0, *levels, *points),
        Command::Diagnose {
            config,
            overrides,
            point,
            from_summary,
        } => commands::diagnose::cmd_diagnose(
            config,
            overrides,
            point.as_deref(),
            from_summary.as_deref(),
        ),
        Command::Sweep {
            config,
            overrides,
            out_dir,
            jobs,
            theta_ratio,
            sweep_theta,
        } => commands::sweep::cmd_sweep(
            config,
            overrides,
            out_dir,
            *jobs,
            *theta_ratio,
            *sweep_theta,
        ),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
