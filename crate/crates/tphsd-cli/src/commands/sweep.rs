//! `sweep`: stepsize grid search with a short selection horizon, then a
//! full run with the winning cell.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tphsd_core::{make_problem, random_init, run_tphsd, trace_to_csv, RunConfig, SolverError};

use crate::config_file::parse_config;
use crate::summary::{summarize, to_json};

/// Number of iterations each grid cell is allowed before scoring.
const SELECTION_HORIZON: usize = 100;

pub const ENV_THREADS: &str = "BILEVEL_TPHSD_THREADS";

/// `{1,3,5,7,9} x 10^{-2..-6}`, ascending in magnitude within each decade.
pub fn stepsize_grid() -> Vec<f64> {
    let mut grid = Vec::with_capacity(25);
    for exp in 2..=6u32 {
        for mantissa in [1.0, 3.0, 5.0, 7.0, 9.0] {
            grid.push(mantissa * 10f64.powi(-(exp as i32)));
        }
    }
    grid
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellReport {
    pub index: usize,
    pub eta0: f64,
    pub theta0: f64,
    /// Upper objective at the final iterate of the truncated run; absent
    /// when the cell failed.
    pub f_after_horizon: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub cells: Vec<CellReport>,
    pub winner_index: usize,
    pub winner_eta0: f64,
    pub winner_theta0: f64,
}

fn resolve_jobs(flag: Option<usize>) -> Option<usize> {
    if let Some(j) = flag {
        return Some(j.max(1));
    }
    std::env::var(ENV_THREADS)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .map(|j| j.max(1))
}

fn write(path: &Path, contents: &str) -> Result<(), SolverError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| {
            SolverError::config(format!("cannot create '{}': {e}", parent.display()))
        })?;
    }
    std::fs::write(path, contents)
        .map_err(|e| SolverError::config(format!("cannot write '{}': {e}", path.display())))
}

pub fn cmd_sweep(
    config_path: &Path,
    overrides: &[String],
    out_dir: &Path,
    jobs: Option<usize>,
    theta_ratio: f64,
    sweep_theta: bool,
) -> Result<u8, SolverError> {
    let (spec, base_config, echo) = parse_config(config_path, overrides)?;
    if !(theta_ratio > 0.0 && theta_ratio.is_finite()) {
        return Err(SolverError::config(format!(
            "theta ratio must be > 0, got {theta_ratio}"
        )));
    }
    let oracle = make_problem(&spec)?;
    let x0 = random_init(&spec, base_config.seed);

    // (eta0, theta0) pairs; theta either tied by a fixed ratio or swept
    // over the same grid.
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for eta0 in stepsize_grid() {
        if sweep_theta {
            for theta0 in stepsize_grid() {
                pairs.push((eta0, theta0));
            }
        } else {
            pairs.push((eta0, theta_ratio * eta0));
        }
    }

    let cell_config = |eta0: f64, theta0: f64, iters: usize| -> Result<RunConfig, SolverError> {
        let mut cfg = base_config.clone();
        cfg.schedule = tphsd_core::StepSchedule::new(
            eta0,
            theta0,
            base_config.schedule.a,
            base_config.schedule.b,
        )?;
        cfg.max_iters = iters;
        Ok(cfg)
    };

    let run_cell = |(index, &(eta0, theta0)): (usize, &(f64, f64))| -> CellReport {
        let outcome = cell_config(eta0, theta0, SELECTION_HORIZON)
            .and_then(|cfg| run_tphsd(oracle.as_ref(), &x0, &cfg));
        match outcome {
            Ok(result) => {
                let f = oracle.f_value(&result.final_state.pt);
                let mut cell_echo = echo.clone();
                cell_echo.eta0 = eta0;
                cell_echo.theta0 = theta0;
                cell_echo.max_iters = SELECTION_HORIZON;
                let doc = summarize(oracle.as_ref(), &cell_echo, &result);
                let path = out_dir.join(format!("cells/cell_{index:03}/summary.json"));
                let error = write(&path, &to_json(&doc)).err().map(|e| e.to_string());
                CellReport {
                    index,
                    eta0,
                    theta0,
                    f_after_horizon: f.is_finite().then_some(f),
                    error,
                }
            }
            Err(e) => CellReport {
                index,
                eta0,
                theta0,
                f_after_horizon: None,
                error: Some(e.to_string()),
            },
        }
    };

    let cells: Vec<CellReport> = match resolve_jobs(jobs) {
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| SolverError::config(format!("cannot build thread pool: {e}")))?;
            pool.install(|| pairs.par_iter().enumerate().map(run_cell).collect())
        }
        None => pairs.par_iter().enumerate().map(run_cell).collect(),
    };

    // Deterministic reduction: lowest objective wins, ties prefer the
    // smaller eta0, then the smaller theta0.
    let winner = cells
        .iter()
        .filter(|c| c.f_after_horizon.is_some())
        .min_by(|a, b| {
            let fa = a.f_after_horizon.unwrap();
            let fb = b.f_after_horizon.unwrap();
            fa.total_cmp(&fb)
                .then(a.eta0.total_cmp(&b.eta0))
                .then(a.theta0.total_cmp(&b.theta0))
        })
        .ok_or_else(|| {
            SolverError::numerical("every sweep cell failed; nothing to run fully", None)
        })?
        .clone();

    let full_cfg = cell_config(winner.eta0, winner.theta0, base_config.max_iters)?;
    let full = run_tphsd(oracle.as_ref(), &x0, &full_cfg)?;
    let mut winner_echo = echo.clone();
    winner_echo.eta0 = winner.eta0;
    winner_echo.theta0 = winner.theta0;
    write(
        &out_dir.join("winner/trace.csv"),
        &trace_to_csv(&full.trace),
    )?;
    write(
        &out_dir.join("winner/summary.json"),
        &to_json(&summarize(oracle.as_ref(), &winner_echo, &full)),
    )?;

    let report = SweepReport {
        winner_index: winner.index,
        winner_eta0: winner.eta0,
        winner_theta0: winner.theta0,
        cells,
    };
    write(
        &out_dir.join("sweep.json"),
        &serde_json::to_string_pretty(&report)
            .map_err(|e| SolverError::config(format!("cannot serialize sweep report: {e}")))?,
    )?;

    println!(
        "sweep: {} cells, winner #{} (eta0={:.1e}, theta0={:.1e}), full run stop={}",
        report.cells.len(),
        winner.index,
        winner.eta0,
        winner.theta0,
        full.stop_reason.as_str()
    );
    Ok(0)
}
