//! `run`: execute a solve and emit trace.csv + summary.json.

use std::path::Path;

use tphsd_core::{
    baseline_penalty_descent, make_problem, random_init, run_tphsd, trace_to_csv, SolverError,
    StopReason,
};

use crate::config_file::parse_config;
use crate::summary::{summarize, to_json};

pub fn cmd_run(
    config_path: &Path,
    overrides: &[String],
    out_dir: &Path,
    baseline: bool,
) -> Result<u8, SolverError> {
    let (spec, config, echo) = parse_config(config_path, overrides)?;
    let oracle = make_problem(&spec)?;
    let x0 = random_init(&spec, config.seed);

    let result = if baseline {
        baseline_penalty_descent(oracle.as_ref(), &x0, &config)?
    } else {
        run_tphsd(oracle.as_ref(), &x0, &config)?
    };

    std::fs::create_dir_all(out_dir)
        .map_err(|e| SolverError::config(format!("cannot create '{}': {e}", out_dir.display())))?;
    let trace_path = out_dir.join("trace.csv");
    std::fs::write(&trace_path, trace_to_csv(&result.trace)).map_err(|e| {
        SolverError::config(format!("cannot write '{}': {e}", trace_path.display()))
    })?;
    let doc = summarize(oracle.as_ref(), &echo, &result);
    let summary_path = out_dir.join("summary.json");
    std::fs::write(&summary_path, to_json(&doc)).map_err(|e| {
        SolverError::config(format!("cannot write '{}': {e}", summary_path.display()))
    })?;

    println!(
        "{}: {} iterations, stop={}, feas={:.3e}, wrote {}",
        doc.problem,
        doc.iterations,
        doc.stop_reason,
        doc.final_feas,
        out_dir.display()
    );

    Ok(match result.stop_reason {
        StopReason::MaxIters | StopReason::FeasAndStatTol => 0,
        StopReason::NumericalFailure => 2,
    })
}
