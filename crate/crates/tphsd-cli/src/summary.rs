//! JSON run summaries.

use serde::{Deserialize, Serialize};
use tphsd_core::{stationarity_measure, ProblemOracle, RunResult};

use crate::config_file::ConfigEcho;

/// End-of-run report written next to the trace. Numeric fields are finite
/// or explicitly null.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryDocument {
    pub problem: String,
    pub config: ConfigEcho,
    pub final_point: Vec<f64>,
    pub final_feas: f64,
    pub final_stationarity: Option<f64>,
    pub final_multiplier: Option<Vec<f64>>,
    pub halvings: u32,
    pub switch_count: usize,
    pub iterations: usize,
    pub stop_reason: String,
    pub wall_time_seconds: f64,
    pub solution_distance: Option<f64>,
}

fn finite_or_none(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

pub fn summarize(
    oracle: &dyn ProblemOracle,
    echo: &ConfigEcho,
    result: &RunResult,
) -> SummaryDocument {
    let pt = &result.final_state.pt;
    let gy = oracle.g_grad_y(pt);
    let final_feas = gy.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (final_stationarity, final_multiplier) = match oracle.jg_analytic(pt) {
        None => (None, None),
        Some(j) => match stationarity_measure(oracle, pt, tphsd_core::default_rank_tol(&j)) {
            Ok(rep) => (finite_or_none(rep.residual), Some(rep.multiplier)),
            Err(_) => (None, None),
        },
    };
    SummaryDocument {
        problem: oracle.name().to_string(),
        config: echo.clone(),
        final_point: pt.as_slice().to_vec(),
        final_feas,
        final_stationarity,
        final_multiplier,
        halvings: result.final_state.halvings,
        switch_count: result.final_state.switch_log.len(),
        iterations: result.final_state.k,
        stop_reason: result.stop_reason.as_str().to_string(),
        wall_time_seconds: result.wall_time_seconds,
        solution_distance: oracle.solution_distance(pt).and_then(finite_or_none),
    }
}

pub fn to_json(doc: &SummaryDocument) -> String {
    serde_json::to_string_pretty(doc).expect("summary serializes")
}
