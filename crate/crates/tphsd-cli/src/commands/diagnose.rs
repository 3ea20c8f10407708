//! `diagnose`: print the penalty diagnostics at one point.

use std::path::Path;

use tphsd_core::{
    a_map, default_rank_tol, h_beta_value, make_problem, penalty_value, sigma_min_jg,
    stationarity_measure, ErrorKind, Point, ProblemSpec, SolverError,
};

use crate::config_file::parse_config;
use crate::summary::SummaryDocument;
use tphsd_core::trace::fmt_f64;

fn parse_point(spec: &ProblemSpec, raw: &str) -> Result<Point, SolverError> {
    let vals: Result<Vec<f64>, _> = raw.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let vals = vals.map_err(|e| SolverError::config(format!("bad point '{raw}': {e}")))?;
    Point::new(vals, spec.n(), spec.p())
}

fn point_from_summary(spec: &ProblemSpec, path: &Path) -> Result<Point, SolverError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        SolverError::config(format!("cannot read summary '{}': {e}", path.display()))
    })?;
    let doc: SummaryDocument = serde_json::from_str(&text).map_err(|e| {
        SolverError::config(format!("cannot parse summary '{}': {e}", path.display()))
    })?;
    Point::new(doc.final_point, spec.n(), spec.p())
}

fn join(vals: &[f64]) -> String {
    vals.iter()
        .map(|v| fmt_f64(*v))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn cmd_diagnose(
    config_path: &Path,
    overrides: &[String],
    point: Option<&str>,
    from_summary: Option<&Path>,
) -> Result<u8, SolverError> {
    let (spec, config, _) = parse_config(config_path, overrides)?;
    let oracle = make_problem(&spec)?;
    let pt = match (point, from_summary) {
        (Some(raw), _) => parse_point(&spec, raw)?,
        (None, Some(path)) => point_from_summary(&spec, path)?,
        (None, None) => {
            return Err(SolverError::config(
                "diagnose needs --point or --from-summary",
            ))
        }
    };

    let j = oracle.jg_analytic(&pt).ok_or_else(|| {
        SolverError::config(format!(
            "diagnose needs the analytic Jacobian, which problem '{}' lacks",
            oracle.name()
        ))
    })?;
    let rank_tol = default_rank_tol(&j);

    let gy = oracle.g_grad_y(&pt);
    let feas = gy.iter().map(|v| v * v).sum::<f64>().sqrt();
    let sigma = sigma_min_jg(oracle.as_ref(), &pt)?;

    println!("problem = {}", oracle.name());
    println!("point = {}", join(pt.as_slice()));
    println!("feas = {}", fmt_f64(feas));
    println!("p = {}", fmt_f64(penalty_value(oracle.as_ref(), &pt)?));
    println!("sigma_min = {}", fmt_f64(sigma));

    let rank_failure = |e: SolverError| -> Result<u8, SolverError> {
        if e.kind() == ErrorKind::RankDeficient {
            eprintln!(
                "rank-deficient Jacobian: sigma_min estimate = {}",
                fmt_f64(sigma)
            );
            Ok(3)
        } else {
            Err(e)
        }
    };

    let grad_p = match tphsd_core::grad_p_exact(oracle.as_ref(), &pt) {
        Ok(g) => g,
        Err(e) => return rank_failure(e),
    };
    println!("grad_p_norm = {}", fmt_f64(grad_p.norm()));

    let mapped = match a_map(oracle.as_ref(), &pt, rank_tol) {
        Ok(m) => m,
        Err(e) => return rank_failure(e),
    };
    println!("a_map = {}", join(mapped.as_slice()));

    let h = match h_beta_value(oracle.as_ref(), &pt, config.beta, rank_tol) {
        Ok(h) => h,
        Err(e) => return rank_failure(e),
    };
    println!("h_beta = {}", fmt_f64(h));

    let rep = match stationarity_measure(oracle.as_ref(), &pt, rank_tol) {
        Ok(rep) => rep,
        Err(e) => return rank_failure(e),
    };
    println!("stationarity_residual = {}", fmt_f64(rep.residual));
    println!("multiplier = {}", join(&rep.multiplier));

    Ok(0)
}
