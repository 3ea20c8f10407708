//! `gradcheck`: compare the finite-difference penalty gradient against the
//! analytic product over a ladder of halved steps.

use std::path::Path;

use tphsd_core::{
    grad_p_exact, grad_p_fd, make_problem, random_init, Point, ProblemOracle, ProblemSpec,
    SolverError,
};

use crate::config_file::parse_config;

/// Errors below this are treated as exact (affine `grad g`), where an
/// order estimate would only measure rounding noise.
const EXACT_FLOOR: f64 = 1e-12;

fn sample_infeasible_points(
    oracle: &dyn ProblemOracle,
    spec: &ProblemSpec,
    seed: u64,
    count: usize,
) -> Vec<Point> {
    let mut pts = Vec::with_capacity(count);
    let mut attempt = 0u64;
    while pts.len() < count && attempt < 100 * count as u64 {
        let pt = random_init(spec, seed.wrapping_add(attempt));
        attempt += 1;
        let gy = oracle.g_grad_y(&pt);
        let feas = gy.iter().map(|v| v * v).sum::<f64>().sqrt();
        if feas >= 0.05 {
            pts.push(pt);
        }
    }
    pts
}

fn max_error_at(oracle: &dyn ProblemOracle, pts: &[Point], t: f64) -> Result<f64, SolverError> {
    let mut worst = 0.0f64;
    for pt in pts {
        let exact = grad_p_exact(oracle, pt)?;
        let fd = grad_p_fd(oracle, pt, t)?;
        let err = fd
            .vector
            .iter()
            .zip(exact.vector.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(err);
    }
    Ok(worst)
}

pub struct GradcheckReport {
    /// `(t, max error over points, ratio to previous row)`.
    pub rows: Vec<(f64, f64, Option<f64>)>,
    pub observed_order: Option<f64>,
    pub exact: bool,
    pub pass: bool,
}

pub fn gradcheck_report(
    oracle: &dyn ProblemOracle,
    spec: &ProblemSpec,
    seed: u64,
    t0: f64,
    levels: usize,
    points: usize,
) -> Result<GradcheckReport, SolverError> {
    if oracle.jg_analytic(&random_init(spec, seed)).is_none() {
        return Err(SolverError::config(format!(
            "gradcheck needs the analytic Jacobian, which problem '{}' lacks",
            oracle.name()
        )));
    }
    if levels < 2 {
        return Err(SolverError::config(
            "gradcheck needs at least two step levels",
        ));
    }
    let pts = sample_infeasible_points(oracle, spec, seed, points);
    if pts.len() < points {
        return Err(SolverError::config(format!(
            "could only sample {} of {points} infeasible points",
            pts.len()
        )));
    }

    let mut rows: Vec<(f64, f64, Option<f64>)> = Vec::new();
    let mut t = t0;
    for _ in 0..levels {
        let err = max_error_at(oracle, &pts, t)?;
        let ratio = rows.last().map(|(_, prev, _)| prev / err);
        rows.push((t, err, ratio));
        t /= 2.0;
    }

    let exact = rows.iter().all(|(_, e, _)| *e <= EXACT_FLOOR);
    let observed_order = if exact {
        None
    } else {
        let logs: Vec<f64> = rows
            .iter()
            .filter_map(|(_, _, r)| r.map(f64::log2))
            .collect();
        Some(logs.iter().sum::<f64>() / logs.len() as f64)
    };
    let pass = exact
        || observed_order
            .map(|o| (0.8..=1.2).contains(&o))
            .unwrap_or(false);
    Ok(GradcheckReport {
        rows,
        observed_order,
        exact,
        pass,
    })
}

pub fn cmd_gradcheck(
    config_path: &Path,
    overrides: &[String],
    t0: f64,
    levels: usize,
    points: usize,
) -> Result<u8, SolverError> {
    let (spec, config, _) = parse_config(config_path, overrides)?;
    let oracle = make_problem(&spec)?;
    let report = gradcheck_report(oracle.as_ref(), &spec, config.seed, t0, levels, points)?;

    println!("problem = {}", oracle.name());
    println!("{:>14} {:>16} {:>10}", "t", "max_error", "ratio");
    for (t, err, ratio) in &report.rows {
        match ratio {
            Some(r) => println!("{t:>14.6e} {err:>16.8e} {r:>10.4}"),
            None => println!("{t:>14.6e} {err:>16.8e} {:>10}", "-"),
        }
    }
    match (report.exact, report.observed_order) {
        (true, _) => println!("result: exact to rounding (affine grad g)"),
        (false, Some(o)) => println!("result: observed order = {o:.4}"),
        (false, None) => println!("result: no order estimate"),
    }

    if report.pass {
        Ok(0)
    } else {
        eprintln!("gradcheck failed: observed order outside [0.8, 1.2]");
        Ok(2)
    }
}
