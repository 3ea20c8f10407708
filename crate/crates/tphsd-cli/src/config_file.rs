//! Flat key=value configuration files.
//!
//! One scalar assignment per line, `#` starts a comment, values may be
//! quoted. Unknown keys are rejected rather than ignored, both in files
//! and in `--set` overrides.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tphsd_core::{GradPMode, ProblemSpec, RunConfig, SolverError, StepSchedule};

pub const KNOWN_KEYS: &[&str] = &[
    "problem",
    "n",
    "c",
    "q",
    "eta0",
    "theta0",
    "a",
    "b",
    "alpha",
    "eps0",
    "beta",
    "max_iters",
    "fd_t0",
    "fd_decay",
    "grad_p_mode",
    "stationarity_every",
    "seed",
    "stop_feas_tol",
    "stop_stat_tol",
];

/// Fully resolved configuration, echoed verbatim into summaries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub problem: String,
    pub n: usize,
    pub c: f64,
    pub q: u32,
    pub eta0: f64,
    pub theta0: f64,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub eps0: f64,
    pub beta: f64,
    pub max_iters: usize,
    pub fd_t0: f64,
    pub fd_decay: f64,
    pub grad_p_mode: String,
    pub stationarity_every: usize,
    pub seed: u64,
    pub stop_feas_tol: f64,
    pub stop_stat_tol: f64,
}

fn strip_quotes(v: &str) -> &str {
    let v = v.trim();
    if v.len() >= 2
        && ((v.starts_with('"') && v.ends_with('"')) || (v.starts_with('\'') && v.ends_with('\'')))
    {
        &v[1..v.len() - 1]
    } else {
        v
    }
}

fn parse_assignment(line: &str) -> Result<Option<(String, String)>, SolverError> {
    let line = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let line = line.trim();
    if line.is_empty() {
        return Ok(None);
    }
    let (key, value) = line
        .split_once('=')
        .ok_or_else(|| SolverError::config(format!("expected key=value, got '{line}'")))?;
    let key = key.trim().to_string();
    let value = strip_quotes(value).to_string();
    if key.is_empty() || value.is_empty() {
        return Err(SolverError::config(format!(
            "empty key or value in '{line}'"
        )));
    }
    Ok(Some((key, value)))
}

fn collect_pairs(text: &str, map: &mut BTreeMap<String, String>) -> Result<(), SolverError> {
    for line in text.lines() {
        if let Some((k, v)) = parse_assignment(line)? {
            if !KNOWN_KEYS.contains(&k.as_str()) {
                return Err(SolverError::config(format!("unknown config key '{k}'")));
            }
            map.insert(k, v);
        }
    }
    Ok(())
}

fn get_parsed<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
    default: T,
) -> Result<T, SolverError>
where
    T::Err: std::fmt::Display,
{
    match map.get(key) {
        None => Ok(default),
        Some(raw) => raw
            .parse::<T>()
            .map_err(|e| SolverError::config(format!("key '{key}': cannot parse '{raw}': {e}"))),
    }
}

/// Parses the config file, applies overrides last, and validates the
/// resulting problem and run configuration.
pub fn parse_config(
    path: &Path,
    overrides: &[String],
) -> Result<(ProblemSpec, RunConfig, ConfigEcho), SolverError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        SolverError::config(format!("cannot read config '{}': {e}", path.display()))
    })?;
    parse_config_text(&text, overrides)
}

pub fn parse_config_text(
    text: &str,
    overrides: &[String],
) -> Result<(ProblemSpec, RunConfig, ConfigEcho), SolverError> {
    let mut map = BTreeMap::new();
    collect_pairs(text, &mut map)?;
    for ov in overrides {
        let (k, v) = parse_assignment(ov)?
            .ok_or_else(|| SolverError::config(format!("empty override '{ov}'")))?;
        if !KNOWN_KEYS.contains(&k.as_str()) {
            return Err(SolverError::config(format!("unknown override key '{k}'")));
        }
        map.insert(k, v);
    }

    let problem = map
        .get("problem")
        .cloned()
        .ok_or_else(|| SolverError::config("missing required key 'problem'"))?;
    let n: usize = get_parsed(&map, "n", 10)?;
    let c: f64 = get_parsed(&map, "c", 2.0)?;
    let q: u32 = get_parsed(&map, "q", 4)?;

    let spec = match problem.as_str() {
        "sin" => ProblemSpec::SinSynthetic { n, c },
        "quad" => ProblemSpec::quadratic_default(),
        "degpow" => ProblemSpec::DegeneratePower { q },
        other => {
            return Err(SolverError::config(format!(
                "unknown problem '{other}' (expected sin, quad, or degpow)"
            )))
        }
    };
    spec.validate()?;

    let defaults = RunConfig::default();
    let schedule = StepSchedule::new(
        get_parsed(&map, "eta0", defaults.schedule.eta0)?,
        get_parsed(&map, "theta0", defaults.schedule.theta0)?,
        get_parsed(&map, "a", defaults.schedule.a)?,
        get_parsed(&map, "b", defaults.schedule.b)?,
    )?;
    let grad_p_mode = match map.get("grad_p_mode") {
        None => defaults.grad_p_mode,
        Some(raw) => GradPMode::parse(raw)?,
    };
    let config = RunConfig {
        schedule,
        alpha: get_parsed(&map, "alpha", defaults.alpha)?,
        eps0: get_parsed(&map, "eps0", defaults.eps0)?,
        beta: get_parsed(&map, "beta", defaults.beta)?,
        max_iters: get_parsed(&map, "max_iters", defaults.max_iters)?,
        fd_t0: get_parsed(&map, "fd_t0", defaults.fd_t0)?,
        fd_decay: get_parsed(&map, "fd_decay", defaults.fd_decay)?,
        grad_p_mode,
        stationarity_every: get_parsed(&map, "stationarity_every", defaults.stationarity_every)?,
        seed: get_parsed(&map, "seed", defaults.seed)?,
        stop_feas_tol: get_parsed(&map, "stop_feas_tol", defaults.stop_feas_tol)?,
        stop_stat_tol: get_parsed(&map, "stop_stat_tol", defaults.stop_stat_tol)?,
    };
    config.validate()?;

    let echo = ConfigEcho {
        problem,
        n,
        c,
        q,
        eta0: config.schedule.eta0,
        theta0: config.schedule.theta0,
        a: config.schedule.a,
        b: config.schedule.b,
        alpha: config.alpha,
        eps0: config.eps0,
        beta: config.beta,
        max_iters: config.max_iters,
        fd_t0: config.fd_t0,
        fd_decay: config.fd_decay,
        grad_p_mode: config.grad_p_mode.as_str().to_string(),
        stationarity_every: config.stationarity_every,
        seed: config.seed,
        stop_feas_tol: config.stop_feas_tol,
        stop_stat_tol: config.stop_stat_tol,
    };
    Ok((spec, config, echo))
}
