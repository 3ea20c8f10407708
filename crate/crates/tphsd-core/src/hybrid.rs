//! The two-phase hybrid driver.
//!
//! Each iteration evaluates `grad p`, decides whether the iterate is close
//! enough to the feasible set to keep optimizing, and runs one step of the
//! matching subroutine. Leaving the optimization phase halves the
//! tolerance; both directions of a phase change are appended to the switch
//! log. A naive single-timescale penalty descent is included as a
//! benchmark comparator with the same trace schema.

use std::time::Instant;

use crate::config::{GradPMode, RunConfig};
use crate::error::SolverError;
use crate::oracle::{f_subgrad_selection, ProblemOracle};
use crate::penalty::{grad_p, stationarity_measure, GradPResult};
use crate::point::Point;
use crate::schemes::{frg_step, tmg_step_with_grad_p, MomentumState};
use crate::trace::{TraceRecord, STATIONARITY_SENTINEL};

/// Feasibility levels at or below this are treated as exact, bypassing the
/// ratio test whose denominator they would zero out.
pub const MACHINE_FEAS_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Momentum subgradient phase (flag 1).
    Tmg,
    /// Feasibility restoration phase (flag 2).
    Frg,
}

impl Phase {
    pub fn flag(&self) -> u8 {
        match self {
            Phase::Tmg => 1,
            Phase::Frg => 2,
        }
    }
}

/// True when the feasibility residual is small enough to treat the ratio
/// condition as satisfied.
pub fn zero_feas_guard(feas_norm: f64, machine_tol: f64) -> bool {
    feas_norm <= machine_tol
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDecision {
    pub next_flag: Phase,
    pub next_epsilon: f64,
    pub log_switch: bool,
}

/// Branch table of the hybrid driver.
///
/// In the optimization phase the iterate stays iff
/// `||u + e|| >= eps * ||grad_y g||` and `||grad_y g|| <= eps`; otherwise
/// the driver switches to restoration and halves `eps`. In the restoration
/// phase the driver returns to optimization iff `||grad_y g|| <= eps`,
/// leaving `eps` unchanged either way. Ties keep or restore the
/// optimization phase (non-strict comparisons).
pub fn tphsd_decide(state: &SolverState, feas_norm: f64, grad_p_norm: f64) -> PhaseDecision {
    match state.flag {
        Phase::Tmg => {
            let stay = zero_feas_guard(feas_norm, MACHINE_FEAS_TOL)
                || (grad_p_norm >= state.epsilon * feas_norm && feas_norm <= state.epsilon);
            if stay {
                PhaseDecision {
                    next_flag: Phase::Tmg,
                    next_epsilon: state.epsilon,
                    log_switch: false,
                }
            } else {
                PhaseDecision {
                    next_flag: Phase::Frg,
                    next_epsilon: state.epsilon / 2.0,
                    log_switch: true,
                }
            }
        }
        Phase::Frg => {
            if feas_norm <= state.epsilon {
                PhaseDecision {
                    next_flag: Phase::Tmg,
                    next_epsilon: state.epsilon,
                    log_switch: true,
                }
            } else {
                PhaseDecision {
                    next_flag: Phase::Frg,
                    next_epsilon: state.epsilon,
                    log_switch: false,
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub pt: Point,
    pub m: MomentumState,
    /// Iterations executed so far.
    pub k: usize,
    pub flag: Phase,
    pub epsilon: f64,
    pub halvings: u32,
    /// `(iteration, new flag)` for every phase change, in order.
    pub switch_log: Vec<(usize, u8)>,
    pub last_grad_p: Option<GradPResult>,
}

impl SolverState {
    fn new(pt: Point, eps0: f64) -> SolverState {
        let dim = pt.dim();
        SolverState {
            pt,
            m: MomentumState::new(dim),
            k: 0,
            flag: Phase::Tmg,
            epsilon: eps0,
            halvings: 0,
            switch_log: Vec::new(),
            last_grad_p: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIters,
    FeasAndStatTol,
    NumericalFailure,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::MaxIters => "max_iters",
            StopReason::FeasAndStatTol => "feas_and_stat_tol",
            StopReason::NumericalFailure => "numerical_failure",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub final_state: SolverState,
    pub trace: Vec<TraceRecord>,
    pub stop_reason: StopReason,
    pub wall_time_seconds: f64,
}

/// Per-iteration view handed to a run observer, before the step is taken.
#[derive(Debug)]
pub struct StepObservation<'a> {
    pub k: usize,
    pub phase: Phase,
    /// Norm of the subgradient selection consumed this iteration.
    pub d_norm: f64,
    /// Norm of the momentum vector used by this iteration's step.
    pub mom_norm: f64,
    pub feas_norm: f64,
    pub pt: &'a Point,
}

fn vec_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn rank_tol_for(oracle: &dyn ProblemOracle, pt: &Point) -> f64 {
    match oracle.jg_analytic(pt) {
        Some(j) => crate::penalty::default_rank_tol(&j),
        None => 0.0,
    }
}

/// Stationarity residual for trace rows; the sentinel stands in when the
/// measure is unavailable (no Jacobian or a rank-deficient one).
fn stationarity_or_sentinel(oracle: &dyn ProblemOracle, pt: &Point) -> f64 {
    if oracle.jg_analytic(pt).is_none() {
        return STATIONARITY_SENTINEL;
    }
    match stationarity_measure(oracle, pt, rank_tol_for(oracle, pt)) {
        Ok(rep) => rep.residual,
        Err(_) => STATIONARITY_SENTINEL,
    }
}

fn pre_run_checks(
    oracle: &dyn ProblemOracle,
    x0: &Point,
    config: &RunConfig,
) -> Result<(), SolverError> {
    config.validate()?;
    oracle.check_point(x0)?;
    if config.grad_p_mode == GradPMode::Analytic && oracle.jg_analytic(x0).is_none() {
        return Err(SolverError::config(format!(
            "analytic grad_p mode requires a Jacobian, which problem '{}' lacks; \
             use finite_difference",
            oracle.name()
        )));
    }
    Ok(())
}

/// Runs the hybrid solver, reporting each iteration to `observer` before
/// the step executes.
pub fn run_tphsd_observed<F>(
    oracle: &dyn ProblemOracle,
    x0: &Point,
    config: &RunConfig,
    mut observer: F,
) -> Result<RunResult, SolverError>
where
    F: FnMut(&StepObservation<'_>),
{
    pre_run_checks(oracle, x0, config)?;
    let started = Instant::now();
    let mut state = SolverState::new(x0.clone(), config.eps0);
    let mut trace: Vec<TraceRecord> = Vec::new();
    let mut stop_reason = StopReason::MaxIters;

    for k in 0..config.max_iters {
        let eta = config.schedule.eta_at(k);
        let theta = config.schedule.theta_at(k);

        let u = match grad_p(oracle, &state.pt, config.grad_p_mode, config.fd_step_at(k)) {
            Ok(u) => u,
            Err(e) if e.is_pre_run() => return Err(e),
            Err(_) => {
                stop_reason = StopReason::NumericalFailure;
                break;
            }
        };
        let grad_p_norm = u.norm();
        let feas_norm = vec_norm(&oracle.g_grad_y(&state.pt));

        let scheduled = k % config.stationarity_every == 0 || k + 1 == config.max_iters;
        let stationarity = if scheduled {
            stationarity_or_sentinel(oracle, &state.pt)
        } else {
            STATIONARITY_SENTINEL
        };

        // Early stop on the certified iterate, before stepping away from it.
        if stationarity != STATIONARITY_SENTINEL
            && feas_norm <= config.stop_feas_tol
            && stationarity <= config.stop_stat_tol
        {
            stop_reason = StopReason::FeasAndStatTol;
            break;
        }

        let decision = tphsd_decide(&state, feas_norm, grad_p_norm);
        if decision.log_switch {
            if decision.next_flag == Phase::Frg {
                state.halvings += 1;
            }
            state.switch_log.push((k, decision.next_flag.flag()));
        }
        state.flag = decision.next_flag;
        state.epsilon = decision.next_epsilon;

        let step = match state.flag {
            Phase::Tmg => tmg_step_with_grad_p(oracle, &state.pt, &state.m, k, config, &u),
            Phase::Frg => frg_step(oracle, &state.pt, &state.m, k, config),
        };
        let out = match step {
            Ok(out) => out,
            Err(e) if e.is_pre_run() => return Err(e),
            Err(_) => {
                stop_reason = StopReason::NumericalFailure;
                break;
            }
        };

        observer(&StepObservation {
            k,
            phase: state.flag,
            d_norm: out.d_norm,
            mom_norm: out.next_m.norm(),
            feas_norm,
            pt: &state.pt,
        });

        trace.push(TraceRecord {
            iter: k,
            phase: state.flag.flag(),
            epsilon: state.epsilon,
            f_val: oracle.f_value(&state.pt),
            g_val: oracle.g_value(&state.pt),
            feas_norm,
            grad_p_norm,
            eta,
            theta,
            mom_norm: out.next_m.norm(),
            halvings: state.halvings,
            stationarity,
        });

        state.pt = out.next_pt;
        state.m = out.next_m;
        state.last_grad_p = Some(u);
        state.k = k + 1;
    }

    Ok(RunResult {
        final_state: state,
        trace,
        stop_reason,
        wall_time_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Runs the hybrid solver from `x0`.
pub fn run_tphsd(
    oracle: &dyn ProblemOracle,
    x0: &Point,
    config: &RunConfig,
) -> Result<RunResult, SolverError> {
    run_tphsd_observed(oracle, x0, config, |_| {})
}

/// Single-timescale comparator: `pt <- pt - eta_k (d + beta (u + e))`,
/// no phases, no momentum. Shares the trace schema with the hybrid run
/// (phase pinned to 1, momentum column 0).
pub fn baseline_penalty_descent(
    oracle: &dyn ProblemOracle,
    x0: &Point,
    config: &RunConfig,
) -> Result<RunResult, SolverError> {
    pre_run_checks(oracle, x0, config)?;
    let started = Instant::now();
    let mut state = SolverState::new(x0.clone(), config.eps0);
    let mut trace = Vec::new();
    let mut stop_reason = StopReason::MaxIters;

    for k in 0..config.max_iters {
        let eta = config.schedule.eta_at(k);

        let u = match grad_p(oracle, &state.pt, config.grad_p_mode, config.fd_step_at(k)) {
            Ok(u) => u,
            Err(e) if e.is_pre_run() => return Err(e),
            Err(_) => {
                stop_reason = StopReason::NumericalFailure;
                break;
            }
        };
        let d = f_subgrad_selection(oracle, &state.pt)?;
        let feas_norm = vec_norm(&oracle.g_grad_y(&state.pt));

        let scheduled = k % config.stationarity_every == 0 || k + 1 == config.max_iters;
        let stationarity = if scheduled {
            stationarity_or_sentinel(oracle, &state.pt)
        } else {
            STATIONARITY_SENTINEL
        };
        if stationarity != STATIONARITY_SENTINEL
            && feas_norm <= config.stop_feas_tol
            && stationarity <= config.stop_stat_tol
        {
            stop_reason = StopReason::FeasAndStatTol;
            break;
        }

        let data: Vec<f64> = state
            .pt
            .as_slice()
            .iter()
            .zip(d.iter())
            .zip(u.vector.iter())
            .map(|((xi, di), ui)| xi - eta * (di + config.beta * ui))
            .collect();
        let next = state.pt.with_data(data);
        if !next.is_finite() {
            stop_reason = StopReason::NumericalFailure;
            break;
        }

        trace.push(TraceRecord {
            iter: k,
            phase: 1,
            epsilon: state.epsilon,
            f_val: oracle.f_value(&state.pt),
            g_val: oracle.g_value(&state.pt),
            feas_norm,
            grad_p_norm: u.norm(),
            eta,
            theta: config.schedule.theta_at(k),
            mom_norm: 0.0,
            halvings: 0,
            stationarity,
        });

        state.pt = next;
        state.last_grad_p = Some(u);
        state.k = k + 1;
    }

    Ok(RunResult {
        final_state: state,
        trace,
        stop_reason,
        wall_time_seconds: started.elapsed().as_secs_f64(),
    })
}
