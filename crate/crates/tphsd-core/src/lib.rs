//! Solver library for nonconvex-nonconvex bilevel optimization.
//!
//! The lower-level stationarity condition `grad_y g(x, y) = 0` turns the
//! bilevel problem into an equality-constrained one. This crate provides
//! the two-timescale momentum subgradient step, a feasibility restoration
//! step, the hybrid driver that alternates between them with an adaptive
//! tolerance, and the constraint-dissolving penalty machinery used both
//! inside the driver and as a verification oracle. Built-in test problems
//! with analytic derivatives and closed-form optima back the test suite
//! and the command-line front end.

pub mod config;
pub mod error;
pub mod hybrid;
pub mod oracle;
pub mod penalty;
pub mod point;
pub mod rng;
pub mod schedule;
pub mod schemes;
pub mod trace;

pub use config::{GradPMode, RunConfig};
pub use error::{ErrorKind, SolverError};
pub use hybrid::{
    baseline_penalty_descent, run_tphsd, run_tphsd_observed, tphsd_decide, zero_feas_guard, Phase,
    PhaseDecision, RunResult, SolverState, StepObservation, StopReason,
};
pub use oracle::{
    check_gradient, f_subgrad_selection, make_problem, random_init, ProblemOracle, ProblemSpec,
};
pub use penalty::{
    a_map, default_rank_tol, grad_p, grad_p_exact, grad_p_fd, h_beta_grad_fd, h_beta_value,
    penalty_value, sigma_min_jg, stationarity_measure, GradPResult, StationarityReport,
};
pub use point::Point;
pub use schedule::{validate_schedule, StepSchedule};
pub use schemes::{frg_step, momentum_update, tmg_step, MomentumState, StepOutcome};
pub use trace::{trace_from_csv, trace_to_csv, TraceRecord, STATIONARITY_SENTINEL, TRACE_HEADER};
