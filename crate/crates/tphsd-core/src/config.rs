//! Run configuration and defaults.

use crate::error::SolverError;
use crate::schedule::StepSchedule;

/// How `grad p = J_g grad_y g` is evaluated inside the solver loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradPMode {
    /// Exact product using the analytic Jacobian of `grad_y g`.
    Analytic,
    /// Hessian-free forward difference of the full gradient of `g` along
    /// `grad_y g`, with step `t_k = fd_t0 * (k+1)^(-fd_decay)`.
    FiniteDifference,
}

impl GradPMode {
    pub fn parse(s: &str) -> Result<GradPMode, SolverError> {
        match s {
            "analytic" => Ok(GradPMode::Analytic),
            "finite_difference" => Ok(GradPMode::FiniteDifference),
            other => Err(SolverError::config(format!(
                "grad_p_mode must be 'analytic' or 'finite_difference', got '{other}'"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            GradPMode::Analytic => "analytic",
            GradPMode::FiniteDifference => "finite_difference",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub schedule: StepSchedule,
    /// Heavy-ball momentum parameter, in `[0, 1)`.
    pub alpha: f64,
    /// Initial phase tolerance, halved on every switch out of the
    /// optimization phase.
    pub eps0: f64,
    /// Penalty parameter for `h_beta`; diagnostics only, the hybrid loop
    /// never consumes it.
    pub beta: f64,
    pub max_iters: usize,
    /// Initial finite-difference step.
    pub fd_t0: f64,
    /// Decay exponent of `t_k = fd_t0 * (k+1)^(-fd_decay)`.
    pub fd_decay: f64,
    pub grad_p_mode: GradPMode,
    /// Stationarity is measured at iterations divisible by this period
    /// (and at the final iteration); other rows carry the -1 sentinel.
    pub stationarity_every: usize,
    pub seed: u64,
    /// Early-stop thresholds; the run halts once the feasibility residual
    /// and the stationarity residual are both at or below these. Zero
    /// effectively disables early stopping.
    pub stop_feas_tol: f64,
    pub stop_stat_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schedule: StepSchedule {
                eta0: 0.1,
                theta0: 0.1,
                a: 0.9,
                b: 0.6,
            },
            alpha: 0.9,
            eps0: 1.0,
            beta: 10.0,
            max_iters: 20_000,
            fd_t0: 1e-4,
            fd_decay: 0.3,
            grad_p_mode: GradPMode::Analytic,
            stationarity_every: 100,
            seed: 0,
            stop_feas_tol: 0.0,
            stop_stat_tol: 0.0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        self.schedule.validate()?;
        if !(self.alpha >= 0.0 && self.alpha < 1.0) {
            return Err(SolverError::config(format!(
                "alpha must lie in [0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.eps0 > 0.0 && self.eps0.is_finite()) {
            return Err(SolverError::config(format!(
                "eps0 must be > 0, got {}",
                self.eps0
            )));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(SolverError::config(format!(
                "beta must be > 0, got {}",
                self.beta
            )));
        }
        if self.max_iters < 1 {
            return Err(SolverError::config("max_iters must be >= 1"));
        }
        if !(self.fd_t0 > 0.0 && self.fd_t0.is_finite()) {
            return Err(SolverError::config(format!(
                "fd_t0 must be > 0, got {}",
                self.fd_t0
            )));
        }
        if !(self.fd_decay >= 0.0 && self.fd_decay.is_finite()) {
            return Err(SolverError::config(format!(
                "fd_decay must be >= 0, got {}",
                self.fd_decay
            )));
        }
        if self.stationarity_every < 1 {
            return Err(SolverError::config("stationarity_every must be >= 1"));
        }
        if !self.stop_feas_tol.is_finite() || self.stop_feas_tol < 0.0 {
            return Err(SolverError::config("stop_feas_tol must be >= 0"));
        }
        if !self.stop_stat_tol.is_finite() || self.stop_stat_tol < 0.0 {
            return Err(SolverError::config("stop_stat_tol must be >= 0"));
        }
        Ok(())
    }

    /// Finite-difference step used at iteration `k`.
    pub fn fd_step_at(&self, k: usize) -> f64 {
        self.fd_t0 * ((k + 1) as f64).powf(-self.fd_decay)
    }
}
