//! The two update subroutines and the shared heavy-ball momentum.
//!
//! Both subroutines move the upper block by the momentum-averaged
//! subgradient scaled with the slow stepsize `eta_k`. The optimization
//! step additionally applies the fast stepsize `theta_k` to an evaluation
//! of `grad p` on the whole iterate, while the restoration step applies it
//! to `grad_y g` on the lower block only.

use crate::config::{GradPMode, RunConfig};
use crate::error::SolverError;
use crate::oracle::{f_subgrad_selection, ProblemOracle};
use crate::penalty::{grad_p, GradPResult};
use crate::point::Point;

/// Heavy-ball momentum accumulator. The first observed subgradient becomes
/// the initial momentum, so `||m_k||` can never exceed the largest
/// subgradient norm seen so far.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumState {
    m: Vec<f64>,
    initialized: bool,
}

impl MomentumState {
    pub fn new(dim: usize) -> MomentumState {
        MomentumState {
            m: vec![0.0; dim],
            initialized: false,
        }
    }

    pub fn m(&self) -> &[f64] {
        &self.m
    }

    pub fn is_initialized(&self) -> bool {
        self.initialized
    }

    pub fn norm(&self) -> f64 {
        self.m.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// `m' = alpha m + (1 - alpha) d`, or `m' = d` on the first call.
pub fn momentum_update(
    state: &MomentumState,
    d: &[f64],
    alpha: f64,
) -> Result<MomentumState, SolverError> {
    if d.len() != state.m.len() {
        return Err(SolverError::dimension(format!(
            "momentum has {} entries, direction has {}",
            state.m.len(),
            d.len()
        )));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(SolverError::config(format!(
            "alpha must lie in [0, 1), got {alpha}"
        )));
    }
    let m = if state.initialized {
        state
            .m
            .iter()
            .zip(d.iter())
            .map(|(mi, di)| alpha * mi + (1.0 - alpha) * di)
            .collect()
    } else {
        d.to_vec()
    };
    Ok(MomentumState {
        m,
        initialized: true,
    })
}

/// Result of one subroutine step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_pt: Point,
    pub next_m: MomentumState,
    pub d_norm: f64,
    /// Norm of the `grad p` evaluation consumed by the step; 0 for the
    /// restoration step, which does not use it.
    pub u_plus_e_norm: f64,
    /// `||grad_y g||` at the pre-step iterate.
    pub feas_norm: f64,
}

fn vec_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn finite_or_fail(pt: Point, k: usize) -> Result<Point, SolverError> {
    if pt.is_finite() {
        Ok(pt)
    } else {
        Err(SolverError::numerical(
            "iterate left the finite range",
            Some(k),
        ))
    }
}

/// Optimization step with a caller-supplied `grad p` evaluation, so the
/// hybrid driver can reuse the evaluation it already made for its phase
/// decision.
pub fn tmg_step_with_grad_p(
    oracle: &dyn ProblemOracle,
    pt: &Point,
    m: &MomentumState,
    k: usize,
    config: &RunConfig,
    u: &GradPResult,
) -> Result<StepOutcome, SolverError> {
    oracle.check_point(pt)?;
    let d = f_subgrad_selection(oracle, pt)?;
    let next_m = momentum_update(m, &d, config.alpha)?;
    let eta = config.schedule.eta_at(k);
    let theta = config.schedule.theta_at(k);
    let data: Vec<f64> = pt
        .as_slice()
        .iter()
        .zip(next_m.m().iter())
        .zip(u.vector.iter())
        .map(|((xi, mi), ui)| xi - eta * mi - theta * ui)
        .collect();
    let next_pt = finite_or_fail(pt.with_data(data), k)?;
    let feas_norm = vec_norm(&oracle.g_grad_y(pt));
    Ok(StepOutcome {
        next_pt,
        u_plus_e_norm: u.norm(),
        d_norm: vec_norm(&d),
        next_m,
        feas_norm,
    })
}

/// One optimization-phase step: evaluates `grad p` in the configured mode
/// and applies the two-timescale update.
pub fn tmg_step(
    oracle: &dyn ProblemOracle,
    pt: &Point,
    m: &MomentumState,
    k: usize,
    config: &RunConfig,
) -> Result<StepOutcome, SolverError> {
    let t = match config.grad_p_mode {
        GradPMode::Analytic => 0.0,
        GradPMode::FiniteDifference => config.fd_step_at(k),
    };
    let u = grad_p(oracle, pt, config.grad_p_mode, t)?;
    tmg_step_with_grad_p(oracle, pt, m, k, config, &u)
}

/// One restoration-phase step: the lower block additionally descends along
/// `grad_y g`, the upper block moves only with the momentum term.
pub fn frg_step(
    oracle: &dyn ProblemOracle,
    pt: &Point,
    m: &MomentumState,
    k: usize,
    config: &RunConfig,
) -> Result<StepOutcome, SolverError> {
    oracle.check_point(pt)?;
    let d = f_subgrad_selection(oracle, pt)?;
    let next_m = momentum_update(m, &d, config.alpha)?;
    let eta = config.schedule.eta_at(k);
    let theta = config.schedule.theta_at(k);
    let gy = oracle.g_grad_y(pt);
    let n = oracle.n();
    let mut data: Vec<f64> = pt
        .as_slice()
        .iter()
        .zip(next_m.m().iter())
        .map(|(xi, mi)| xi - eta * mi)
        .collect();
    for (slot, g) in data[n..].iter_mut().zip(gy.iter()) {
        *slot -= theta * g;
    }
    let next_pt = finite_or_fail(pt.with_data(data), k)?;
    Ok(StepOutcome {
        next_pt,
        u_plus_e_norm: 0.0,
        d_norm: vec_norm(&d),
        next_m,
        feas_norm: vec_norm(&gy),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{make_problem, ProblemSpec};
    use crate::schedule::StepSchedule;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn quad() -> Box<dyn ProblemOracle> {
        make_problem(&ProblemSpec::quadratic_default()).unwrap()
    }

    fn config(eta0: f64, theta0: f64, alpha: f64) -> RunConfig {
        RunConfig {
            schedule: StepSchedule::new(eta0, theta0, 0.9, 0.6).unwrap(),
            alpha,
            ..RunConfig::default()
        }
    }

    #[test]
    fn momentum_initializes_with_first_direction() {
        let m0 = MomentumState::new(2);
        let m1 = momentum_update(&m0, &[1.0, 0.0], 0.9).unwrap();
        assert_eq!(m1.m(), &[1.0, 0.0]);
        assert!(m1.is_initialized());
    }

    #[test]
    fn momentum_convex_combination() {
        let m0 = MomentumState::new(2);
        let m1 = momentum_update(&m0, &[1.0, 0.0], 0.9).unwrap();
        let m2 = momentum_update(&m1, &[0.0, 1.0], 0.9).unwrap();
        assert_relative_eq!(m2.m()[0], 0.9, max_relative = 1e-15);
        assert_relative_eq!(m2.m()[1], 0.1, max_relative = 1e-15);
    }

    #[test]
    fn momentum_fixed_point() {
        let m0 = MomentumState::new(2);
        let m1 = momentum_update(&m0, &[1.0, 0.0], 0.3).unwrap();
        for alpha in [0.0, 0.5, 0.99] {
            let m2 = momentum_update(&m1, &[1.0, 0.0], alpha).unwrap();
            assert_eq!(m2.m(), &[1.0, 0.0]);
        }
    }

    #[test]
    fn momentum_rejects_mismatched_dims() {
        let m0 = MomentumState::new(2);
        assert!(momentum_update(&m0, &[1.0], 0.9).is_err());
    }

    #[test]
    fn momentum_rejects_alpha_outside_unit_interval() {
        let m0 = MomentumState::new(2);
        assert!(momentum_update(&m0, &[1.0, 0.0], 1.0).is_err());
        assert!(momentum_update(&m0, &[1.0, 0.0], -0.1).is_err());
    }

    #[test]
    fn tmg_step_by_hand() {
        // d = (-1, 2), m' = d with alpha = 0, u = (-1, 1), eta = 0.1,
        // theta = 0.01: next = (0.11, 0.79).
        let o = quad();
        let cfg = config(0.1, 0.01, 0.0);
        let pt = Point::from_xy(0.0, 1.0).unwrap();
        let m = MomentumState::new(2);
        let out = tmg_step(o.as_ref(), &pt, &m, 0, &cfg).unwrap();
        assert_relative_eq!(out.next_pt.x()[0], 0.11, max_relative = 1e-14);
        assert_relative_eq!(out.next_pt.y()[0], 0.79, max_relative = 1e-14);
        assert_relative_eq!(out.d_norm, 5.0f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(out.u_plus_e_norm, 2.0f64.sqrt(), max_relative = 1e-14);
        assert_eq!(out.feas_norm, 1.0);
    }

    #[test]
    fn frg_step_by_hand() {
        let o = quad();
        let cfg = config(0.1, 0.01, 0.0);
        let pt = Point::from_xy(0.0, 1.0).unwrap();
        let m = MomentumState::new(2);
        let out = frg_step(o.as_ref(), &pt, &m, 0, &cfg).unwrap();
        assert_relative_eq!(out.next_pt.x()[0], 0.1, max_relative = 1e-14);
        assert_relative_eq!(out.next_pt.y()[0], 0.79, max_relative = 1e-14);
        assert_eq!(out.u_plus_e_norm, 0.0);
    }

    /// Oracle with a constant upper objective, so every subgradient is 0.
    struct ConstantF;

    impl ProblemOracle for ConstantF {
        fn n(&self) -> usize {
            1
        }
        fn p(&self) -> usize {
            1
        }
        fn name(&self) -> &'static str {
            "constf"
        }
        fn f_value(&self, _pt: &Point) -> f64 {
            0.0
        }
        fn f_subgrad(&self, _pt: &Point) -> Vec<f64> {
            vec![0.0, 0.0]
        }
        fn g_value(&self, pt: &Point) -> f64 {
            let (x, y) = (pt.x()[0], pt.y()[0]);
            0.5 * y * y - x * y
        }
        fn g_grad(&self, pt: &Point) -> Vec<f64> {
            let (x, y) = (pt.x()[0], pt.y()[0]);
            vec![-y, y - x]
        }
        fn jg_analytic(&self, _pt: &Point) -> Option<DMatrix<f64>> {
            Some(DMatrix::from_column_slice(2, 1, &[-1.0, 1.0]))
        }
    }

    #[test]
    fn zero_directions_leave_the_point_alone() {
        let o = ConstantF;
        let cfg = config(0.1, 0.01, 0.0);
        let pt = Point::from_xy(0.5, 0.5).unwrap(); // feasible: y = x
        let m = MomentumState::new(2);
        let out = tmg_step(&o, &pt, &m, 0, &cfg).unwrap();
        assert_eq!(out.next_pt.as_slice(), pt.as_slice());
        let out = frg_step(&o, &pt, &m, 0, &cfg).unwrap();
        assert_eq!(out.next_pt.as_slice(), pt.as_slice());
    }

    #[test]
    fn frg_moves_only_by_the_feasibility_term_when_d_vanishes() {
        let o = ConstantF;
        let cfg = config(0.1, 0.01, 0.0);
        let pt = Point::from_xy(0.0, 1.0).unwrap();
        let m = MomentumState::new(2);
        let out = frg_step(&o, &pt, &m, 0, &cfg).unwrap();
        assert_eq!(out.next_pt.x()[0], 0.0);
        assert_relative_eq!(out.next_pt.y()[0], 0.99, max_relative = 1e-14);
    }

    #[test]
    fn step_decomposition_residual_vanishes() {
        let o = quad();
        let cfg = config(0.05, 0.2, 0.9);
        let mut pt = Point::from_xy(2.0, -1.0).unwrap();
        let mut m = MomentumState::new(2);
        for k in 0..50 {
            let u = grad_p(o.as_ref(), &pt, GradPMode::Analytic, 0.0).unwrap();
            let out = tmg_step_with_grad_p(o.as_ref(), &pt, &m, k, &cfg, &u).unwrap();
            let eta = cfg.schedule.eta_at(k);
            let theta = cfg.schedule.theta_at(k);
            for i in 0..2 {
                let resid = out.next_pt.as_slice()[i] - pt.as_slice()[i]
                    + eta * out.next_m.m()[i]
                    + theta * u.vector[i];
                let scale = pt.as_slice()[i].abs().max(1.0);
                assert!(resid.abs() <= 1e-12 * scale, "k={k}, i={i}: {resid}");
            }
            pt = out.next_pt;
            m = out.next_m;
        }
    }

    #[test]
    fn steps_are_deterministic() {
        let o = quad();
        let cfg = config(0.1, 0.1, 0.9);
        let pt = Point::from_xy(1.3, -0.4).unwrap();
        let m = momentum_update(&MomentumState::new(2), &[0.25, -0.5], 0.9).unwrap();
        let a = tmg_step(o.as_ref(), &pt, &m, 7, &cfg).unwrap();
        let b = tmg_step(o.as_ref(), &pt, &m, 7, &cfg).unwrap();
        assert_eq!(a, b);
        // bit-identical, not merely close
        for (x, y) in a.next_pt.as_slice().iter().zip(b.next_pt.as_slice()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn non_finite_iterates_abort() {
        let o = quad();
        let mut cfg = config(1e300, 0.1, 0.0);
        cfg.max_iters = 10;
        let pt = Point::from_xy(2.0, -1.0).unwrap();
        let m = MomentumState::new(2);
        let out = tmg_step(o.as_ref(), &pt, &m, 0, &cfg);
        // one giant step may stay finite; iterate once more if needed
        match out {
            Err(e) => assert!(!e.is_pre_run()),
            Ok(o1) => {
                let e = tmg_step(o.as_ref(), &o1.next_pt, &o1.next_m, 1, &cfg).unwrap_err();
                assert!(!e.is_pre_run());
            }
        }
    }
}
