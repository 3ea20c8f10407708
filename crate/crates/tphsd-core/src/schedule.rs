//! Polynomial two-timescale stepsize schedules.
//!
//! The slow (subgradient) stepsize is `eta_k = eta0 * (k+1)^(-a)` and the
//! fast (feasibility) stepsize is `theta_k = theta0 * (k+1)^(-b)`. The
//! exponent chain `0 < a/2 < b < a < 1` makes both sequences vanish while
//! `eta_k / theta_k -> 0` and `theta_k^2 / eta_k -> 0`.

use crate::error::SolverError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    pub eta0: f64,
    pub theta0: f64,
    pub a: f64,
    pub b: f64,
}

impl StepSchedule {
    pub fn new(eta0: f64, theta0: f64, a: f64, b: f64) -> Result<StepSchedule, SolverError> {
        let s = StepSchedule { eta0, theta0, a, b };
        s.validate()?;
        Ok(s)
    }

    /// Checks `eta0, theta0 > 0` and the exponent chain, naming the first
    /// violated relation. Non-finite values fail the relevant check.
    pub fn validate(&self) -> Result<(), SolverError> {
        let StepSchedule { eta0, theta0, a, b } = *self;
        if !eta0.is_finite() || eta0 <= 0.0 {
            return Err(SolverError::config(format!("eta0 must be > 0, got {eta0}")));
        }
        if !theta0.is_finite() || theta0 <= 0.0 {
            return Err(SolverError::config(format!(
                "theta0 must be > 0, got {theta0}"
            )));
        }
        if !a.is_finite() || a <= 0.0 {
            return Err(SolverError::config(format!("need a > 0, got a={a}")));
        }
        if a >= 1.0 {
            return Err(SolverError::config(format!("need a < 1, got a={a}")));
        }
        if !b.is_finite() || b <= a / 2.0 {
            return Err(SolverError::config(format!(
                "need b > a/2, got b={b} <= a/2={}",
                a / 2.0
            )));
        }
        if b >= a {
            return Err(SolverError::config(format!(
                "need b < a, got b={b} >= a={a}"
            )));
        }
        Ok(())
    }

    /// `eta_k = eta0 * (k+1)^(-a)`
    pub fn eta_at(&self, k: usize) -> f64 {
        self.eta0 * ((k + 1) as f64).powf(-self.a)
    }

    /// `theta_k = theta0 * (k+1)^(-b)`
    pub fn theta_at(&self, k: usize) -> f64 {
        self.theta0 * ((k + 1) as f64).powf(-self.b)
    }
}

/// Freestanding form of [`StepSchedule::validate`].
pub fn validate_schedule(s: &StepSchedule) -> Result<(), SolverError> {
    s.validate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn accepts_reference_schedule() {
        assert!(StepSchedule::new(0.1, 0.1, 0.9, 0.6).is_ok());
    }

    #[test]
    fn rejects_b_at_or_below_half_a() {
        let err = StepSchedule::new(0.1, 0.1, 0.5, 0.2).unwrap_err();
        assert!(err.to_string().contains("b > a/2"));
        assert!(StepSchedule::new(0.1, 0.1, 0.5, 0.25).is_err());
    }

    #[test]
    fn rejects_b_at_or_above_a() {
        let err = StepSchedule::new(0.1, 0.1, 0.9, 0.9).unwrap_err();
        assert!(err.to_string().contains("b < a"));
    }

    #[test]
    fn rejects_nonpositive_scales_and_bad_a() {
        assert!(StepSchedule::new(0.0, 0.1, 0.9, 0.6).is_err());
        assert!(StepSchedule::new(0.1, -1.0, 0.9, 0.6).is_err());
        assert!(StepSchedule::new(0.1, 0.1, 1.0, 0.6).is_err());
        assert!(StepSchedule::new(0.1, 0.1, 1.3, 0.9).is_err());
    }

    #[test]
    fn eta_values() {
        let s = StepSchedule::new(0.1, 0.1, 0.9, 0.6).unwrap();
        assert_eq!(s.eta_at(0), 0.1);
        // 0.1 * 4^(-0.9)
        assert_relative_eq!(s.eta_at(3), 0.028717458874925873, max_relative = 1e-14);
        let s = StepSchedule::new(1.0, 0.1, 0.5, 0.3).unwrap();
        assert_relative_eq!(s.eta_at(3), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn theta_values_and_ratio() {
        let s = StepSchedule::new(0.1, 0.1, 0.9, 0.6).unwrap();
        assert_eq!(s.theta_at(0), 0.1);
        let s2 = StepSchedule::new(0.1, 0.2, 0.9, 0.5).unwrap();
        assert_relative_eq!(s2.theta_at(3), 0.1, max_relative = 1e-15);
        // eta_k / theta_k at k=999 is 1000^(-0.3) for matched scales
        let r = s.eta_at(999) / s.theta_at(999);
        assert_relative_eq!(r, 0.12589254117941673, max_relative = 1e-13);
    }

    #[test]
    fn partial_sums_diverge_like_the_integral_bound() {
        // sum_{k<K} eta_k >= eta0 ((K+1)^(1-a) - 1) / (1-a)
        let s = StepSchedule::new(0.1, 0.1, 0.9, 0.6).unwrap();
        for k_max in [10usize, 100, 1000, 10000] {
            let sum: f64 = (0..k_max).map(|k| s.eta_at(k)).sum();
            let bound = s.eta0 * (((k_max + 1) as f64).powf(1.0 - s.a) - 1.0) / (1.0 - s.a);
            assert!(sum >= bound, "K={k_max}: {sum} < {bound}");
        }
    }
}
