//! Constraint-dissolving machinery.
//!
//! The feasibility penalty is `p = ||grad_y g||^2 / 2` with gradient
//! `grad p = J_g grad_y g`. The map `A` removes the infeasibility seen
//! through `J_g` by a Gauss-Newton style correction, and
//! `h_beta = f(A(.)) + beta * p` is the exact penalty used as a
//! verification oracle. Dense least squares go through a thin Householder
//! QR of `J_g` rather than explicit normal equations.

use nalgebra::{DMatrix, DVector};

use crate::config::GradPMode;
use crate::error::SolverError;
use crate::oracle::ProblemOracle;
use crate::point::Point;

/// An evaluation of `grad p`, possibly contaminated by finite-difference
/// error (`u + e` in finite-difference mode).
#[derive(Debug, Clone, PartialEq)]
pub struct GradPResult {
    pub vector: Vec<f64>,
    pub mode: GradPMode,
    /// Forward-difference step actually used; 0 in analytic mode.
    pub t_used: f64,
}

impl GradPResult {
    pub fn norm(&self) -> f64 {
        self.vector.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// KKT residual data at a point: `residual = min_l ||d + J_g l||` with the
/// minimizing multiplier, plus the feasibility norm.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarityReport {
    pub residual: f64,
    pub multiplier: Vec<f64>,
    pub feas: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `p(pt) = ||grad_y g(pt)||^2 / 2`; zero exactly on the feasible set.
pub fn penalty_value(oracle: &dyn ProblemOracle, pt: &Point) -> Result<f64, SolverError> {
    oracle.check_point(pt)?;
    let gy = oracle.g_grad_y(pt);
    Ok(0.5 * gy.iter().map(|v| v * v).sum::<f64>())
}

fn jg_or_config_err(oracle: &dyn ProblemOracle, pt: &Point) -> Result<DMatrix<f64>, SolverError> {
    oracle.jg_analytic(pt).ok_or_else(|| {
        SolverError::config(format!(
            "problem '{}' provides no analytic Jacobian of grad_y g",
            oracle.name()
        ))
    })
}

/// Exact `grad p = J_g grad_y g`, available only with an analytic Jacobian.
pub fn grad_p_exact(oracle: &dyn ProblemOracle, pt: &Point) -> Result<GradPResult, SolverError> {
    oracle.check_point(pt)?;
    let j = jg_or_config_err(oracle, pt)?;
    let gy = DVector::from_vec(oracle.g_grad_y(pt));
    let v = &j * gy;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(SolverError::numerical("grad p evaluated non-finite", None));
    }
    Ok(GradPResult {
        vector: v.as_slice().to_vec(),
        mode: GradPMode::Analytic,
        t_used: 0.0,
    })
}

/// Hessian-free forward difference for `grad p`: the full gradient of `g`
/// is re-evaluated at the point shifted by `t * grad_y g` in the `y`-block
/// only, and differenced against the base gradient.
pub fn grad_p_fd(
    oracle: &dyn ProblemOracle,
    pt: &Point,
    t: f64,
) -> Result<GradPResult, SolverError> {
    oracle.check_point(pt)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(SolverError::config(format!(
            "fd step t must be > 0, got {t}"
        )));
    }
    let base_grad = oracle.g_grad(pt);
    let gy = &base_grad[oracle.n()..];
    let mut probe = pt.as_slice().to_vec();
    for (slot, g) in probe[oracle.n()..].iter_mut().zip(gy.iter()) {
        *slot += t * g;
    }
    let probe_grad = oracle.g_grad(&pt.with_data(probe));
    let v: Vec<f64> = probe_grad
        .iter()
        .zip(base_grad.iter())
        .map(|(a, b)| (a - b) / t)
        .collect();
    if v.iter().any(|x| !x.is_finite()) {
        return Err(SolverError::numerical(
            "forward difference of grad g evaluated non-finite",
            None,
        ));
    }
    Ok(GradPResult {
        vector: v,
        mode: GradPMode::FiniteDifference,
        t_used: t,
    })
}

/// Evaluates `grad p` in the requested mode, using `t` for the
/// finite-difference branch.
pub fn grad_p(
    oracle: &dyn ProblemOracle,
    pt: &Point,
    mode: GradPMode,
    t: f64,
) -> Result<GradPResult, SolverError> {
    match mode {
        GradPMode::Analytic => grad_p_exact(oracle, pt),
        GradPMode::FiniteDifference => grad_p_fd(oracle, pt, t),
    }
}

/// Default rank tolerance relative to the largest column norm of `J_g`.
pub fn default_rank_tol(j: &DMatrix<f64>) -> f64 {
    1e-10 * max_column_norm(j)
}

fn max_column_norm(j: &DMatrix<f64>) -> f64 {
    (0..j.ncols())
        .map(|c| j.column(c).norm())
        .fold(0.0f64, f64::max)
}

struct ThinQr {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
}

/// Householder QR with a rank gate on the diagonal of `R`.
fn thin_qr(j: &DMatrix<f64>, rank_tol: f64, iter: Option<usize>) -> Result<ThinQr, SolverError> {
    if j.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::numerical("J_g has non-finite entries", iter));
    }
    if max_column_norm(j) == 0.0 {
        return Err(SolverError::rank_deficient("J_g is identically zero", iter));
    }
    let qr = j.clone().qr();
    let r = qr.r();
    let min_diag = (0..r.nrows().min(r.ncols()))
        .map(|i| r[(i, i)].abs())
        .fold(f64::INFINITY, f64::min);
    if min_diag < rank_tol {
        return Err(SolverError::rank_deficient(
            format!("smallest R diagonal {min_diag:e} below tolerance {rank_tol:e}"),
            iter,
        ));
    }
    Ok(ThinQr { q: qr.q(), r })
}

/// The constraint-dissolving map: `A(pt) = pt - J_g w` where `w` solves
/// `(J_g' J_g) w = grad_y g`, via the QR factors. Identity on the feasible
/// set.
pub fn a_map(oracle: &dyn ProblemOracle, pt: &Point, rank_tol: f64) -> Result<Point, SolverError> {
    oracle.check_point(pt)?;
    let j = jg_or_config_err(oracle, pt)?;
    let qr = thin_qr(&j, rank_tol, None)?;
    let gy = DVector::from_vec(oracle.g_grad_y(pt));
    // R' R w = gy  =>  two triangular solves.
    let z =
        qr.r.transpose()
            .solve_lower_triangular(&gy)
            .ok_or_else(|| SolverError::rank_deficient("singular R factor", None))?;
    let w =
        qr.r.solve_upper_triangular(&z)
            .ok_or_else(|| SolverError::rank_deficient("singular R factor", None))?;
    let correction = &j * w;
    let data: Vec<f64> = pt
        .as_slice()
        .iter()
        .zip(correction.iter())
        .map(|(a, c)| a - c)
        .collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::numerical(
            "A map produced non-finite output",
            None,
        ));
    }
    Ok(pt.with_data(data))
}

/// `h_beta(pt) = f(A(pt)) + beta * p(pt)`.
pub fn h_beta_value(
    oracle: &dyn ProblemOracle,
    pt: &Point,
    beta: f64,
    rank_tol: f64,
) -> Result<f64, SolverError> {
    let mapped = a_map(oracle, pt, rank_tol)?;
    Ok(oracle.f_value(&mapped) + beta * penalty_value(oracle, pt)?)
}

/// Central-difference gradient of `h_beta`; a verification oracle, not a
/// solver path.
pub fn h_beta_grad_fd(
    oracle: &dyn ProblemOracle,
    pt: &Point,
    beta: f64,
    h: f64,
    rank_tol: f64,
) -> Result<Vec<f64>, SolverError> {
    oracle.check_point(pt)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(SolverError::config(format!("step h must be > 0, got {h}")));
    }
    let base = pt.as_slice();
    let mut out = Vec::with_capacity(pt.dim());
    for j in 0..pt.dim() {
        let mut up = base.to_vec();
        let mut dn = base.to_vec();
        up[j] += h;
        dn[j] -= h;
        let hu = h_beta_value(oracle, &pt.with_data(up), beta, rank_tol)?;
        let hd = h_beta_value(oracle, &pt.with_data(dn), beta, rank_tol)?;
        out.push((hu - hd) / (2.0 * h));
    }
    Ok(out)
}

/// Least-squares KKT residual for the subgradient selection at `pt`.
pub fn stationarity_measure(
    oracle: &dyn ProblemOracle,
    pt: &Point,
    rank_tol: f64,
) -> Result<StationarityReport, SolverError> {
    oracle.check_point(pt)?;
    let d = oracle.f_subgrad(pt);
    let j = jg_or_config_err(oracle, pt)?;
    let feas = norm(&oracle.g_grad_y(pt));
    let qr = thin_qr(&j, rank_tol, None)?;
    let neg_d = DVector::from_iterator(d.len(), d.iter().map(|v| -v));
    let rhs = qr.q.transpose() * &neg_d;
    let lambda =
        qr.r.solve_upper_triangular(&rhs)
            .ok_or_else(|| SolverError::rank_deficient("singular R factor", None))?;
    let resid_vec = DVector::from_vec(d.clone()) + &j * &lambda;
    Ok(StationarityReport {
        residual: resid_vec.norm(),
        multiplier: lambda.as_slice().to_vec(),
        feas,
    })
}

/// Smallest singular value of `J_g(pt)` by dense SVD.
pub fn sigma_min_jg(oracle: &dyn ProblemOracle, pt: &Point) -> Result<f64, SolverError> {
    oracle.check_point(pt)?;
    let j = jg_or_config_err(oracle, pt)?;
    if j.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::numerical("J_g has non-finite entries", None));
    }
    let sv = j.singular_values();
    Ok(sv.iter().fold(f64::INFINITY, |acc, v| acc.min(*v)))
}
