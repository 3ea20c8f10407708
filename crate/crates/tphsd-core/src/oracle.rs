//! Problem interface and built-in test problems.
//!
//! An oracle exposes the upper-level objective `f` (value plus one
//! subgradient selection), the lower-level objective `g` (value plus full
//! gradient split as `(grad_x g, grad_y g)`), and optionally the analytic
//! `(n+p) x p` Jacobian of `grad_y g`, whose columns are indexed by the
//! lower-level coordinates.

use nalgebra::DMatrix;

use crate::error::SolverError;
use crate::point::Point;
use crate::rng::SplitMix64;

pub trait ProblemOracle: Send + Sync {
    /// Upper-level dimension.
    fn n(&self) -> usize;
    /// Lower-level dimension.
    fn p(&self) -> usize;
    fn name(&self) -> &'static str;

    fn f_value(&self, pt: &Point) -> f64;

    /// One element of the conservative field of `f`, under the selection
    /// rule documented by each problem. Always finite.
    fn f_subgrad(&self, pt: &Point) -> Vec<f64>;

    fn g_value(&self, pt: &Point) -> f64;

    /// Full gradient of `g`, length `n + p`.
    fn g_grad(&self, pt: &Point) -> Vec<f64>;

    /// Analytic Jacobian of `pt -> grad_y g(pt)`, if the problem provides
    /// one.
    fn jg_analytic(&self, pt: &Point) -> Option<DMatrix<f64>>;

    /// Distance from `pt` to the problem's known solution set, when one
    /// exists in closed form.
    fn solution_distance(&self, _pt: &Point) -> Option<f64> {
        None
    }

    /// The lower-level block of [`ProblemOracle::g_grad`].
    fn g_grad_y(&self, pt: &Point) -> Vec<f64> {
        self.g_grad(pt)[self.n()..].to_vec()
    }

    fn check_point(&self, pt: &Point) -> Result<(), SolverError> {
        if pt.n() != self.n() || pt.p() != self.p() {
            return Err(SolverError::dimension(format!(
                "point is ({}, {}) but problem '{}' is ({}, {})",
                pt.n(),
                pt.p(),
                self.name(),
                self.n(),
                self.p()
            )));
        }
        Ok(())
    }
}

/// Which built-in problem to construct, with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    /// `f = min(|x|, 1) + (1/n) sum_i (y_i - c)^2`,
    /// `g = sum_i sin(x + y_i - c)`, scalar `x`, `y` of length `n`.
    SinSynthetic { n: usize, c: f64 },
    /// `f = (x - x_target)^2/2 + (y - y_target)^2/2`,
    /// `g = curvature * y^2/2 - x y`. Closed-form optimum makes this the
    /// hard-number oracle for the test suite.
    QuadraticBilevel {
        x_target: f64,
        y_target: f64,
        curvature: f64,
    },
    /// `f = (x-1)^2/2 + (y-1)^2/2`, `g = y^q/q - x y` with even `q >= 4`;
    /// the lower level has a degenerate Hessian at `y = 0` yet the stacked
    /// Jacobian keeps full column rank everywhere.
    DegeneratePower { q: u32 },
}

impl ProblemSpec {
    pub fn quadratic_default() -> ProblemSpec {
        ProblemSpec::QuadraticBilevel {
            x_target: 1.0,
            y_target: -1.0,
            curvature: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        match self {
            ProblemSpec::SinSynthetic { n, c } => {
                if *n < 1 {
                    return Err(SolverError::config("sin problem needs n >= 1"));
                }
                if !c.is_finite() {
                    return Err(SolverError::config(format!("c must be finite, got {c}")));
                }
            }
            ProblemSpec::QuadraticBilevel {
                x_target,
                y_target,
                curvature,
            } => {
                if !(x_target.is_finite() && y_target.is_finite()) {
                    return Err(SolverError::config("quad targets must be finite"));
                }
                if !(*curvature != 0.0 && curvature.is_finite()) {
                    return Err(SolverError::config(format!(
                        "quad curvature must be finite and nonzero, got {curvature}"
                    )));
                }
            }
            ProblemSpec::DegeneratePower { q } => {
                if *q < 4 || q % 2 != 0 {
                    return Err(SolverError::config(format!(
                        "degpow needs an even exponent q >= 4, got {q}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        1
    }

    pub fn p(&self) -> usize {
        match self {
            ProblemSpec::SinSynthetic { n, .. } => *n,
            _ => 1,
        }
    }
}

/// Builds the oracle described by `spec`.
pub fn make_problem(spec: &ProblemSpec) -> Result<Box<dyn ProblemOracle>, SolverError> {
    spec.validate()?;
    Ok(match spec {
        ProblemSpec::SinSynthetic { n, c } => Box::new(SinSynthetic { n: *n, c: *c }),
        ProblemSpec::QuadraticBilevel {
            x_target,
            y_target,
            curvature,
        } => Box::new(QuadraticBilevel {
            x_target: *x_target,
            y_target: *y_target,
            curvature: *curvature,
        }),
        ProblemSpec::DegeneratePower { q } => Box::new(DegeneratePower { q: *q }),
    })
}

/// One measurable selection from the conservative field of `f` at `pt`.
pub fn f_subgrad_selection(
    oracle: &dyn ProblemOracle,
    pt: &Point,
) -> Result<Vec<f64>, SolverError> {
    oracle.check_point(pt)?;
    Ok(oracle.f_subgrad(pt))
}

/// Deterministic standard-normal initial point for `spec`.
pub fn random_init(spec: &ProblemSpec, seed: u64) -> Point {
    let dim = spec.n() + spec.p();
    let mut rng = SplitMix64::new(seed);
    let mut data = vec![0.0; dim];
    rng.fill_standard_normal(&mut data);
    Point::new(data, spec.n(), spec.p()).expect("normal draws are finite")
}

/// Max over coordinates of the gap between a central difference of `g`
/// and the analytic gradient, using step `h`.
pub fn check_gradient(oracle: &dyn ProblemOracle, pt: &Point, h: f64) -> Result<f64, SolverError> {
    oracle.check_point(pt)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(SolverError::config(format!("step h must be > 0, got {h}")));
    }
    let grad = oracle.g_grad(pt);
    let mut worst = 0.0f64;
    let base = pt.as_slice();
    for j in 0..pt.dim() {
        let mut up = base.to_vec();
        let mut dn = base.to_vec();
        up[j] += h;
        dn[j] -= h;
        let gu = oracle.g_value(&pt.with_data(up));
        let gd = oracle.g_value(&pt.with_data(dn));
        if !gu.is_finite() || !gd.is_finite() {
            return Err(SolverError::numerical(
                format!("g evaluated non-finite near coordinate {j}"),
                None,
            ));
        }
        let fd = (gu - gd) / (2.0 * h);
        worst = worst.max((fd - grad[j]).abs());
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// sin synthetic
// ---------------------------------------------------------------------------

struct SinSynthetic {
    n: usize,
    c: f64,
}

impl SinSynthetic {
    fn phases(&self, pt: &Point) -> Vec<f64> {
        let x = pt.x()[0];
        pt.y().iter().map(|yi| x + yi - self.c).collect()
    }
}

impl ProblemOracle for SinSynthetic {
    fn n(&self) -> usize {
        1
    }

    fn p(&self) -> usize {
        self.n
    }

    fn name(&self) -> &'static str {
        "sin"
    }

    fn f_value(&self, pt: &Point) -> f64 {
        let x = pt.x()[0];
        let quad: f64 = pt.y().iter().map(|yi| (yi - self.c) * (yi - self.c)).sum();
        x.abs().min(1.0) + quad / self.n as f64
    }

    fn f_subgrad(&self, pt: &Point) -> Vec<f64> {
        let x = pt.x()[0];
        // Selection at the kinks: 0 at x = 0, and at |x| = 1 the flat-side
        // endpoint 0 of [0, sign(x)].
        let dx = if x == 0.0 || x.abs() >= 1.0 {
            0.0
        } else {
            x.signum()
        };
        let mut out = Vec::with_capacity(pt.dim());
        out.push(dx);
        out.extend(pt.y().iter().map(|yi| 2.0 * (yi - self.c) / self.n as f64));
        out
    }

    fn g_value(&self, pt: &Point) -> f64 {
        self.phases(pt).iter().map(|t| t.sin()).sum()
    }

    fn g_grad(&self, pt: &Point) -> Vec<f64> {
        let cos: Vec<f64> = self.phases(pt).iter().map(|t| t.cos()).collect();
        let mut out = Vec::with_capacity(pt.dim());
        out.push(cos.iter().sum());
        out.extend(cos);
        out
    }

    fn jg_analytic(&self, pt: &Point) -> Option<DMatrix<f64>> {
        // Column i carries -sin(x + y_i - c) in the x-row and in row i of
        // the y-block; all other entries vanish.
        let sin: Vec<f64> = self.phases(pt).iter().map(|t| t.sin()).collect();
        let mut j = DMatrix::zeros(1 + self.n, self.n);
        for (i, s) in sin.iter().enumerate() {
            j[(0, i)] = -s;
            j[(1 + i, i)] = -s;
        }
        Some(j)
    }

    fn solution_distance(&self, pt: &Point) -> Option<f64> {
        // Distance to {(0, c - pi/2 + 2 pi v) : v integer per coordinate}.
        let two_pi = 2.0 * std::f64::consts::PI;
        let x = pt.x()[0];
        let mut d2 = x * x;
        for yi in pt.y() {
            let w = yi - (self.c - std::f64::consts::FRAC_PI_2);
            let wrapped = w - two_pi * (w / two_pi).round();
            d2 += wrapped * wrapped;
        }
        Some(d2.sqrt())
    }
}

// ---------------------------------------------------------------------------
// quadratic bilevel
// ---------------------------------------------------------------------------

struct QuadraticBilevel {
    x_target: f64,
    y_target: f64,
    curvature: f64,
}

impl ProblemOracle for QuadraticBilevel {
    fn n(&self) -> usize {
        1
    }

    fn p(&self) -> usize {
        1
    }

    fn name(&self) -> &'static str {
        "quad"
    }

    fn f_value(&self, pt: &Point) -> f64 {
        let dx = pt.x()[0] - self.x_target;
        let dy = pt.y()[0] - self.y_target;
        0.5 * dx * dx + 0.5 * dy * dy
    }

    fn f_subgrad(&self, pt: &Point) -> Vec<f64> {
        vec![pt.x()[0] - self.x_target, pt.y()[0] - self.y_target]
    }

    fn g_value(&self, pt: &Point) -> f64 {
        let (x, y) = (pt.x()[0], pt.y()[0]);
        0.5 * self.curvature * y * y - x * y
    }

    fn g_grad(&self, pt: &Point) -> Vec<f64> {
        let (x, y) = (pt.x()[0], pt.y()[0]);
        vec![-y, self.curvature * y - x]
    }

    fn jg_analytic(&self, _pt: &Point) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_column_slice(2, 1, &[-1.0, self.curvature]))
    }

    fn solution_distance(&self, pt: &Point) -> Option<f64> {
        // Feasible set is y = x / curvature; minimize f along it.
        let k = self.curvature;
        let xs = (self.x_target + self.y_target / k) / (1.0 + 1.0 / (k * k));
        let ys = xs / k;
        let dx = pt.x()[0] - xs;
        let dy = pt.y()[0] - ys;
        Some((dx * dx + dy * dy).sqrt())
    }
}

// ---------------------------------------------------------------------------
// degenerate power
// ---------------------------------------------------------------------------

struct DegeneratePower {
    q: u32,
}

impl ProblemOracle for DegeneratePower {
    fn n(&self) -> usize {
        1
    }

    fn p(&self) -> usize {
        1
    }

    fn name(&self) -> &'static str {
        "degpow"
    }

    fn f_value(&self, pt: &Point) -> f64 {
        let dx = pt.x()[0] - 1.0;
        let dy = pt.y()[0] - 1.0;
        0.5 * dx * dx + 0.5 * dy * dy
    }

    fn f_subgrad(&self, pt: &Point) -> Vec<f64> {
        vec![pt.x()[0] - 1.0, pt.y()[0] - 1.0]
    }

    fn g_value(&self, pt: &Point) -> f64 {
        let (x, y) = (pt.x()[0], pt.y()[0]);
        y.powi(self.q as i32) / self.q as f64 - x * y
    }

    fn g_grad(&self, pt: &Point) -> Vec<f64> {
        let (x, y) = (pt.x()[0], pt.y()[0]);
        vec![-y, y.powi(self.q as i32 - 1) - x]
    }

    fn jg_analytic(&self, pt: &Point) -> Option<DMatrix<f64>> {
        let y = pt.y()[0];
        let qm1 = (self.q - 1) as f64;
        Some(DMatrix::from_column_slice(
            2,
            1,
            &[-1.0, qm1 * y.powi(self.q as i32 - 2)],
        ))
    }

    fn solution_distance(&self, pt: &Point) -> Option<f64> {
        // (1, 1) is feasible (1^(q-1) = 1) and grad f vanishes there.
        let dx = pt.x()[0] - 1.0;
        let dy = pt.y()[0] - 1.0;
        Some((dx * dx + dy * dy).sqrt())
    }
}
