//! Per-iteration metrics and their CSV serialization.
//!
//! The column set is fixed; floats are printed with 17 significant digits
//! so a written trace parses back bit-exactly.

use crate::error::SolverError;

/// Exact header of `trace.csv`.
pub const TRACE_HEADER: &str =
    "iter,phase,epsilon,f,g,feas,grad_p,eta,theta,mom,halvings,stationarity";

/// Sentinel stored in the `stationarity` column on iterations where the
/// measure was not computed.
pub const STATIONARITY_SENTINEL: f64 = -1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    /// 1 = optimization phase, 2 = feasibility restoration phase.
    pub phase: u8,
    pub epsilon: f64,
    pub f_val: f64,
    pub g_val: f64,
    /// `||grad_y g||` at the iterate.
    pub feas_norm: f64,
    /// `||u_k + e_k||`, the evaluated penalty-gradient norm.
    pub grad_p_norm: f64,
    pub eta: f64,
    pub theta: f64,
    pub mom_norm: f64,
    pub halvings: u32,
    /// KKT residual, or [`STATIONARITY_SENTINEL`] when skipped.
    pub stationarity: f64,
}

/// Formats a float with 17 significant digits, enough for f64 round-trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl TraceRecord {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.iter,
            self.phase,
            fmt_f64(self.epsilon),
            fmt_f64(self.f_val),
            fmt_f64(self.g_val),
            fmt_f64(self.feas_norm),
            fmt_f64(self.grad_p_norm),
            fmt_f64(self.eta),
            fmt_f64(self.theta),
            fmt_f64(self.mom_norm),
            self.halvings,
            fmt_f64(self.stationarity),
        )
    }

    pub fn from_csv_row(row: &str) -> Result<TraceRecord, SolverError> {
        let cols: Vec<&str> = row.trim_end_matches(['\n', '\r']).split(',').collect();
        if cols.len() != 12 {
            return Err(SolverError::config(format!(
                "trace row has {} columns, expected 12",
                cols.len()
            )));
        }
        let fu = |s: &str, name: &str| -> Result<f64, SolverError> {
            s.parse::<f64>()
                .map_err(|e| SolverError::config(format!("bad {name} value '{s}': {e}")))
        };
        Ok(TraceRecord {
            iter: cols[0]
                .parse()
                .map_err(|e| SolverError::config(format!("bad iter '{}': {e}", cols[0])))?,
            phase: cols[1]
                .parse()
                .map_err(|e| SolverError::config(format!("bad phase '{}': {e}", cols[1])))?,
            epsilon: fu(cols[2], "epsilon")?,
            f_val: fu(cols[3], "f")?,
            g_val: fu(cols[4], "g")?,
            feas_norm: fu(cols[5], "feas")?,
            grad_p_norm: fu(cols[6], "grad_p")?,
            eta: fu(cols[7], "eta")?,
            theta: fu(cols[8], "theta")?,
            mom_norm: fu(cols[9], "mom")?,
            halvings: cols[10]
                .parse()
                .map_err(|e| SolverError::config(format!("bad halvings '{}': {e}", cols[10])))?,
            stationarity: fu(cols[11], "stationarity")?,
        })
    }
}

/// Renders a full trace, header included, with LF line endings.
pub fn trace_to_csv(records: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_csv_row());
        out.push('\n');
    }
    out
}

/// Parses a trace produced by [`trace_to_csv`].
pub fn trace_from_csv(text: &str) -> Result<Vec<TraceRecord>, SolverError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TRACE_HEADER => {}
        other => {
            return Err(SolverError::config(format!(
                "unexpected trace header: {other:?}"
            )))
        }
    }
    lines.map(TraceRecord::from_csv_row).collect()
}
