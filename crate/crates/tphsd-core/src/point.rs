//! Joint iterates of the bilevel problem.

use crate::error::SolverError;

/// A joint iterate `(x, y)` stored as one contiguous vector of length
/// `n + p`, with `x` occupying the first `n` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    data: Vec<f64>,
    n: usize,
    p: usize,
}

impl Point {
    /// Builds a point from raw storage. Rejects empty blocks, length
    /// mismatches, and non-finite entries.
    pub fn new(data: Vec<f64>, n: usize, p: usize) -> Result<Point, SolverError> {
        if n < 1 || p < 1 {
            return Err(SolverError::dimension(format!(
                "both blocks must be nonempty, got n={n}, p={p}"
            )));
        }
        if data.len() != n + p {
            return Err(SolverError::dimension(format!(
                "expected {} entries for n={n}, p={p}, got {}",
                n + p,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(SolverError::dimension(format!(
                "non-finite entry {} at index {i}",
                data[i]
            )));
        }
        Ok(Point { data, n, p })
    }

    /// Convenience constructor for the scalar-by-scalar problems.
    pub fn from_xy(x: f64, y: f64) -> Result<Point, SolverError> {
        Point::new(vec![x, y], 1, 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.n + self.p
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// The upper-level block.
    pub fn x(&self) -> &[f64] {
        &self.data[..self.n]
    }

    /// The lower-level block.
    pub fn y(&self) -> &[f64] {
        &self.data[self.n..]
    }

    /// Replaces the storage without revalidating finiteness; callers that
    /// may produce non-finite data must check it themselves.
    pub(crate) fn with_data(&self, data: Vec<f64>) -> Point {
        debug_assert_eq!(data.len(), self.dim());
        Point {
            data,
            n: self.n,
            p: self.p,
        }
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
