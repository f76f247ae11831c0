//! Uniform symmetric grids.

use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform grid on `[-half_width, half_width]` with an odd number of nodes, so
/// that `x = 0` is always a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    half_width: f64,
    n_points: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half_width must be positive and finite, got {half_width}"
            )));
        }
        if n_points < 3 || n_points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n_points must be odd and at least 3, got {n_points}"
            )));
        }
        Ok(Self {
            half_width,
            n_points,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n_points - 1) as f64
    }

    /// Node `k`, computed symmetrically so that node `(n-1)/2` is exactly 0.
    pub fn node(&self, k: usize) -> f64 {
        let mid = (self.n_points - 1) / 2;
        let h = self.spacing();
        if k >= mid {
            (k - mid) as f64 * h
        } else {
            -((mid - k) as f64 * h)
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.node(k)).collect()
    }

    /// Grid with `2(n-1)+1` nodes on the same interval.
    pub fn refined(&self) -> Self {
        Self {
            half_width: self.half_width,
            n_points: 2 * (self.n_points - 1) + 1,
        }
    }
}
