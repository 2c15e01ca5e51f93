//! Uniform periodic 1-D grids.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform periodic grid over `[0, length)`.
///
/// Node `j` sits at `j * spacing` with `spacing = length / n_points`;
/// the right endpoint is identified with the left one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub n_points: usize,
    pub length: f64,
    pub periodic: bool,
}

impl Grid1D {
    /// Builds a periodic grid, rejecting degenerate sizes.
    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        if n_points < 4 {
            return Err(Error::invalid(format!(
                "grid needs at least 4 points, got {n_points}"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid(format!(
                "grid length must be positive and finite, got {length}"
            )));
        }
        Ok(Grid1D {
            n_points,
            length,
            periodic: true,
        })
    }

    /// Node spacing `length / n_points`.
    pub fn spacing(&self) -> f64 {
        self.length / self.n_points as f64
    }

    /// Node coordinates `0, h, 2h, ...` (the periodic image at `length`
    /// is not included).
    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n_points).map(|j| j as f64 * h).collect()
    }

    /// True when the point count supports the Fourier collocation ops.
    pub fn is_spectral(&self) -> bool {
        self.n_points.is_power_of_two()
    }
}
