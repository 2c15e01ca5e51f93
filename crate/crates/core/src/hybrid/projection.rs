//! Projection operators mapping reference-fidelity states onto the
//! reduced representation the surrogate evolves.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::envs::SrsState;
use crate::numerics::{lowpass_filter, restrict_to_grid, Grid1D};
use crate::Result;

/// How a reference state is reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionKind {
    /// Complex spatial average per wave component (three-wave system).
    SpatialMean,
    /// Low-pass at half the target resolution, then restriction to the
    /// coarse grid (Burgers system).
    LowPass,
}

/// Reduces a three-wave field state to its six real mean components
/// (re/im interleaved).
pub fn project_srs(state: &SrsState) -> Vec<f64> {
    let m = state.means();
    vec![m[0].re, m[0].im, m[1].re, m[1].im, m[2].re, m[2].im]
}

/// Packs reduced mean components back into complex form.
pub fn srs_vec_to_means(v: &[f64]) -> [Complex64; 3] {
    assert_eq!(v.len(), 6, "reduced three-wave state has 6 components");
    [
        Complex64::new(v[0], v[1]),
        Complex64::new(v[2], v[3]),
        Complex64::new(v[4], v[5]),
    ]
}

pub fn srs_means_to_vec(m: &[Complex64; 3]) -> Vec<f64> {
    vec![m[0].re, m[0].im, m[1].re, m[1].im, m[2].re, m[2].im]
}

/// Reduces a fine-grid Burgers field: zero modes at or above half the
/// coarse resolution, then sample onto the coarse grid.
pub fn project_sbe(fine_field: &[f64], coarse: &Grid1D) -> Result<Vec<f64>> {
    if fine_field.len() == coarse.n_points {
        return Ok(fine_field.to_vec());
    }
    // Same cutoff the restriction applies, so projecting a reference
    // field and sampling a coarse run stay mode-for-mode comparable.
    let filtered = lowpass_filter(fine_field, coarse.n_points / 2);
    restrict_to_grid(&filtered, coarse)
}
