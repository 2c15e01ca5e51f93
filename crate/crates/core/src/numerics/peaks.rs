//! Peak detection on one-sided spectra.

use serde::{Deserialize, Serialize};

use super::spectrum::Spectrum;

/// Peaks of a spectrum: strict local maxima whose topographic
/// prominence reaches the recorded threshold. Indices refer to the
/// spectrum the set was computed from and are sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakSet {
    pub indices: Vec<usize>,
    pub prominence_threshold: f64,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Finds strict interior local maxima with topographic prominence at or
/// above `prominence_threshold`.
///
/// Prominence of a peak: walk outward on each side until a strictly
/// higher sample (or the boundary) is reached, take the minimum energy
/// seen on each walk, and subtract the larger of the two minima from
/// the peak height. Endpoints are never peaks.
pub fn detect_peaks(spectrum: &Spectrum, prominence_threshold: f64) -> PeakSet {
    assert!(
        prominence_threshold >= 0.0,
        "prominence threshold must be nonnegative"
    );
    let e = &spectrum.energy;
    let n = e.len();
    let mut indices = Vec::new();
    for i in 1..n.saturating_sub(1) {
        if !(e[i] > e[i - 1] && e[i] > e[i + 1]) {
            continue;
        }
        if prominence(e, i) >= prominence_threshold {
            indices.push(i);
        }
    }
    PeakSet {
        indices,
        prominence_threshold,
    }
}

fn prominence(e: &[f64], i: usize) -> f64 {
    let mut left_min = e[i];
    let mut j = i;
    while j > 0 {
        j -= 1;
        if e[j] > e[i] {
            break;
        }
        left_min = left_min.min(e[j]);
    }
    let mut right_min = e[i];
    let mut j = i;
    while j + 1 < e.len() {
        j += 1;
        if e[j] > e[i] {
            break;
        }
        right_min = right_min.min(e[j]);
    }
    e[i] - left_min.max(right_min)
}
