//! Reward functions for the two controlled systems. Both penalize
//! spectral energy, so rewards are nonpositive and reach zero only
//! when the penalized content vanishes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::metrics::{spectral_metrics, SpectralMetrics};
use crate::envs::SrsMeans;
use crate::numerics::{detect_peaks, spatial_psd, welch_psd, Grid1D, Spectrum};

/// Which envelope's mean-amplitude history feeds the three-wave
/// reward spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SignalSource {
    U0,
    U1,
    #[default]
    U2,
    /// Sum of all three mean amplitudes.
    Sum,
}

/// Three-wave reward configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SrsRewardCfg {
    /// Weight on the sum of squared peak energies.
    pub w1: f64,
    /// Weight on the peak frequency span.
    pub w2: f64,
    pub signal: SignalSource,
    /// Peak prominence threshold as a fraction of the largest PSD
    /// value, so peak selection is invariant to signal amplitude.
    pub peak_prominence_rel: f64,
    /// Welch segment length cap; the segment is
    /// `min(max_segment, len/4)` with a single full-window
    /// periodogram as fallback for short windows.
    pub max_segment: usize,
    pub overlap: f64,
}

impl Default for SrsRewardCfg {
    fn default() -> Self {
        SrsRewardCfg {
            w1: 1.0,
            w2: 1.0,
            signal: SignalSource::U2,
            peak_prominence_rel: 0.05,
            max_segment: 256,
            overlap: 0.5,
        }
    }
}

/// Reward plus the quantities it was computed from.
#[derive(Debug, Clone)]
pub struct SrsReward {
    pub reward: f64,
    pub metrics: SpectralMetrics,
    /// PSD of the reward signal; absent when the window was degenerate.
    pub spectrum: Option<Spectrum>,
    /// Window too short or non-finite; reward forced to 0.
    pub degenerate: bool,
}

/// Extracts the scalar reward signal from a history of spatial means.
pub fn srs_signal(means: &[SrsMeans], source: SignalSource) -> Vec<f64> {
    let pick = |m: &SrsMeans| -> f64 {
        match source {
            SignalSource::U0 => m[0].norm(),
            SignalSource::U1 => m[1].norm(),
            SignalSource::U2 => m[2].norm(),
            SignalSource::Sum => m[0].norm() + m[1].norm() + m[2].norm(),
        }
    };
    means.iter().map(pick).collect()
}

/// Welch PSD of the signal over the control window, then
/// `-(l1 + w1*l2 + w2*delta_omega)` of its peaks. Windows shorter than
/// one Welch segment fall back to a single periodogram; windows too
/// short for that (or containing non-finite samples) are degenerate
/// and score 0.
pub fn srs_reward(signal: &[f64], sample_spacing: f64, cfg: &SrsRewardCfg) -> SrsReward {
    let degenerate = SrsReward {
        reward: 0.0,
        metrics: SpectralMetrics::default(),
        spectrum: None,
        degenerate: true,
    };
    if signal.len() < 4 || signal.iter().any(|v| !v.is_finite()) {
        return degenerate;
    }
    let segment = cfg.max_segment.min(signal.len() / 4).max(4);
    let spectrum = match welch_psd(signal, segment, cfg.overlap, sample_spacing) {
        Ok(s) => s,
        Err(_) => match welch_psd(signal, signal.len(), 0.0, sample_spacing) {
            Ok(s) => s,
            Err(_) => return degenerate,
        },
    };
    let max_energy = spectrum.energy.iter().fold(0.0f64, |m, &e| m.max(e));
    let peaks = detect_peaks(&spectrum, cfg.peak_prominence_rel * max_energy);
    let metrics = spectral_metrics(&spectrum, &peaks);
    SrsReward {
        reward: -(metrics.l1 + cfg.w1 * metrics.l2 + cfg.w2 * metrics.delta_omega),
        metrics,
        spectrum: Some(spectrum),
        degenerate: false,
    }
}

/// Burgers reward configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct SbeRewardCfg {
    /// Wavenumber cutoff; energy in modes strictly above it is
    /// penalized. `None` selects `n_points / 8`.
    pub k_threshold: Option<usize>,
}

impl SbeRewardCfg {
    pub fn threshold_for(&self, grid: &Grid1D) -> usize {
        self.k_threshold.unwrap_or(grid.n_points / 8)
    }
}

#[derive(Debug, Clone)]
pub struct SbeReward {
    pub reward: f64,
    /// Mean spatial spectrum over the window's snapshots.
    pub spectrum: Option<Spectrum>,
    pub degenerate: bool,
}

/// Averages the spatial energy spectrum over the window's snapshots
/// and penalizes everything above the wavenumber threshold:
/// `reward = -sum_{k > k_thr} E(k)`.
pub fn sbe_reward(snapshots: &[Vec<f64>], grid: &Grid1D, cfg: &SbeRewardCfg) -> SbeReward {
    if snapshots.is_empty()
        || snapshots
            .iter()
            .any(|s| s.len() != grid.n_points || s.iter().any(|v| !v.is_finite()))
    {
        return SbeReward {
            reward: 0.0,
            spectrum: None,
            degenerate: true,
        };
    }
    let mut mean = spatial_psd(&snapshots[0], grid);
    for snap in &snapshots[1..] {
        let s = spatial_psd(snap, grid);
        for (acc, e) in mean.energy.iter_mut().zip(&s.energy) {
            *acc += e;
        }
    }
    let scale = 1.0 / snapshots.len() as f64;
    for e in mean.energy.iter_mut() {
        *e *= scale;
    }
    let k_thr = cfg.threshold_for(grid);
    // Bin i of the spatial PSD holds mode k = i + 1.
    let high: f64 = mean
        .energy
        .iter()
        .enumerate()
        .filter(|(i, _)| i + 1 > k_thr)
        .map(|(_, &e)| e)
        .sum();
    SbeReward {
        reward: -high,
        spectrum: Some(mean),
        degenerate: false,
    }
}

/// Ignores `t`; present so signal extraction can also be used on raw
/// complex tick data.
pub fn complex_magnitude_series(series: &[Complex64]) -> Vec<f64> {
    series.iter().map(|c| c.norm()).collect()
}
