//! Observation assembly shared by all environments.

use serde::{Deserialize, Serialize};

/// What the policy sees at each control step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ObsMode {
    /// Only the most recent state sample.
    OneStep,
    /// Every state sample recorded since the previous control step,
    /// flattened oldest-first. Default: the controlled systems are
    /// non-Markovian from a single snapshot.
    #[default]
    TimeHistory,
}

/// Flattens a window of per-tick state samples into an observation
/// vector. Every tick must have the same width; the window must be
/// non-empty (environments guarantee both).
pub fn build_observation(window: &[Vec<f64>], mode: ObsMode) -> Vec<f64> {
    assert!(!window.is_empty(), "observation window is empty");
    let width = window[0].len();
    debug_assert!(window.iter().all(|t| t.len() == width));
    match mode {
        ObsMode::OneStep => window[window.len() - 1].clone(),
        ObsMode::TimeHistory => window.iter().flatten().copied().collect(),
    }
}

/// Observation width for a given mode, window length and tick width.
pub fn observation_dim(mode: ObsMode, window_len: usize, tick_width: usize) -> usize {
    match mode {
        ObsMode::OneStep => tick_width,
        ObsMode::TimeHistory => window_len * tick_width,
    }
}
