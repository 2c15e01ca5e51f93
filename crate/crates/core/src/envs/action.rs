//! Control actions and the pulse-shaped source they parameterize.

use serde::{Deserialize, Serialize};

/// Admissible control region: `a1` in [0.5, 2], `a2` in [0.5, 1.2].
pub const ACTION_LOW: [f64; 2] = [0.5, 0.5];
pub const ACTION_HIGH: [f64; 2] = [2.0, 1.2];

/// Butterworth-style pulse: amplitude `a1`, width `a2`, centered at
/// `mu`, with filter order `n_order`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlSignal {
    pub a1: f64,
    pub a2: f64,
    pub mu: f64,
    pub n_order: u32,
}

impl ControlSignal {
    /// Standard order-4 pulse with the given amplitude/width/center.
    pub fn new(a1: f64, a2: f64, mu: f64) -> Self {
        ControlSignal {
            a1,
            a2,
            mu,
            n_order: 4,
        }
    }
}

/// Source amplitude at time `t`:
/// `a1 / (1 + ((t - mu)/a2)^(2 n))`. Maximal (= `a1`) at `t = mu`,
/// falling monotonically to zero on both sides.
pub fn butterworth_source(signal: &ControlSignal, t: f64) -> f64 {
    let z = (t - signal.mu) / signal.a2;
    signal.a1 / (1.0 + z.powi(2 * signal.n_order as i32))
}

/// Clips an action into the box; the flag reports whether anything
/// actually moved.
pub fn clip_action(action: [f64; 2]) -> ([f64; 2], bool) {
    let clipped = [
        action[0].clamp(ACTION_LOW[0], ACTION_HIGH[0]),
        action[1].clamp(ACTION_LOW[1], ACTION_HIGH[1]),
    ];
    (clipped, clipped != action)
}
