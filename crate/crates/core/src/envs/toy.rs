//! Tiny analytically solvable control problem used to validate the
//! agent end to end: scalar tracking with known optimal feedback.
//!
//! Dynamics: `x' = decay*x + (a1 - target) + noise*eps`, reward
//! `-x'^2`. The optimal policy cancels the drift, `a1 = target -
//! decay*x`, leaving `x'` pure noise, so the optimal expected return
//! is exactly `-horizon * noise^2`. The second action component is
//! ignored, matching the 2-D action box of the physics environments.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::action::clip_action;
use super::env::{ControlEnv, EpisodeRecord, StepResult};
use crate::config::component_rng;

pub struct ToyEnv {
    pub decay: f64,
    /// Action value that cancels the drift at x = 0.
    pub target: f64,
    pub noise: f64,
    pub horizon: usize,
    pub x0_half_range: f64,
    x: f64,
    step_idx: usize,
    rng: ChaCha8Rng,
    record: EpisodeRecord,
    clipped: u64,
    done: bool,
}

impl Default for ToyEnv {
    fn default() -> Self {
        ToyEnv {
            decay: 0.5,
            target: 1.2,
            noise: 0.1,
            horizon: 40,
            x0_half_range: 0.5,
            x: 0.0,
            step_idx: 0,
            rng: component_rng(0, "toy"),
            record: EpisodeRecord::default(),
            clipped: 0,
            done: true,
        }
    }
}

impl ToyEnv {
    pub fn new() -> Self {
        ToyEnv::default()
    }

    /// Expected return of the optimal feedback policy.
    pub fn optimal_expected_return(&self) -> f64 {
        -(self.horizon as f64) * self.noise * self.noise
    }

    /// The optimal feedback action for state `x` (before clipping).
    pub fn optimal_action(&self, x: f64) -> [f64; 2] {
        [self.target - self.decay * x, 0.85]
    }
}

impl ControlEnv for ToyEnv {
    fn name(&self) -> &'static str {
        "toy-tracking"
    }

    fn observation_dim(&self) -> usize {
        1
    }

    fn n_control_steps(&self) -> usize {
        self.horizon
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut ic_rng = component_rng(seed, "toy-ic");
        self.x = ic_rng.gen_range(-self.x0_half_range..=self.x0_half_range);
        self.rng = component_rng(seed, "toy-noise");
        self.step_idx = 0;
        self.clipped = 0;
        self.done = false;
        self.record = EpisodeRecord {
            seed,
            columns: vec!["x".into()],
            times: vec![0.0],
            ticks: vec![vec![self.x]],
            ..Default::default()
        };
        vec![self.x]
    }

    fn step(&mut self, action: [f64; 2]) -> StepResult {
        assert!(!self.done, "step called on a finished episode; reset first");
        let (clipped_action, was_clipped) = clip_action(action);
        if was_clipped {
            self.clipped += 1;
        }
        let eps: f64 = self.rng.sample(StandardNormal);
        self.x = self.decay * self.x + (clipped_action[0] - self.target) + self.noise * eps;
        let reward = -self.x * self.x;

        self.step_idx += 1;
        self.done = self.step_idx >= self.horizon;
        self.record.times.push(self.step_idx as f64);
        self.record.ticks.push(vec![self.x]);
        self.record.actions.push(clipped_action);
        self.record.rewards.push(reward);

        let mut info = BTreeMap::new();
        info.insert("clipped_actions".into(), self.clipped as f64);
        StepResult {
            next_observation: vec![self.x],
            reward,
            done: self.done,
            diverged: false,
            info,
        }
    }

    fn record(&self) -> &EpisodeRecord {
        &self.record
    }
}
