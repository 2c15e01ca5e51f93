//! MDP-style wrappers around the solvers: reset/step lifecycle,
//! per-window rewards, divergence detection and episode recording.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::action::{clip_action, ControlSignal};
use super::forcing::sample_forcing_profile;
use super::obs::{build_observation, observation_dim, ObsMode};
use super::sbe::{sample_sbe_ic, sbe_dles_step, sbe_dns_step, SbeParams, SbeState};
use super::srs::{sample_srs_ic, srs_hf_step, srs_lf_step, SrsMeans, SrsParams, SrsState};
use crate::config::component_rng;
use crate::numerics::restrict_to_grid;
use crate::rewards_eval::{sbe_reward, srs_reward, srs_signal, SbeRewardCfg, SrsRewardCfg};
use crate::{Error, Result};

/// Reward assigned to the control step on which an episode diverges.
pub const DIVERGENCE_PENALTY: f64 = -1e3;
/// A state with any |value| above this is declared diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 1e3;

/// Outcome of one control step.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub next_observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub diverged: bool,
    pub info: BTreeMap<String, f64>,
}

/// Common interface every environment (and the learned surrogates)
/// exposes to the agent and the data-generation pipeline.
pub trait ControlEnv {
    fn name(&self) -> &'static str;
    fn observation_dim(&self) -> usize;
    fn n_control_steps(&self) -> usize;
    /// Re-seeds all per-episode randomness and returns the initial
    /// observation. Identical seeds reproduce episodes bitwise.
    fn reset(&mut self, seed: u64) -> Vec<f64>;
    /// Advances one control window. Panics if called before `reset`
    /// or after `done`.
    fn step(&mut self, action: [f64; 2]) -> StepResult;
    /// Full history of the episode in progress (or just finished).
    fn record(&self) -> &EpisodeRecord;
}

/// Everything observed during one episode, at tick resolution.
#[derive(Debug, Clone, Default)]
pub struct EpisodeRecord {
    pub seed: u64,
    /// Column labels for `ticks` entries.
    pub columns: Vec<String>,
    /// Tick timestamps, starting with the initial state at index 0.
    pub times: Vec<f64>,
    /// Compact per-tick state samples (means or probe values).
    pub ticks: Vec<Vec<f64>>,
    /// Full coarse-grid fields at tick cadence (Burgers only).
    pub snapshots: Vec<Vec<f64>>,
    /// Actions actually applied (after clipping), one per control step.
    pub actions: Vec<[f64; 2]>,
    /// Reward per control step.
    pub rewards: Vec<f64>,
    pub diverged: bool,
}

impl EpisodeRecord {
    fn start(seed: u64, columns: Vec<String>, t0: f64, tick0: Vec<f64>, snap0: Option<Vec<f64>>) -> Self {
        EpisodeRecord {
            seed,
            columns,
            times: vec![t0],
            ticks: vec![tick0],
            snapshots: snap0.into_iter().collect(),
            actions: Vec::new(),
            rewards: Vec::new(),
            diverged: false,
        }
    }

    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum()
    }

    /// Tick table as CSV: `t` column followed by the labelled state
    /// columns.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "t,{}", self.columns.join(","))?;
        for (t, tick) in self.times.iter().zip(&self.ticks) {
            write!(out, "{t:e}")?;
            for v in tick {
                write!(out, ",{v:e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Per-episode metadata written next to trajectory files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeMeta {
    pub seed: u64,
    pub environment: String,
    pub actions: Vec<[f64; 2]>,
    pub rewards: Vec<f64>,
    pub diverged: bool,
}

impl EpisodeMeta {
    pub fn from_record(record: &EpisodeRecord, environment: &str) -> Self {
        EpisodeMeta {
            seed: record.seed,
            environment: environment.to_string(),
            actions: record.actions.clone(),
            rewards: record.rewards.clone(),
            diverged: record.diverged,
        }
    }
}

fn window_means_to_ticks(m: &SrsMeans) -> Vec<f64> {
    vec![m[0].re, m[0].im, m[1].re, m[1].im, m[2].re, m[2].im]
}

/// Inverse of the tick layout used by both three-wave environments.
pub fn srs_means_from_tick(tick: &[f64]) -> SrsMeans {
    assert_eq!(tick.len(), 6, "three-wave ticks carry 6 values");
    [
        num_complex::Complex64::new(tick[0], tick[1]),
        num_complex::Complex64::new(tick[2], tick[3]),
        num_complex::Complex64::new(tick[4], tick[5]),
    ]
}

fn srs_columns() -> Vec<String> {
    ["re_u0", "im_u0", "re_u1", "im_u1", "re_u2", "im_u2"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

/// Shared window bookkeeping: a ring of the last `capacity` ticks,
/// pre-filled at reset so observations have a fixed width.
#[derive(Debug, Clone)]
struct TickWindow {
    ticks: Vec<Vec<f64>>,
    capacity: usize,
}

impl TickWindow {
    fn filled(initial: Vec<f64>, capacity: usize) -> Self {
        TickWindow {
            ticks: vec![initial; capacity],
            capacity,
        }
    }

    fn push(&mut self, tick: Vec<f64>) {
        if self.ticks.len() == self.capacity {
            self.ticks.remove(0);
        }
        self.ticks.push(tick);
    }

    fn observation(&self, mode: ObsMode) -> Vec<f64> {
        build_observation(&self.ticks, mode)
    }
}

// ---------------------------------------------------------------------------
// Three-wave environments
// ---------------------------------------------------------------------------

/// Configuration shared by the reference PDE and reduced ODE
/// three-wave environments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SrsEnvConfig {
    pub params: SrsParams,
    pub n_control_steps: usize,
    /// Solver steps per control step; ticks are recorded every step.
    pub substeps: usize,
    pub obs_mode: ObsMode,
    pub reward: SrsRewardCfg,
    /// Pump amplitude range sampled at reset.
    pub pump_range: (f64, f64),
    /// Daughter/scattered noise level relative to the pump.
    pub seed_level: f64,
}

impl Default for SrsEnvConfig {
    fn default() -> Self {
        SrsEnvConfig {
            params: SrsParams::default(),
            n_control_steps: 12,
            substeps: 100,
            obs_mode: ObsMode::default(),
            reward: SrsRewardCfg::default(),
            pump_range: (0.8, 1.2),
            seed_level: 1e-3,
        }
    }
}

impl SrsEnvConfig {
    /// Reduced-fidelity cadence: half the solver steps at twice the
    /// step size, covering the same horizon per control step.
    pub fn low_fidelity() -> Self {
        let mut cfg = SrsEnvConfig::default();
        cfg.params.dt *= 2.0;
        cfg.substeps /= 2;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_control_steps == 0 || self.substeps == 0 {
            return Err(Error::config("control cadence must be nonzero"));
        }
        if !(self.pump_range.0 < self.pump_range.1 && self.pump_range.0 > 0.0) {
            return Err(Error::config(format!(
                "pump_range must be an increasing positive interval, got {:?}",
                self.pump_range
            )));
        }
        if !(self.seed_level > 0.0) {
            return Err(Error::config("seed_level must be positive"));
        }
        Ok(())
    }

    fn window_duration(&self) -> f64 {
        self.substeps as f64 * self.params.dt
    }
}

/// Reference three-wave environment: full PDE fields, means exposed as
/// observations.
pub struct SrsHfEnv {
    cfg: SrsEnvConfig,
    state: SrsState,
    control_idx: usize,
    window: TickWindow,
    window_means: Vec<SrsMeans>,
    record: EpisodeRecord,
    clipped: u64,
    done: bool,
}

impl SrsHfEnv {
    pub fn new(cfg: SrsEnvConfig) -> Result<Self> {
        cfg.validate()?;
        let state = SrsState::zeros(&cfg.params.grid);
        Ok(SrsHfEnv {
            window: TickWindow::filled(vec![0.0; 6], cfg.substeps),
            record: EpisodeRecord::default(),
            state,
            control_idx: 0,
            window_means: Vec::new(),
            clipped: 0,
            done: true,
            cfg,
        })
    }

    pub fn config(&self) -> &SrsEnvConfig {
        &self.cfg
    }

    pub fn state(&self) -> &SrsState {
        &self.state
    }

    fn diverged(state: &SrsState) -> bool {
        !state.is_finite() || state.max_abs() > DIVERGENCE_THRESHOLD
    }
}

impl ControlEnv for SrsHfEnv {
    fn name(&self) -> &'static str {
        "srs-hf"
    }

    fn observation_dim(&self) -> usize {
        observation_dim(self.cfg.obs_mode, self.cfg.substeps, 6)
    }

    fn n_control_steps(&self) -> usize {
        self.cfg.n_control_steps
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut ic_rng = component_rng(seed, "srs-ic");
        self.state = sample_srs_ic(
            &self.cfg.params,
            self.cfg.pump_range,
            self.cfg.seed_level,
            &mut ic_rng,
        );
        self.control_idx = 0;
        self.clipped = 0;
        self.done = false;
        let tick0 = window_means_to_ticks(&self.state.means());
        self.window = TickWindow::filled(tick0.clone(), self.cfg.substeps);
        self.window_means = Vec::new();
        self.record = EpisodeRecord::start(seed, srs_columns(), self.state.t, tick0, None);
        self.window.observation(self.cfg.obs_mode)
    }

    fn step(&mut self, action: [f64; 2]) -> StepResult {
        assert!(!self.done, "step called on a finished episode; reset first");
        let (clipped_action, was_clipped) = clip_action(action);
        if was_clipped {
            self.clipped += 1;
        }
        let mu = self.state.t + 0.5 * self.cfg.window_duration();
        let signal = ControlSignal::new(clipped_action[0], clipped_action[1], mu);

        self.window_means.clear();
        let mut diverged = false;
        for _ in 0..self.cfg.substeps {
            self.state = srs_hf_step(&self.state, &signal, &self.cfg.params);
            if Self::diverged(&self.state) {
                diverged = true;
                break;
            }
            let means = self.state.means();
            self.window_means.push(means);
            let tick = window_means_to_ticks(&means);
            self.window.push(tick.clone());
            self.record.times.push(self.state.t);
            self.record.ticks.push(tick);
        }

        let reward = if diverged {
            DIVERGENCE_PENALTY
        } else {
            srs_reward(
                &srs_signal(&self.window_means, self.cfg.reward.signal),
                self.cfg.params.dt,
                &self.cfg.reward,
            )
            .reward
        };

        self.control_idx += 1;
        self.done = diverged || self.control_idx >= self.cfg.n_control_steps;
        self.record.actions.push(clipped_action);
        self.record.rewards.push(reward);
        self.record.diverged |= diverged;

        let mut info = BTreeMap::new();
        info.insert("clipped_actions".into(), self.clipped as f64);
        info.insert("max_abs".into(), self.state.max_abs());
        StepResult {
            next_observation: self.window.observation(self.cfg.obs_mode),
            reward,
            done: self.done,
            diverged,
            info,
        }
    }

    fn record(&self) -> &EpisodeRecord {
        &self.record
    }
}

/// Reduced three-wave environment: spatial-mean ODE without learned
/// corrections. Shares the reference IC family (means of the same
/// draw) so fidelities pair up under a common seed.
pub struct SrsLfEnv {
    cfg: SrsEnvConfig,
    means: SrsMeans,
    t: f64,
    control_idx: usize,
    window: TickWindow,
    window_means: Vec<SrsMeans>,
    record: EpisodeRecord,
    clipped: u64,
    done: bool,
}

impl SrsLfEnv {
    pub fn new(cfg: SrsEnvConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(SrsLfEnv {
            means: [num_complex::Complex64::new(0.0, 0.0); 3],
            t: 0.0,
            control_idx: 0,
            window: TickWindow::filled(vec![0.0; 6], cfg.substeps),
            window_means: Vec::new(),
            record: EpisodeRecord::default(),
            clipped: 0,
            done: true,
            cfg,
        })
    }

    pub fn config(&self) -> &SrsEnvConfig {
        &self.cfg
    }

    fn diverged(means: &SrsMeans) -> bool {
        means
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite() || c.norm() > DIVERGENCE_THRESHOLD)
    }
}

impl ControlEnv for SrsLfEnv {
    fn name(&self) -> &'static str {
        "srs-lf"
    }

    fn observation_dim(&self) -> usize {
        observation_dim(self.cfg.obs_mode, self.cfg.substeps, 6)
    }

    fn n_control_steps(&self) -> usize {
        self.cfg.n_control_steps
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut ic_rng = component_rng(seed, "srs-ic");
        let full = sample_srs_ic(
            &self.cfg.params,
            self.cfg.pump_range,
            self.cfg.seed_level,
            &mut ic_rng,
        );
        self.means = full.means();
        self.t = 0.0;
        self.control_idx = 0;
        self.clipped = 0;
        self.done = false;
        let tick0 = window_means_to_ticks(&self.means);
        self.window = TickWindow::filled(tick0.clone(), self.cfg.substeps);
        self.window_means = Vec::new();
        self.record = EpisodeRecord::start(seed, srs_columns(), 0.0, tick0, None);
        self.window.observation(self.cfg.obs_mode)
    }

    fn step(&mut self, action: [f64; 2]) -> StepResult {
        assert!(!self.done, "step called on a finished episode; reset first");
        let (clipped_action, was_clipped) = clip_action(action);
        if was_clipped {
            self.clipped += 1;
        }
        let mu = self.t + 0.5 * self.cfg.window_duration();
        let signal = ControlSignal::new(clipped_action[0], clipped_action[1], mu);

        self.window_means.clear();
        let mut diverged = false;
        for _ in 0..self.cfg.substeps {
            self.means = srs_lf_step(
                &self.means,
                self.t,
                self.cfg.params.dt,
                &signal,
                &self.cfg.params,
            );
            self.t += self.cfg.params.dt;
            if Self::diverged(&self.means) {
                diverged = true;
                break;
            }
            self.window_means.push(self.means);
            let tick = window_means_to_ticks(&self.means);
            self.window.push(tick.clone());
            self.record.times.push(self.t);
            self.record.ticks.push(tick);
        }

        let reward = if diverged {
            DIVERGENCE_PENALTY
        } else {
            srs_reward(
                &srs_signal(&self.window_means, self.cfg.reward.signal),
                self.cfg.params.dt,
                &self.cfg.reward,
            )
            .reward
        };

        self.control_idx += 1;
        self.done = diverged || self.control_idx >= self.cfg.n_control_steps;
        self.record.actions.push(clipped_action);
        self.record.rewards.push(reward);
        self.record.diverged |= diverged;

        let mut info = BTreeMap::new();
        info.insert("clipped_actions".into(), self.clipped as f64);
        let max_abs = self.means.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        info.insert("max_abs".into(), max_abs);
        StepResult {
            next_observation: self.window.observation(self.cfg.obs_mode),
            reward,
            done: self.done,
            diverged,
            info,
        }
    }

    fn record(&self) -> &EpisodeRecord {
        &self.record
    }
}

// ---------------------------------------------------------------------------
// Burgers environments
// ---------------------------------------------------------------------------

/// Configuration shared by the fine-grid reference solver and the bare
/// coarse-grid solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbeEnvConfig {
    pub params: SbeParams,
    pub n_control_steps: usize,
    /// Fine-grid solver steps per control step; the coarse solver
    /// takes half as many steps of twice the size.
    pub substeps_fine: usize,
    pub obs_mode: ObsMode,
    pub reward: SbeRewardCfg,
    /// Evenly spaced coarse-grid sample points exposed per tick.
    pub n_probes: usize,
    /// Ticks (and field snapshots) recorded per control window.
    pub ticks_per_window: usize,
    /// Initial-condition band `k_lo..=k_hi` with spectrum `k^-2`.
    pub ic_band: (usize, usize),
    /// Initial fluctuation kinetic energy `mean(u^2/2)`.
    pub ic_energy: f64,
}

impl Default for SbeEnvConfig {
    fn default() -> Self {
        SbeEnvConfig {
            params: SbeParams::default(),
            n_control_steps: 20,
            substeps_fine: 400,
            obs_mode: ObsMode::default(),
            reward: SbeRewardCfg::default(),
            n_probes: 16,
            ticks_per_window: 20,
            ic_band: (1, 8),
            // High enough that the coarse grid cannot hold the shock
            // cascade (bare coarse runs blow up mid-episode) while the
            // fine grid stays comfortably resolved.
            ic_energy: 2.0,
        }
    }
}

impl SbeEnvConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_control_steps == 0 || self.substeps_fine == 0 {
            return Err(Error::config("control cadence must be nonzero"));
        }
        if self.substeps_fine % 2 != 0 {
            return Err(Error::config(
                "substeps_fine must be even so the coarse solver covers the same horizon",
            ));
        }
        let coarse_steps = self.substeps_fine / 2;
        if self.ticks_per_window == 0
            || self.substeps_fine % self.ticks_per_window != 0
            || coarse_steps % self.ticks_per_window != 0
        {
            return Err(Error::config(format!(
                "ticks_per_window ({}) must divide both fine ({}) and coarse ({}) substeps",
                self.ticks_per_window, self.substeps_fine, coarse_steps
            )));
        }
        let coarse_n = self.params.coarse_grid.n_points;
        if self.n_probes == 0 || self.n_probes > coarse_n || coarse_n % self.n_probes != 0 {
            return Err(Error::config(format!(
                "n_probes ({}) must evenly divide the coarse grid ({coarse_n})",
                self.n_probes
            )));
        }
        if self.ic_band.0 < 1
            || self.ic_band.1 < self.ic_band.0
            || self.ic_band.1 >= coarse_n / 2
        {
            return Err(Error::config(format!(
                "ic_band {:?} must sit inside the coarse spectrum",
                self.ic_band
            )));
        }
        if !(self.ic_energy >= 0.0) {
            return Err(Error::config("ic_energy must be nonnegative"));
        }
        Ok(())
    }

    fn probe_columns(&self) -> Vec<String> {
        (0..self.n_probes).map(|i| format!("probe_{i}")).collect()
    }

    fn probes_of(&self, coarse_field: &[f64]) -> Vec<f64> {
        let stride = coarse_field.len() / self.n_probes;
        (0..self.n_probes).map(|i| coarse_field[i * stride]).collect()
    }
}

fn sbe_diverged(state: &SbeState) -> bool {
    !state.is_finite() || state.max_abs() > DIVERGENCE_THRESHOLD
}

/// Fine-grid reference environment. Observations and snapshots are
/// restricted to the coarse grid so both fidelities expose the same
/// interface to the agent.
pub struct SbeDnsEnv {
    cfg: SbeEnvConfig,
    state: SbeState,
    control_idx: usize,
    window: TickWindow,
    window_snapshots: Vec<Vec<f64>>,
    record: EpisodeRecord,
    clipped: u64,
    done: bool,
}

impl SbeDnsEnv {
    pub fn new(cfg: SbeEnvConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.params.fine_grid.n_points;
        Ok(SbeDnsEnv {
            state: SbeState {
                u: vec![0.0; n],
                t: 0.0,
                rhs_prev: None,
                forcing_profile: vec![0.0; n],
            },
            control_idx: 0,
            window: TickWindow::filled(vec![0.0; cfg.n_probes], cfg.ticks_per_window),
            window_snapshots: Vec::new(),
            record: EpisodeRecord::default(),
            clipped: 0,
            done: true,
            cfg,
        })
    }

    pub fn config(&self) -> &SbeEnvConfig {
        &self.cfg
    }

    pub fn state(&self) -> &SbeState {
        &self.state
    }

    fn coarse_view(&self) -> Vec<f64> {
        restrict_to_grid(&self.state.u, &self.cfg.params.coarse_grid)
            .expect("fine grid is an exact multiple of the coarse grid")
    }
}

impl ControlEnv for SbeDnsEnv {
    fn name(&self) -> &'static str {
        "sbe-dns"
    }

    fn observation_dim(&self) -> usize {
        observation_dim(self.cfg.obs_mode, self.cfg.ticks_per_window, self.cfg.n_probes)
    }

    fn n_control_steps(&self) -> usize {
        self.cfg.n_control_steps
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let grid = self.cfg.params.fine_grid;
        let mut ic_rng = component_rng(seed, "sbe-ic");
        let u = if self.cfg.ic_energy > 0.0 {
            sample_sbe_ic(
                &grid,
                self.cfg.ic_band.0,
                self.cfg.ic_band.1,
                self.cfg.ic_energy,
                &mut ic_rng,
            )
        } else {
            vec![0.0; grid.n_points]
        };
        let mut forcing_rng = component_rng(seed, "sbe-forcing");
        let eta = sample_forcing_profile(
            &grid,
            self.cfg.params.d0,
            self.cfg.params.beta,
            &mut forcing_rng,
        );
        self.state = SbeState {
            u,
            t: 0.0,
            rhs_prev: None,
            forcing_profile: eta,
        };
        self.control_idx = 0;
        self.clipped = 0;
        self.done = false;
        let coarse = self.coarse_view();
        let tick0 = self.cfg.probes_of(&coarse);
        self.window = TickWindow::filled(tick0.clone(), self.cfg.ticks_per_window);
        self.window_snapshots = Vec::new();
        self.record = EpisodeRecord::start(
            seed,
            self.cfg.probe_columns(),
            0.0,
            tick0,
            Some(coarse),
        );
        self.window.observation(self.cfg.obs_mode)
    }

    fn step(&mut self, action: [f64; 2]) -> StepResult {
        assert!(!self.done, "step called on a finished episode; reset first");
        let (clipped_action, was_clipped) = clip_action(action);
        if was_clipped {
            self.clipped += 1;
        }
        let window_duration = self.cfg.substeps_fine as f64 * self.cfg.params.dt;
        let mu = self.state.t + 0.5 * window_duration;
        let signal = ControlSignal::new(clipped_action[0], clipped_action[1], mu);

        let tick_every = self.cfg.substeps_fine / self.cfg.ticks_per_window;
        self.window_snapshots.clear();
        let mut diverged = false;
        for sub in 1..=self.cfg.substeps_fine {
            self.state = sbe_dns_step(&self.state, &signal, &self.cfg.params);
            if sbe_diverged(&self.state) {
                diverged = true;
                break;
            }
            if sub % tick_every == 0 {
                let coarse = self.coarse_view();
                let tick = self.cfg.probes_of(&coarse);
                self.window.push(tick.clone());
                self.record.times.push(self.state.t);
                self.record.ticks.push(tick);
                self.record.snapshots.push(coarse.clone());
                self.window_snapshots.push(coarse);
            }
        }

        let reward = if diverged {
            DIVERGENCE_PENALTY
        } else {
            sbe_reward(
                &self.window_snapshots,
                &self.cfg.params.coarse_grid,
                &self.cfg.reward,
            )
            .reward
        };

        self.control_idx += 1;
        self.done = diverged || self.control_idx >= self.cfg.n_control_steps;
        self.record.actions.push(clipped_action);
        self.record.rewards.push(reward);
        self.record.diverged |= diverged;

        let mut info = BTreeMap::new();
        info.insert("clipped_actions".into(), self.clipped as f64);
        info.insert("max_abs".into(), self.state.max_abs());
        StepResult {
            next_observation: self.window.observation(self.cfg.obs_mode),
            reward,
            done: self.done,
            diverged,
            info,
        }
    }

    fn record(&self) -> &EpisodeRecord {
        &self.record
    }
}

/// Bare coarse-grid environment: same forcing law and cadence as the
/// reference solver, no subgrid closure. Expected to blow up in long
/// forced runs, which the wrapper reports as a terminal transition.
pub struct SbeDlesEnv {
    cfg: SbeEnvConfig,
    state: SbeState,
    control_idx: usize,
    window: TickWindow,
    window_snapshots: Vec<Vec<f64>>,
    record: EpisodeRecord,
    clipped: u64,
    done: bool,
}

impl SbeDlesEnv {
    pub fn new(cfg: SbeEnvConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.params.coarse_grid.n_points;
        Ok(SbeDlesEnv {
            state: SbeState {
                u: vec![0.0; n],
                t: 0.0,
                rhs_prev: None,
                forcing_profile: vec![0.0; n],
            },
            control_idx: 0,
            window: TickWindow::filled(vec![0.0; cfg.n_probes], cfg.ticks_per_window),
            window_snapshots: Vec::new(),
            record: EpisodeRecord::default(),
            clipped: 0,
            done: true,
            cfg,
        })
    }

    pub fn config(&self) -> &SbeEnvConfig {
        &self.cfg
    }

    pub fn state(&self) -> &SbeState {
        &self.state
    }

    fn substeps_coarse(&self) -> usize {
        self.cfg.substeps_fine / 2
    }
}

impl ControlEnv for SbeDlesEnv {
    fn name(&self) -> &'static str {
        "sbe-dles"
    }

    fn observation_dim(&self) -> usize {
        observation_dim(self.cfg.obs_mode, self.cfg.ticks_per_window, self.cfg.n_probes)
    }

    fn n_control_steps(&self) -> usize {
        self.cfg.n_control_steps
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        // Same seed streams as the fine solver: the coarse initial
        // condition is the restriction of the fine one, and the
        // forcing profile shares every resolvable mode.
        let fine = self.cfg.params.fine_grid;
        let coarse = self.cfg.params.coarse_grid;
        let mut ic_rng = component_rng(seed, "sbe-ic");
        let u = if self.cfg.ic_energy > 0.0 {
            let fine_u = sample_sbe_ic(
                &fine,
                self.cfg.ic_band.0,
                self.cfg.ic_band.1,
                self.cfg.ic_energy,
                &mut ic_rng,
            );
            restrict_to_grid(&fine_u, &coarse).expect("grids validated")
        } else {
            vec![0.0; coarse.n_points]
        };
        let mut forcing_rng = component_rng(seed, "sbe-forcing");
        let eta = sample_forcing_profile(
            &coarse,
            self.cfg.params.d0,
            self.cfg.params.beta,
            &mut forcing_rng,
        );
        self.state = SbeState {
            u,
            t: 0.0,
            rhs_prev: None,
            forcing_profile: eta,
        };
        self.control_idx = 0;
        self.clipped = 0;
        self.done = false;
        let tick0 = self.cfg.probes_of(&self.state.u);
        self.window = TickWindow::filled(tick0.clone(), self.cfg.ticks_per_window);
        self.window_snapshots = Vec::new();
        self.record = EpisodeRecord::start(
            seed,
            self.cfg.probe_columns(),
            0.0,
            tick0,
            Some(self.state.u.clone()),
        );
        self.window.observation(self.cfg.obs_mode)
    }

    fn step(&mut self, action: [f64; 2]) -> StepResult {
        assert!(!self.done, "step called on a finished episode; reset first");
        let (clipped_action, was_clipped) = clip_action(action);
        if was_clipped {
            self.clipped += 1;
        }
        let substeps = self.substeps_coarse();
        let window_duration = substeps as f64 * self.cfg.params.coarse_dt();
        let mu = self.state.t + 0.5 * window_duration;
        let signal = ControlSignal::new(clipped_action[0], clipped_action[1], mu);

        let tick_every = substeps / self.cfg.ticks_per_window;
        self.window_snapshots.clear();
        let mut diverged = false;
        for sub in 1..=substeps {
            self.state = sbe_dles_step(&self.state, &signal, &self.cfg.params);
            if sbe_diverged(&self.state) {
                diverged = true;
                break;
            }
            if sub % tick_every == 0 {
                let tick = self.cfg.probes_of(&self.state.u);
                self.window.push(tick.clone());
                self.record.times.push(self.state.t);
                self.record.ticks.push(tick);
                self.record.snapshots.push(self.state.u.clone());
                self.window_snapshots.push(self.state.u.clone());
            }
        }

        let reward = if diverged {
            DIVERGENCE_PENALTY
        } else {
            sbe_reward(
                &self.window_snapshots,
                &self.cfg.params.coarse_grid,
                &self.cfg.reward,
            )
            .reward
        };

        self.control_idx += 1;
        self.done = diverged || self.control_idx >= self.cfg.n_control_steps;
        self.record.actions.push(clipped_action);
        self.record.rewards.push(reward);
        self.record.diverged |= diverged;

        let mut info = BTreeMap::new();
        info.insert("clipped_actions".into(), self.clipped as f64);
        info.insert("max_abs".into(), self.state.max_abs());
        StepResult {
            next_observation: self.window.observation(self.cfg.obs_mode),
            reward,
            done: self.done,
            diverged,
            info,
        }
    }

    fn record(&self) -> &EpisodeRecord {
        &self.record
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk_srs() -> SrsEnvConfig {
        SrsEnvConfig {
            n_control_steps: 3,
            substeps: 20,
            ..Default::default()
        }
    }

    fn desk_sbe() -> SbeEnvConfig {
        let tau = std::f64::consts::TAU;
        let mut cfg = SbeEnvConfig::default();
        cfg.params.fine_grid = crate::numerics::Grid1D::new(128, tau).unwrap();
        cfg.params.coarse_grid = crate::numerics::Grid1D::new(64, tau).unwrap();
        cfg.n_control_steps = 3;
        cfg.substeps_fine = 40;
        cfg.ticks_per_window = 10;
        cfg.n_probes = 8;
        cfg.ic_energy = 0.01;
        cfg
    }

    fn run_episode(env: &mut dyn ControlEnv, seed: u64, action: [f64; 2]) -> Vec<Vec<f64>> {
        let mut o = vec![env.reset(seed)];
        loop {
            let r = env.step(action);
            o.push(r.next_observation.clone());
            if r.done {
                return o;
            }
        }
    }

    #[test]
    fn same_seed_reproduces_episode_bitwise() {
        for make in [
            || Box::new(SrsHfEnv::new(desk_srs()).unwrap()) as Box<dyn ControlEnv>,
            || Box::new(SrsLfEnv::new(desk_srs()).unwrap()) as Box<dyn ControlEnv>,
            || Box::new(SbeDnsEnv::new(desk_sbe()).unwrap()) as Box<dyn ControlEnv>,
            || Box::new(SbeDlesEnv::new(desk_sbe()).unwrap()) as Box<dyn ControlEnv>,
        ] {
            let mut a = make();
            let mut b = make();
            let oa = run_episode(a.as_mut(), 7, [1.0, 0.8]);
            let ob = run_episode(b.as_mut(), 7, [1.0, 0.8]);
            assert_eq!(oa, ob, "env {} not deterministic", a.name());
            let oc = run_episode(b.as_mut(), 8, [1.0, 0.8]);
            assert_ne!(oa, oc, "env {} ignores the seed", a.name());
        }
    }

    #[test]
    fn episode_lengths_and_done_flag() {
        let mut env = SrsHfEnv::new(desk_srs()).unwrap();
        env.reset(1);
        let mut steps = 0;
        loop {
            let r = env.step([1.0, 1.0]);
            steps += 1;
            if r.done {
                break;
            }
        }
        assert_eq!(steps, 3);
        // 1 initial tick + substeps per control step.
        assert_eq!(env.record().times.len(), 1 + 3 * 20);
        assert_eq!(env.record().actions.len(), 3);
    }

    #[test]
    fn out_of_box_action_is_clipped_and_counted() {
        let mut env = SrsLfEnv::new(desk_srs()).unwrap();
        env.reset(3);
        let r = env.step([2.5, 1.2]);
        assert_eq!(r.info["clipped_actions"], 1.0);
        assert_eq!(env.record().actions[0], [2.0, 1.2]);
        let r2 = env.step([1.0, 1.0]);
        assert_eq!(r2.info["clipped_actions"], 1.0);
        assert_eq!(env.record().actions[1], [1.0, 1.0]);
    }

    #[test]
    fn observation_dims_match_declaration() {
        let hf = SrsHfEnv::new(desk_srs()).unwrap();
        assert_eq!(hf.observation_dim(), 20 * 6);
        let mut env = SbeDnsEnv::new(desk_sbe()).unwrap();
        let dim = env.observation_dim();
        assert_eq!(dim, 10 * 8);
        let obs = env.reset(5);
        assert_eq!(obs.len(), dim);
        let r = env.step([1.0, 1.0]);
        assert_eq!(r.next_observation.len(), dim);
    }

    #[test]
    fn one_step_mode_returns_last_tick_only() {
        let mut cfg = desk_srs();
        cfg.obs_mode = ObsMode::OneStep;
        let mut env = SrsHfEnv::new(cfg).unwrap();
        let obs = env.reset(2);
        assert_eq!(obs.len(), 6);
        let r = env.step([1.0, 1.0]);
        assert_eq!(r.next_observation.len(), 6);
        assert_eq!(&r.next_observation, env.record().ticks.last().unwrap());
    }

    #[test]
    fn zero_ic_zero_forcing_coarse_run_never_diverges() {
        let mut cfg = desk_sbe();
        cfg.ic_energy = 0.0;
        cfg.params.d0 = 0.0;
        let mut env = SbeDlesEnv::new(cfg).unwrap();
        env.reset(11);
        loop {
            let r = env.step([2.0, 1.2]);
            assert!(!r.diverged);
            assert_eq!(r.reward, 0.0);
            if r.done {
                break;
            }
        }
        assert!(!env.record().diverged);
    }

    #[test]
    fn fidelities_share_initial_condition_under_one_seed() {
        let mut hf = SrsHfEnv::new(desk_srs()).unwrap();
        let mut lf = SrsLfEnv::new(SrsEnvConfig {
            substeps: 10,
            params: {
                let mut p = SrsParams::default();
                p.dt *= 2.0;
                p
            },
            ..desk_srs()
        })
        .unwrap();
        hf.reset(42);
        lf.reset(42);
        for (a, b) in hf.record().ticks[0].iter().zip(&lf.record().ticks[0]) {
            assert!((a - b).abs() < 1e-15);
        }

        let mut dns = SbeDnsEnv::new(desk_sbe()).unwrap();
        let mut dles = SbeDlesEnv::new(desk_sbe()).unwrap();
        dns.reset(42);
        dles.reset(42);
        for (a, b) in dns.record().snapshots[0].iter().zip(&dles.record().snapshots[0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rewards_are_nonpositive_and_recorded() {
        let mut env = SbeDnsEnv::new(desk_sbe()).unwrap();
        env.reset(9);
        let mut total = 0.0;
        loop {
            let r = env.step([1.5, 0.9]);
            assert!(r.reward <= 0.0);
            total += r.reward;
            if r.done {
                break;
            }
        }
        assert!((env.record().total_reward() - total).abs() < 1e-12);
    }

    #[test]
    fn csv_export_round_trips_header_and_rows() {
        let mut env = SrsHfEnv::new(desk_srs()).unwrap();
        env.reset(4);
        env.step([1.0, 1.0]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("episode.csv");
        env.record().write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,re_u0,im_u0,re_u1,im_u1,re_u2,im_u2"
        );
        assert_eq!(lines.count(), env.record().times.len());
    }

    #[test]
    #[should_panic(expected = "reset first")]
    fn stepping_before_reset_panics() {
        let mut env = SrsHfEnv::new(desk_srs()).unwrap();
        env.step([1.0, 1.0]);
    }
}
