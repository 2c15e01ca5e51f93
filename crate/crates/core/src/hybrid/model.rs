//! Predictor-corrector surrogate: a reduced-order stepper plus a dense
//! correction network whose output is added to each predicted step.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::envs::{
    srs_lf_step, ControlSignal, SbeParams, SbeState, SrsParams, ACTION_HIGH, ACTION_LOW,
};
use crate::hybrid::projection::{srs_means_to_vec, srs_vec_to_means};
use crate::nn::{load_checkpoint, save_checkpoint, siren_init, Checkpoint, DenseNet};
use crate::{Error, Result};

/// How the network output enters the step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrectionMode {
    /// Added to the predicted state: `u' = step(u) + c`.
    PostStep,
    /// Treated as a source term integrated over one step:
    /// `u' = step(u) + dt * c`.
    RhsTerm,
}

/// Input standardization and output scaling, estimated from the
/// training set and stored with the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub state_mean: Vec<f64>,
    pub state_std: Vec<f64>,
    /// Per-channel scale applied to the raw network output.
    pub output_scale: Vec<f64>,
}

impl FeatureStats {
    /// Pass-through stats: zero mean, unit scale everywhere.
    pub fn identity(state_dim: usize) -> Self {
        FeatureStats {
            state_mean: vec![0.0; state_dim],
            state_std: vec![1.0; state_dim],
            output_scale: vec![1.0; state_dim],
        }
    }

    pub fn validate(&self, state_dim: usize) -> Result<()> {
        if self.state_mean.len() != state_dim
            || self.state_std.len() != state_dim
            || self.output_scale.len() != state_dim
        {
            return Err(Error::invalid(format!(
                "feature stats sized for {} channels, state has {state_dim}",
                self.state_mean.len()
            )));
        }
        if self.state_std.iter().any(|&s| !(s > 0.0))
            || self.output_scale.iter().any(|&s| !(s > 0.0))
        {
            return Err(Error::invalid("feature scales must be positive"));
        }
        Ok(())
    }
}

/// Which reduced dynamics the surrogate corrects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum HybridDynamics {
    /// Mean three-wave ODE. `dt` is the reduced-order step size.
    ThreeWave { params: SrsParams, dt: f64 },
    /// Coarse-grid Burgers solver at its native step size.
    Burgers { params: SbeParams },
}

impl HybridDynamics {
    pub fn state_dim(&self) -> usize {
        match self {
            HybridDynamics::ThreeWave { .. } => 6,
            HybridDynamics::Burgers { params } => params.coarse_grid.n_points,
        }
    }

    pub fn step_dt(&self) -> f64 {
        match self {
            HybridDynamics::ThreeWave { dt, .. } => *dt,
            HybridDynamics::Burgers { params } => params.coarse_dt(),
        }
    }

    /// Correction-network input width: current state, predicted state,
    /// the two action components and the window phase.
    pub fn feature_dim(&self) -> usize {
        2 * self.state_dim() + 3
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            HybridDynamics::ThreeWave { params, dt } => {
                params.validate()?;
                if !(*dt > 0.0) {
                    return Err(Error::invalid("reduced step size must be positive"));
                }
            }
            HybridDynamics::Burgers { params } => params.validate()?,
        }
        Ok(())
    }
}

/// State advanced by [`HybridModel::hybrid_step`]: the reduced field,
/// current time, and the multistep history the Burgers solver carries.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridState {
    pub u: Vec<f64>,
    pub t: f64,
    /// Previous-step rhs for the two-step scheme; `None` bootstraps.
    pub history: Option<Vec<f64>>,
}

impl HybridState {
    pub fn new(u: Vec<f64>, t: f64) -> Self {
        HybridState {
            u,
            t,
            history: None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.u.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// One hybrid step, split so callers can inspect the pieces.
#[derive(Debug, Clone)]
pub struct HybridStepOut {
    pub state: HybridState,
    /// Reduced-order prediction before the correction.
    pub bare: Vec<f64>,
    /// Applied correction; `state.u = bare + increment` elementwise.
    pub increment: Vec<f64>,
}

/// Reduced-order stepper plus correction network.
#[derive(Debug, Clone)]
pub struct HybridModel {
    pub dynamics: HybridDynamics,
    pub net: DenseNet,
    pub stats: FeatureStats,
    pub mode: CorrectionMode,
}

fn norm_action(a: f64, lo: f64, hi: f64) -> f64 {
    (a - 0.5 * (lo + hi)) / (0.5 * (hi - lo))
}

impl HybridModel {
    pub fn new(
        dynamics: HybridDynamics,
        net: DenseNet,
        stats: FeatureStats,
        mode: CorrectionMode,
    ) -> Result<Self> {
        dynamics.validate()?;
        stats.validate(dynamics.state_dim())?;
        if net.input_dim() != dynamics.feature_dim() {
            return Err(Error::ShapeMismatch {
                context: "correction net input",
                expected: dynamics.feature_dim(),
                got: net.input_dim(),
            });
        }
        if net.output_dim() != dynamics.state_dim() {
            return Err(Error::ShapeMismatch {
                context: "correction net output",
                expected: dynamics.state_dim(),
                got: net.output_dim(),
            });
        }
        Ok(HybridModel {
            dynamics,
            net,
            stats,
            mode,
        })
    }

    /// Fresh sine-activation correction net with pass-through stats.
    pub fn init<R: rand::Rng>(
        dynamics: HybridDynamics,
        hidden: &[usize],
        omega0: f64,
        mode: CorrectionMode,
        rng: &mut R,
    ) -> Result<Self> {
        let mut dims = vec![dynamics.feature_dim()];
        dims.extend_from_slice(hidden);
        dims.push(dynamics.state_dim());
        let net = siren_init(&dims, omega0, rng)?;
        let stats = FeatureStats::identity(dynamics.state_dim());
        HybridModel::new(dynamics, net, stats, mode)
    }

    pub fn state_dim(&self) -> usize {
        self.dynamics.state_dim()
    }

    /// Standardized network input for one step.
    pub fn features(&self, u: &[f64], bare: &[f64], action: [f64; 2], phase: f64) -> Vec<f64> {
        let d = self.state_dim();
        assert_eq!(u.len(), d);
        assert_eq!(bare.len(), d);
        let mut x = Vec::with_capacity(self.dynamics.feature_dim());
        for i in 0..d {
            x.push((u[i] - self.stats.state_mean[i]) / self.stats.state_std[i]);
        }
        for i in 0..d {
            x.push((bare[i] - self.stats.state_mean[i]) / self.stats.state_std[i]);
        }
        x.push(norm_action(action[0], ACTION_LOW[0], ACTION_HIGH[0]));
        x.push(norm_action(action[1], ACTION_LOW[1], ACTION_HIGH[1]));
        x.push(2.0 * phase - 1.0);
        x
    }

    /// Reduced-order prediction only. Returns the predicted state and,
    /// for the multistep solver, the refreshed history slope.
    pub fn bare_step(
        &self,
        state: &HybridState,
        signal: &ControlSignal,
        forcing_profile: Option<&[f64]>,
    ) -> (Vec<f64>, Option<Vec<f64>>) {
        match &self.dynamics {
            HybridDynamics::ThreeWave { params, dt } => {
                let means = srs_vec_to_means(&state.u);
                let next = srs_lf_step(&means, state.t, *dt, signal, params);
                (srs_means_to_vec(&next), None)
            }
            HybridDynamics::Burgers { params } => {
                let profile =
                    forcing_profile.expect("Burgers hybrid step needs the episode forcing profile");
                let carrier = SbeState {
                    u: state.u.clone(),
                    t: state.t,
                    rhs_prev: state.history.clone(),
                    forcing_profile: profile.to_vec(),
                };
                let advanced = crate::envs::sbe_dles_step(&carrier, signal, params);
                (advanced.u, advanced.rhs_prev)
            }
        }
    }

    /// Correction applied for raw network output `z`.
    pub fn increment_of(&self, z: &[f64]) -> Vec<f64> {
        let dt = self.dynamics.step_dt();
        z.iter()
            .zip(&self.stats.output_scale)
            .map(|(&zi, &s)| match self.mode {
                CorrectionMode::PostStep => s * zi,
                CorrectionMode::RhsTerm => dt * s * zi,
            })
            .collect()
    }

    /// One predictor-corrector step. With an all-zero network this is
    /// exactly the reduced-order step.
    pub fn hybrid_step(
        &self,
        state: &HybridState,
        signal: &ControlSignal,
        phase: f64,
        forcing_profile: Option<&[f64]>,
    ) -> HybridStepOut {
        let (bare, history) = self.bare_step(state, signal, forcing_profile);
        let x = self.features(&state.u, &bare, [signal.a1, signal.a2], phase);
        let z = self.net.forward(&x).expect("feature dim validated");
        let increment = self.increment_of(&z);
        let mut u = bare.clone();
        for (ui, ci) in u.iter_mut().zip(&increment) {
            *ui += ci;
        }
        HybridStepOut {
            state: HybridState {
                u,
                t: state.t + self.dynamics.step_dt(),
                history,
            },
            bare,
            increment,
        }
    }
}

const META_DYNAMICS: &str = "hybrid-dynamics";
const META_MODE: &str = "hybrid-correction-mode";
const META_STATS: &str = "hybrid-feature-stats";

/// Writes the model as a network checkpoint with the dynamics, stats
/// and mode embedded in the metadata map.
pub fn save_hybrid_model(
    path: &Path,
    model: &HybridModel,
    extra_metadata: &[(String, String)],
) -> Result<()> {
    let mut metadata = std::collections::BTreeMap::new();
    metadata.insert(
        META_DYNAMICS.to_string(),
        serde_json::to_string(&model.dynamics)?,
    );
    metadata.insert(META_MODE.to_string(), serde_json::to_string(&model.mode)?);
    metadata.insert(
        META_STATS.to_string(),
        serde_json::to_string(&model.stats)?,
    );
    for (k, v) in extra_metadata {
        metadata.insert(k.clone(), v.clone());
    }
    save_checkpoint(
        path,
        &Checkpoint {
            net: model.net.clone(),
            adam: None,
            metadata,
        },
    )
}

pub fn load_hybrid_model(path: &Path) -> Result<HybridModel> {
    let ckpt = load_checkpoint(path)?;
    let missing = |key: &str| Error::invalid(format!("checkpoint lacks {key} metadata"));
    let dynamics: HybridDynamics = serde_json::from_str(
        ckpt.metadata.get(META_DYNAMICS).ok_or_else(|| missing(META_DYNAMICS))?,
    )?;
    let mode: CorrectionMode =
        serde_json::from_str(ckpt.metadata.get(META_MODE).ok_or_else(|| missing(META_MODE))?)?;
    let stats: FeatureStats = serde_json::from_str(
        ckpt.metadata.get(META_STATS).ok_or_else(|| missing(META_STATS))?,
    )?;
    HybridModel::new(dynamics, ckpt.net, stats, mode)
}
