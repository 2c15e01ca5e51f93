//! Offline surrogate training: overlapping-window rollouts whose
//! gradients flow through both the correction network and the
//! reduced-order solver arithmetic, plus the pure data-driven
//! baseline and rollout-error evaluation.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::config::component_rng;
use crate::envs::{ab2_mix, butterworth_source, sbe_rhs, srs_lf_step, ControlSignal};
use crate::hybrid::adjoint::{
    sbe_rhs_vjp, sbe_rk4_tape, sbe_rk4_vjp, srs_lf_step_tape, srs_lf_step_vjp, SbeBootstrapTape,
    SrsStepTape,
};
use crate::hybrid::dataset::{DatasetEpisode, MultiFidelityDataset};
use crate::hybrid::model::{CorrectionMode, FeatureStats, HybridDynamics, HybridModel};
use crate::hybrid::projection::{srs_means_to_vec, srs_vec_to_means};
use crate::nn::{siren_init, AdamState, DenseNet, ForwardCache, Gradients};
use crate::{Error, Result};

/// Knobs of the windowed training loop.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridTrainCfg {
    pub window_length: usize,
    pub stride: usize,
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
    /// Backpropagate through the reduced-order solver arithmetic; off
    /// reproduces the per-step reading (network gradient only).
    pub through_solver: bool,
    pub hidden: Vec<usize>,
    pub omega0: f64,
    pub mode: CorrectionMode,
    pub val_fraction: f64,
    pub seed: u64,
}

impl Default for HybridTrainCfg {
    fn default() -> Self {
        HybridTrainCfg {
            window_length: 8,
            stride: 4,
            epochs: 200,
            batch: 32,
            learning_rate: 1e-4,
            through_solver: true,
            hidden: vec![64, 64],
            omega0: 30.0,
            mode: CorrectionMode::PostStep,
            val_fraction: 0.1,
            seed: 0,
        }
    }
}

/// Loss trajectory and held-out diagnostics of one training run.
#[derive(Debug, Clone)]
pub struct TrainReport {
    /// Mean windowed loss per epoch on the training split.
    pub loss_history: Vec<f64>,
    /// Mean windowed loss per epoch on the held-out split.
    pub val_history: Vec<f64>,
    pub final_val_one_step_mse: f64,
    /// Zero-correction reduced-order baseline on the same split.
    pub baseline_val_one_step_mse: f64,
    pub train_episodes: Vec<usize>,
    pub val_episodes: Vec<usize>,
}

// ---- single-window rollout with tape ----

enum StepTape {
    Wave(SrsStepTape),
    BurgersMulti,
    BurgersBoot(SbeBootstrapTape),
}

/// Everything the backward pass needs from one window rollout.
pub struct WindowTape {
    /// Model states u_0..u_W (u_0 is the teacher state).
    states: Vec<Vec<f64>>,
    bares: Vec<Vec<f64>>,
    caches: Vec<ForwardCache>,
    taps: Vec<StepTape>,
    loss: f64,
}

impl WindowTape {
    pub fn loss(&self) -> f64 {
        self.loss
    }
}

/// Rolls the model `window` steps from the stored state at `start`,
/// teacher-forced there only, and accumulates the mean squared error
/// against the stored states.
pub fn window_forward(
    model: &HybridModel,
    ds: &MultiFidelityDataset,
    ep: &DatasetEpisode,
    start: usize,
    window: usize,
) -> WindowTape {
    assert!(window >= 1 && start + window <= ep.n_steps());
    let d = model.state_dim();
    let norm = 1.0 / (window * d) as f64;

    let mut states = Vec::with_capacity(window + 1);
    let mut bares = Vec::with_capacity(window);
    let mut caches = Vec::with_capacity(window);
    let mut taps = Vec::with_capacity(window);
    let mut loss = 0.0;

    states.push(ep.trajectory[start].clone());
    let mut hist = ds.history_at(ep, start);

    for j in 0..window {
        let idx = start + j;
        let u = states[j].clone();
        let t = ep.times[idx];
        let signal = ds.signal_for(ep, idx);
        let phase = ds.phase_of(idx);

        let (bare, tape) = match &model.dynamics {
            HybridDynamics::ThreeWave { params, dt } => {
                let (next, tape) = srs_lf_step_tape(&srs_vec_to_means(&u), t, *dt, &signal, params);
                (srs_means_to_vec(&next), StepTape::Wave(tape))
            }
            HybridDynamics::Burgers { params } => {
                let profile = ep
                    .forcing_profile
                    .as_ref()
                    .expect("Burgers episodes store a forcing profile");
                let source = butterworth_source(&signal, t);
                let forcing: Vec<f64> = profile.iter().map(|e| e * source).collect();
                let grid = &params.coarse_grid;
                let dt = params.coarse_dt();
                let f_now = sbe_rhs(&u, grid, params.nu, &forcing, None);
                let out = match &hist {
                    Some(h) => {
                        let bare = ab2_mix(&u, &f_now, h, dt);
                        (bare, StepTape::BurgersMulti)
                    }
                    None => {
                        let (bare, tape) = sbe_rk4_tape(&u, &forcing, grid, params.nu, dt);
                        (bare, StepTape::BurgersBoot(tape))
                    }
                };
                hist = Some(f_now);
                out
            }
        };

        let x = model.features(&u, &bare, [signal.a1, signal.a2], phase);
        let xa = Array2::from_shape_vec((1, x.len()), x).expect("contiguous features");
        let cache = model.net.forward_batch_cached(xa.view());
        let z: Vec<f64> = cache.output.row(0).to_vec();
        let inc = model.increment_of(&z);

        let mut next = bare.clone();
        for (ni, ci) in next.iter_mut().zip(&inc) {
            *ni += ci;
        }
        let target = &ep.trajectory[idx + 1];
        for i in 0..d {
            let e = next[i] - target[i];
            loss += norm * e * e;
        }

        states.push(next);
        bares.push(bare);
        caches.push(cache);
        taps.push(tape);
    }

    WindowTape {
        states,
        bares,
        caches,
        taps,
        loss,
    }
}

/// Reverse pass over one recorded window; still correct when the tape
/// came from a different parameter point is NOT supported — always
/// pair with the forward that produced it.
pub fn window_backward(
    model: &HybridModel,
    ds: &MultiFidelityDataset,
    ep: &DatasetEpisode,
    start: usize,
    tape: &WindowTape,
    through_solver: bool,
) -> Gradients {
    let d = model.state_dim();
    let window = tape.taps.len();
    let norm = 1.0 / (window * d) as f64;
    let dt = model.dynamics.step_dt();

    let mut grads = Gradients::zeros_like(&model.net);
    let mut g_carry = vec![0.0; d];
    // Cotangent of this step's rhs slope arriving from the next step's
    // history use (Burgers multistep chain).
    let mut g_hist = vec![0.0; d];

    for j in (0..window).rev() {
        let idx = start + j;
        let target = &ep.trajectory[idx + 1];
        let next = &tape.states[j + 1];
        let mut g_next = g_carry.clone();
        for i in 0..d {
            g_next[i] += 2.0 * norm * (next[i] - target[i]);
        }

        // Correction path.
        let gz: Vec<f64> = (0..d)
            .map(|i| {
                let s = model.stats.output_scale[i];
                match model.mode {
                    CorrectionMode::PostStep => s * g_next[i],
                    CorrectionMode::RhsTerm => dt * s * g_next[i],
                }
            })
            .collect();
        let upstream = Array2::from_shape_vec((1, d), gz).expect("contiguous upstream");
        let (net_grads, g_x) = model.net.backward(&tape.caches[j], upstream.view());
        grads.add_assign(&net_grads);

        if !through_solver {
            g_carry = vec![0.0; d];
            g_hist = vec![0.0; d];
            continue;
        }

        let mut g_u_feat = vec![0.0; d];
        let mut g_bare = g_next.clone();
        for i in 0..d {
            g_u_feat[i] = g_x[[0, i]] / model.stats.state_std[i];
            g_bare[i] += g_x[[0, d + i]] / model.stats.state_std[i];
        }

        let u = &tape.states[j];
        let mut g_u = match &tape.taps[j] {
            StepTape::Wave(step_tape) => {
                let params = match &model.dynamics {
                    HybridDynamics::ThreeWave { params, .. } => params,
                    HybridDynamics::Burgers { .. } => unreachable!("tape kind matches dynamics"),
                };
                let g_means = srs_lf_step_vjp(
                    step_tape,
                    dt,
                    params,
                    &srs_vec_to_means(&g_bare),
                );
                srs_means_to_vec(&g_means)
            }
            StepTape::BurgersMulti => {
                let params = match &model.dynamics {
                    HybridDynamics::Burgers { params } => params,
                    HybridDynamics::ThreeWave { .. } => unreachable!("tape kind matches dynamics"),
                };
                let grid = &params.coarse_grid;
                // bare = u + 1.5 dt f(u) - 0.5 dt hist; f(u) also feeds
                // the next step's history.
                let mut g_f = g_hist.clone();
                for i in 0..d {
                    g_f[i] += 1.5 * dt * g_bare[i];
                }
                let mut g_u = sbe_rhs_vjp(u, grid, params.nu, &g_f);
                for i in 0..d {
                    g_u[i] += g_bare[i];
                }
                for (gh, gb) in g_hist.iter_mut().zip(&g_bare) {
                    *gh = -0.5 * dt * gb;
                }
                g_u
            }
            StepTape::BurgersBoot(boot) => {
                let params = match &model.dynamics {
                    HybridDynamics::Burgers { params } => params,
                    HybridDynamics::ThreeWave { .. } => unreachable!("tape kind matches dynamics"),
                };
                let grid = &params.coarse_grid;
                let mut g_u = sbe_rk4_vjp(u, boot, grid, params.nu, dt, &g_bare);
                // The bootstrap still records f(u) as history for the
                // following step.
                if g_hist.iter().any(|&v| v != 0.0) {
                    let extra = sbe_rhs_vjp(u, grid, params.nu, &g_hist);
                    for i in 0..d {
                        g_u[i] += extra[i];
                    }
                }
                g_hist = vec![0.0; d];
                g_u
            }
        };
        for i in 0..d {
            g_u[i] += g_u_feat[i];
        }
        g_carry = g_u;
    }
    grads
}

/// Forward and backward in one call.
pub fn window_loss_and_grads(
    model: &HybridModel,
    ds: &MultiFidelityDataset,
    ep: &DatasetEpisode,
    start: usize,
    window: usize,
    through_solver: bool,
) -> (f64, Gradients) {
    let tape = window_forward(model, ds, ep, start, window);
    let grads = window_backward(model, ds, ep, start, &tape, through_solver);
    (tape.loss, grads)
}

// ---- dataset statistics ----

struct Welford {
    n: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    fn new(d: usize) -> Self {
        Welford {
            n: 0.0,
            mean: vec![0.0; d],
            m2: vec![0.0; d],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.n += 1.0;
        for i in 0..x.len() {
            let delta = x[i] - self.mean[i];
            self.mean[i] += delta / self.n;
            self.m2[i] += delta * (x[i] - self.mean[i]);
        }
    }

    fn std(&self) -> Vec<f64> {
        self.m2
            .iter()
            .map(|&m| if self.n > 1.0 { (m / (self.n - 1.0)).sqrt() } else { 0.0 })
            .collect()
    }
}

/// Reduced-order prediction of the next stored state, from the stored
/// state (the zero-correction baseline step).
pub fn bare_step_from_data(
    dynamics: &HybridDynamics,
    ds: &MultiFidelityDataset,
    ep: &DatasetEpisode,
    idx: usize,
) -> Vec<f64> {
    let signal = ds.signal_for(ep, idx);
    let t = ep.times[idx];
    match dynamics {
        HybridDynamics::ThreeWave { params, dt } => {
            let next = srs_lf_step(&srs_vec_to_means(&ep.trajectory[idx]), t, *dt, &signal, params);
            srs_means_to_vec(&next)
        }
        HybridDynamics::Burgers { params } => {
            let profile = ep
                .forcing_profile
                .as_ref()
                .expect("Burgers episodes store a forcing profile");
            let source = butterworth_source(&signal, t);
            let forcing: Vec<f64> = profile.iter().map(|e| e * source).collect();
            let grid = &params.coarse_grid;
            let dt = params.coarse_dt();
            let u = &ep.trajectory[idx];
            match ds.history_at(ep, idx) {
                Some(h) => {
                    let f_now = sbe_rhs(u, grid, params.nu, &forcing, None);
                    ab2_mix(u, &f_now, &h, dt)
                }
                None => sbe_rk4_tape(u, &forcing, grid, params.nu, dt).0,
            }
        }
    }
}

/// State standardization and residual-based output scaling from the
/// training split. Exactly-zero residual channels fall back to unit
/// scale so the network still has to learn the zero function.
pub fn compute_feature_stats(
    ds: &MultiFidelityDataset,
    train_eps: &[usize],
    mode: CorrectionMode,
) -> FeatureStats {
    let d = ds.header.state_dim;
    let mut state_acc = Welford::new(d);
    let mut resid_acc = Welford::new(d);
    for &e in train_eps {
        let ep = &ds.episodes[e];
        for s in &ep.trajectory {
            state_acc.push(s);
        }
        for idx in 0..ep.n_steps() {
            let bare = bare_step_from_data(&ds.header.dynamics, ds, ep, idx);
            let resid: Vec<f64> = (0..d).map(|i| ep.trajectory[idx + 1][i] - bare[i]).collect();
            resid_acc.push(&resid);
        }
    }
    let raw_std = state_acc.std();
    let max_std = raw_std.iter().fold(0.0_f64, |m, &v| m.max(v));
    let state_std: Vec<f64> = raw_std
        .iter()
        .map(|&s| s.max(1e-6 * max_std).max(1e-12))
        .collect();
    let dt = ds.header.dynamics.step_dt();
    let output_scale: Vec<f64> = resid_acc
        .std()
        .iter()
        .map(|&s| {
            let base = if s < 1e-12 { 1.0 } else { s };
            match mode {
                CorrectionMode::PostStep => base,
                CorrectionMode::RhsTerm => base / dt,
            }
        })
        .collect();
    FeatureStats {
        state_mean: state_acc.mean,
        state_std,
        output_scale,
    }
}

// ---- training loops ----

fn window_starts(n_steps: usize, window: usize, stride: usize) -> Vec<usize> {
    let mut starts: Vec<usize> = (0..=n_steps.saturating_sub(window)).step_by(stride).collect();
    let last = n_steps - window;
    if starts.last() != Some(&last) {
        starts.push(last);
    }
    starts
}

/// Mean one-step squared error per state channel over whole episodes.
pub fn one_step_mse(model: Option<&HybridModel>, ds: &MultiFidelityDataset, eps: &[usize]) -> f64 {
    let d = ds.header.state_dim;
    let mut total = 0.0;
    let mut count = 0usize;
    for &e in eps {
        let ep = &ds.episodes[e];
        for idx in 0..ep.n_steps() {
            let pred = match model {
                Some(m) => {
                    let tape = window_forward(m, ds, ep, idx, 1);
                    tape.states[1].clone()
                }
                None => bare_step_from_data(&ds.header.dynamics, ds, ep, idx),
            };
            for i in 0..d {
                let err = pred[i] - ep.trajectory[idx + 1][i];
                total += err * err;
            }
            count += d;
        }
    }
    total / count.max(1) as f64
}

/// Trains the predictor-corrector on overlapping windows. Returns the
/// trained model and the loss history; errors carry the epoch and
/// window where a non-finite loss appeared.
pub fn train_hybrid(
    ds: &MultiFidelityDataset,
    cfg: &HybridTrainCfg,
) -> Result<(HybridModel, TrainReport)> {
    ds.validate()?;
    if cfg.window_length == 0 || cfg.stride == 0 || cfg.batch == 0 {
        return Err(Error::config("window, stride and batch must be nonzero"));
    }
    if !(cfg.learning_rate > 0.0) {
        return Err(Error::config("learning rate must be positive"));
    }
    let n_steps = ds.header.n_control_steps * ds.header.substeps;
    if cfg.window_length > n_steps {
        return Err(Error::config(format!(
            "window length {} exceeds trajectory steps {n_steps}",
            cfg.window_length
        )));
    }

    let (train_eps, val_eps) = ds.split(cfg.val_fraction);
    let stats = compute_feature_stats(ds, &train_eps, cfg.mode);
    let mut init_rng = component_rng(cfg.seed, "hybrid-init");
    let mut model = HybridModel::init(
        ds.header.dynamics.clone(),
        &cfg.hidden,
        cfg.omega0,
        cfg.mode,
        &mut init_rng,
    )?;
    model.stats = stats;
    model.stats.validate(model.state_dim())?;

    let mut windows: Vec<(usize, usize)> = Vec::new();
    for &e in &train_eps {
        for s in window_starts(ds.episodes[e].n_steps(), cfg.window_length, cfg.stride) {
            windows.push((e, s));
        }
    }
    let val_windows: Vec<(usize, usize)> = val_eps
        .iter()
        .flat_map(|&e| {
            window_starts(ds.episodes[e].n_steps(), cfg.window_length, cfg.stride)
                .into_iter()
                .map(move |s| (e, s))
        })
        .collect();

    let mut adam = AdamState::new(&model.net, cfg.learning_rate);
    let mut shuffle_rng = component_rng(cfg.seed, "hybrid-batches");
    let mut loss_history = Vec::with_capacity(cfg.epochs);
    let mut val_history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        windows.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for chunk in windows.chunks(cfg.batch) {
            let results: Vec<(f64, Gradients)> = chunk
                .par_iter()
                .map(|&(e, s)| {
                    window_loss_and_grads(
                        &model,
                        ds,
                        &ds.episodes[e],
                        s,
                        cfg.window_length,
                        cfg.through_solver,
                    )
                })
                .collect();
            let mut grads = Gradients::zeros_like(&model.net);
            for ((e, s), (loss, g)) in chunk.iter().zip(&results) {
                if !loss.is_finite() {
                    return Err(Error::invalid(format!(
                        "non-finite training loss at epoch {epoch}, episode {e}, window start {s}"
                    )));
                }
                epoch_loss += loss;
                grads.add_assign(g);
            }
            grads.scale(1.0 / chunk.len() as f64);
            adam.step(&mut model.net, &grads);
        }
        loss_history.push(epoch_loss / windows.len().max(1) as f64);

        let val_loss = if val_windows.is_empty() {
            f64::NAN
        } else {
            let losses: Vec<f64> = val_windows
                .par_iter()
                .map(|&(e, s)| window_forward(&model, ds, &ds.episodes[e], s, cfg.window_length).loss)
                .collect();
            losses.iter().sum::<f64>() / losses.len() as f64
        };
        val_history.push(val_loss);
    }

    let metric_eps: &[usize] = if val_eps.is_empty() { &train_eps } else { &val_eps };
    let final_val_one_step_mse = one_step_mse(Some(&model), ds, metric_eps);
    let baseline_val_one_step_mse = one_step_mse(None, ds, metric_eps);

    Ok((
        model,
        TrainReport {
            loss_history,
            val_history,
            final_val_one_step_mse,
            baseline_val_one_step_mse,
            train_episodes: train_eps,
            val_episodes: val_eps,
        },
    ))
}

// ---- pure data-driven baseline ----

/// Direct next-state network: standardized (state, action, phase) in,
/// standardized next state out.
#[derive(Debug, Clone)]
pub struct PureSurrogate {
    pub net: DenseNet,
    pub state_mean: Vec<f64>,
    pub state_std: Vec<f64>,
}

impl PureSurrogate {
    fn encode(&self, u: &[f64], action: [f64; 2], phase: f64) -> Vec<f64> {
        let d = u.len();
        let mut x = Vec::with_capacity(d + 3);
        for i in 0..d {
            x.push((u[i] - self.state_mean[i]) / self.state_std[i]);
        }
        use crate::envs::{ACTION_HIGH, ACTION_LOW};
        x.push((action[0] - 0.5 * (ACTION_LOW[0] + ACTION_HIGH[0])) / (0.5 * (ACTION_HIGH[0] - ACTION_LOW[0])));
        x.push((action[1] - 0.5 * (ACTION_LOW[1] + ACTION_HIGH[1])) / (0.5 * (ACTION_HIGH[1] - ACTION_LOW[1])));
        x.push(2.0 * phase - 1.0);
        x
    }

    pub fn predict(&self, u: &[f64], action: [f64; 2], phase: f64) -> Vec<f64> {
        let x = self.encode(u, action, phase);
        let z = self.net.forward(&x).expect("dims fixed at build time");
        (0..u.len())
            .map(|i| self.state_mean[i] + self.state_std[i] * z[i])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateTrainCfg {
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
    pub hidden: Vec<usize>,
    pub omega0: f64,
    pub val_fraction: f64,
    pub seed: u64,
}

impl Default for SurrogateTrainCfg {
    fn default() -> Self {
        SurrogateTrainCfg {
            epochs: 200,
            batch: 32,
            learning_rate: 1e-3,
            hidden: vec![64, 64],
            omega0: 30.0,
            val_fraction: 0.1,
            seed: 0,
        }
    }
}

/// Trains the one-step data-driven baseline. Losses are reported in
/// physical state units.
pub fn train_pure_surrogate(
    ds: &MultiFidelityDataset,
    cfg: &SurrogateTrainCfg,
) -> Result<(PureSurrogate, TrainReport)> {
    ds.validate()?;
    let d = ds.header.state_dim;
    let (train_eps, val_eps) = ds.split(cfg.val_fraction);
    let stats = compute_feature_stats(ds, &train_eps, CorrectionMode::PostStep);

    let mut dims = vec![d + 3];
    dims.extend_from_slice(&cfg.hidden);
    dims.push(d);
    let mut init_rng = component_rng(cfg.seed, "surrogate-init");
    let net = siren_init(&dims, cfg.omega0, &mut init_rng)?;
    let mut surrogate = PureSurrogate {
        net,
        state_mean: stats.state_mean.clone(),
        state_std: stats.state_std.clone(),
    };

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for &e in &train_eps {
        for idx in 0..ds.episodes[e].n_steps() {
            pairs.push((e, idx));
        }
    }

    let mut adam = AdamState::new(&surrogate.net, cfg.learning_rate);
    let mut shuffle_rng = component_rng(cfg.seed, "surrogate-batches");
    let mut loss_history = Vec::with_capacity(cfg.epochs);

    let std_sq: Vec<f64> = surrogate.state_std.iter().map(|s| s * s).collect();
    for epoch in 0..cfg.epochs {
        pairs.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        let mut epoch_count = 0usize;
        for chunk in pairs.chunks(cfg.batch) {
            let b = chunk.len();
            let mut x = Array2::zeros((b, d + 3));
            let mut zt = Array2::zeros((b, d));
            for (r, &(e, idx)) in chunk.iter().enumerate() {
                let ep = &ds.episodes[e];
                let signal = ds.signal_for(ep, idx);
                let row = surrogate.encode(
                    &ep.trajectory[idx],
                    [signal.a1, signal.a2],
                    ds.phase_of(idx),
                );
                for (c, v) in row.into_iter().enumerate() {
                    x[[r, c]] = v;
                }
                for i in 0..d {
                    zt[[r, i]] = (ep.trajectory[idx + 1][i] - surrogate.state_mean[i])
                        / surrogate.state_std[i];
                }
            }
            let cache = surrogate.net.forward_batch_cached(x.view());
            let norm = 1.0 / (b * d) as f64;
            let mut upstream = Array2::zeros((b, d));
            let mut batch_loss = 0.0;
            for r in 0..b {
                for i in 0..d {
                    let dz = cache.output[[r, i]] - zt[[r, i]];
                    batch_loss += norm * std_sq[i] * dz * dz;
                    upstream[[r, i]] = 2.0 * norm * std_sq[i] * dz;
                }
            }
            if !batch_loss.is_finite() {
                return Err(Error::invalid(format!(
                    "non-finite surrogate loss at epoch {epoch}"
                )));
            }
            let (grads, _) = surrogate.net.backward(&cache, upstream.view());
            adam.step(&mut surrogate.net, &grads);
            epoch_loss += batch_loss * b as f64;
            epoch_count += b;
        }
        loss_history.push(epoch_loss / epoch_count.max(1) as f64);
    }

    let metric_eps: Vec<usize> = if val_eps.is_empty() { train_eps.clone() } else { val_eps.clone() };
    let mut total = 0.0;
    let mut count = 0usize;
    for &e in &metric_eps {
        let ep = &ds.episodes[e];
        for idx in 0..ep.n_steps() {
            let signal = ds.signal_for(ep, idx);
            let pred = surrogate.predict(&ep.trajectory[idx], [signal.a1, signal.a2], ds.phase_of(idx));
            for i in 0..d {
                let err = pred[i] - ep.trajectory[idx + 1][i];
                total += err * err;
            }
            count += d;
        }
    }
    let final_val = total / count.max(1) as f64;

    Ok((
        surrogate,
        TrainReport {
            loss_history,
            val_history: Vec::new(),
            final_val_one_step_mse: final_val,
            baseline_val_one_step_mse: f64::NAN,
            train_episodes: train_eps,
            val_episodes: val_eps,
        },
    ))
}

// ---- rollout evaluation ----

/// Which dynamics to roll when scoring long-horizon error.
pub enum RolloutDynamics<'a> {
    Hybrid(&'a HybridModel),
    Pure(&'a PureSurrogate),
    /// Zero-correction reduced-order stepper.
    Baseline,
}

/// Mean squared error per rollout step against the stored trajectory,
/// teacher-forced at the initial state only.
pub fn rollout_error(
    ds: &MultiFidelityDataset,
    eps: &[usize],
    dynamics: RolloutDynamics,
    horizon: usize,
) -> Result<Vec<f64>> {
    let d = ds.header.state_dim;
    let n_steps = ds.header.n_control_steps * ds.header.substeps;
    if horizon == 0 || horizon > n_steps {
        return Err(Error::config(format!(
            "horizon {horizon} outside stored trajectory ({n_steps} steps)"
        )));
    }
    if eps.is_empty() {
        return Err(Error::config("rollout evaluation needs at least one episode"));
    }
    let mut curve = vec![0.0; horizon];
    for &e in eps {
        let ep = &ds.episodes[e];
        let mut u = ep.trajectory[0].clone();
        let mut hist: Option<Vec<f64>> = None;
        for j in 0..horizon {
            let signal = ds.signal_for(ep, j);
            let phase = ds.phase_of(j);
            let t = ep.times[j];
            u = match &dynamics {
                RolloutDynamics::Pure(s) => s.predict(&u, [signal.a1, signal.a2], phase),
                RolloutDynamics::Hybrid(m) => {
                    let state = crate::hybrid::model::HybridState {
                        u: u.clone(),
                        t,
                        history: hist.take(),
                    };
                    let out = m.hybrid_step(&state, &signal, phase, ep.forcing_profile.as_deref());
                    hist = out.state.history.clone();
                    out.state.u
                }
                RolloutDynamics::Baseline => match &ds.header.dynamics {
                    HybridDynamics::ThreeWave { params, dt } => srs_means_to_vec(&srs_lf_step(
                        &srs_vec_to_means(&u),
                        t,
                        *dt,
                        &signal,
                        params,
                    )),
                    HybridDynamics::Burgers { params } => {
                        let profile = ep
                            .forcing_profile
                            .as_ref()
                            .expect("Burgers episodes store a forcing profile");
                        let source = butterworth_source(&signal, t);
                        let forcing: Vec<f64> = profile.iter().map(|v| v * source).collect();
                        let grid = &params.coarse_grid;
                        let dtc = params.coarse_dt();
                        match hist.take() {
                            Some(h) => {
                                let f_now = sbe_rhs(&u, grid, params.nu, &forcing, None);
                                let next = ab2_mix(&u, &f_now, &h, dtc);
                                hist = Some(f_now);
                                next
                            }
                            None => {
                                let f_now = sbe_rhs(&u, grid, params.nu, &forcing, None);
                                let (next, _) = sbe_rk4_tape(&u, &forcing, grid, params.nu, dtc);
                                hist = Some(f_now);
                                next
                            }
                        }
                    }
                },
            };
            let target = &ep.trajectory[j + 1];
            let mse: f64 = (0..d).map(|i| (u[i] - target[i]).powi(2)).sum::<f64>() / d as f64;
            curve[j] += mse / eps.len() as f64;
        }
    }
    Ok(curve)
}
