//! Reference-trajectory datasets for surrogate training: generation
//! under randomized control, on-disk layout (one binary block per
//! episode, JSON sidecars, hashed manifest) and exact reloading.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{component_rng, derive_component_seed};
use crate::envs::{
    sample_forcing_profile, sbe_rhs, ControlEnv, ControlSignal, SbeDnsEnv, SbeEnvConfig,
    SrsEnvConfig, SrsHfEnv, ACTION_HIGH, ACTION_LOW,
};
use crate::hybrid::model::HybridDynamics;
use crate::{Error, Result};

/// One reference episode projected onto the reduced representation and
/// aligned to the reduced-order step size.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetEpisode {
    pub seed: u64,
    /// Clipped actions actually applied, one per control window.
    pub actions: Vec<[f64; 2]>,
    /// Pulse centers the environment used, one per control window.
    pub window_mus: Vec<f64>,
    /// Time stamps of `trajectory`, starting at 0.
    pub times: Vec<f64>,
    /// Projected states, length `n_windows * substeps + 1`.
    pub trajectory: Vec<Vec<f64>>,
    /// Coarse-grid forcing profile (Burgers episodes only).
    pub forcing_profile: Option<Vec<f64>>,
}

impl DatasetEpisode {
    pub fn n_steps(&self) -> usize {
        self.trajectory.len().saturating_sub(1)
    }
}

/// Shared dataset description stored in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    /// Reduced dynamics the surrogate will correct.
    pub dynamics: HybridDynamics,
    pub n_control_steps: usize,
    /// Reduced-order steps per control window.
    pub substeps: usize,
    pub state_dim: usize,
    pub master_seed: u64,
    pub n_episodes: usize,
    /// Seeds of reference episodes dropped because they diverged.
    pub dropped_seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiFidelityDataset {
    pub header: DatasetHeader,
    pub episodes: Vec<DatasetEpisode>,
}

impl MultiFidelityDataset {
    /// Control window owning reduced step `step_idx`.
    pub fn window_of(&self, step_idx: usize) -> usize {
        step_idx / self.header.substeps
    }

    /// Position of the step inside its control window, in [0, 1).
    pub fn phase_of(&self, step_idx: usize) -> f64 {
        (step_idx % self.header.substeps) as f64 / self.header.substeps as f64
    }

    /// Control signal driving reduced step `step_idx` of an episode.
    pub fn signal_for(&self, episode: &DatasetEpisode, step_idx: usize) -> ControlSignal {
        let w = self.window_of(step_idx);
        let a = episode.actions[w];
        ControlSignal::new(a[0], a[1], episode.window_mus[w])
    }

    /// Multistep history entering reduced step `start` of a Burgers
    /// episode: the resolved rhs at the preceding stored state. `None`
    /// at the trajectory head (the solver bootstraps there) and for
    /// single-step dynamics.
    pub fn history_at(&self, episode: &DatasetEpisode, start: usize) -> Option<Vec<f64>> {
        let HybridDynamics::Burgers { params } = &self.header.dynamics else {
            return None;
        };
        if start == 0 {
            return None;
        }
        let profile = episode
            .forcing_profile
            .as_ref()
            .expect("Burgers episodes store a forcing profile");
        let prev = start - 1;
        let signal = self.signal_for(episode, prev);
        let source = crate::envs::butterworth_source(&signal, episode.times[prev]);
        let forcing: Vec<f64> = profile.iter().map(|e| e * source).collect();
        Some(sbe_rhs(
            &episode.trajectory[prev],
            &params.coarse_grid,
            params.nu,
            &forcing,
            None,
        ))
    }

    /// Deterministic episode split: the trailing fraction is held out.
    pub fn split(&self, val_fraction: f64) -> (Vec<usize>, Vec<usize>) {
        let n = self.episodes.len();
        let n_val = ((n as f64 * val_fraction).ceil() as usize).min(n.saturating_sub(1));
        let cut = n - n_val;
        ((0..cut).collect(), (cut..n).collect())
    }

    pub fn validate(&self) -> Result<()> {
        self.header.dynamics.validate()?;
        let want_len = self.header.n_control_steps * self.header.substeps + 1;
        for (i, ep) in self.episodes.iter().enumerate() {
            if ep.trajectory.len() != want_len {
                return Err(Error::invalid(format!(
                    "episode {i}: {} states, expected {want_len}",
                    ep.trajectory.len()
                )));
            }
            if ep.times.len() != ep.trajectory.len() {
                return Err(Error::invalid(format!("episode {i}: time/state length mismatch")));
            }
            if ep.actions.len() != self.header.n_control_steps
                || ep.window_mus.len() != self.header.n_control_steps
            {
                return Err(Error::invalid(format!("episode {i}: wrong action count")));
            }
            for s in &ep.trajectory {
                if s.len() != self.header.state_dim {
                    return Err(Error::invalid(format!("episode {i}: wrong state width")));
                }
            }
        }
        Ok(())
    }
}

fn episode_seed(master_seed: u64, index: usize) -> u64 {
    derive_component_seed(master_seed, &format!("episode-{index}"))
}

fn random_actions<R: Rng>(n: usize, rng: &mut R) -> Vec<[f64; 2]> {
    (0..n)
        .map(|_| {
            [
                rng.gen_range(ACTION_LOW[0]..ACTION_HIGH[0]),
                rng.gen_range(ACTION_LOW[1]..ACTION_HIGH[1]),
            ]
        })
        .collect()
}

/// Window pulse centers exactly as the environment computes them: the
/// recorded window start time plus half the window duration.
fn window_mus(times: &[f64], ticks_per_window: usize, n_windows: usize, duration: f64) -> Vec<f64> {
    (0..n_windows)
        .map(|w| times[w * ticks_per_window] + 0.5 * duration)
        .collect()
}

fn run_srs_episode(cfg: &SrsEnvConfig, seed: u64) -> Result<Option<DatasetEpisode>> {
    let mut env = SrsHfEnv::new(*cfg)?;
    env.reset(seed);
    let mut rng = component_rng(seed, "dataset-actions");
    let actions = random_actions(cfg.n_control_steps, &mut rng);
    for a in &actions {
        let r = env.step(*a);
        if r.diverged {
            return Ok(None);
        }
        if r.done {
            break;
        }
    }
    let record = env.record();
    let duration = cfg.substeps as f64 * cfg.params.dt;
    let mus = window_mus(&record.times, cfg.substeps, cfg.n_control_steps, duration);
    // Reference ticks land on every solver step; the reduced cadence
    // is every second one.
    let times: Vec<f64> = record.times.iter().copied().step_by(2).collect();
    let trajectory: Vec<Vec<f64>> = record.ticks.iter().step_by(2).cloned().collect();
    Ok(Some(DatasetEpisode {
        seed,
        actions: record.actions.clone(),
        window_mus: mus,
        times,
        trajectory,
        forcing_profile: None,
    }))
}

fn run_sbe_episode(cfg: &SbeEnvConfig, seed: u64) -> Result<Option<DatasetEpisode>> {
    let mut env = SbeDnsEnv::new(*cfg)?;
    env.reset(seed);
    let mut rng = component_rng(seed, "dataset-actions");
    let actions = random_actions(cfg.n_control_steps, &mut rng);
    for a in &actions {
        let r = env.step(*a);
        if r.diverged {
            return Ok(None);
        }
        if r.done {
            break;
        }
    }
    let record = env.record();
    let duration = cfg.substeps_fine as f64 * cfg.params.dt;
    let mus = window_mus(
        &record.times,
        cfg.ticks_per_window,
        cfg.n_control_steps,
        duration,
    );
    // Same stream the coarse environment uses at reset, so training
    // and deployment share the profile exactly.
    let mut forcing_rng = component_rng(seed, "sbe-forcing");
    let profile = sample_forcing_profile(
        &cfg.params.coarse_grid,
        cfg.params.d0,
        cfg.params.beta,
        &mut forcing_rng,
    );
    Ok(Some(DatasetEpisode {
        seed,
        actions: record.actions.clone(),
        window_mus: mus,
        times: record.times.clone(),
        trajectory: record.snapshots.clone(),
        forcing_profile: Some(profile),
    }))
}

fn collect_episodes<F>(n_episodes: usize, master_seed: u64, run: F) -> Result<(Vec<DatasetEpisode>, Vec<u64>)>
where
    F: Fn(u64) -> Result<Option<DatasetEpisode>> + Sync,
{
    let max_attempts = 3 * n_episodes;
    let mut episodes = Vec::with_capacity(n_episodes);
    let mut dropped = Vec::new();
    let mut next_index = 0;
    while episodes.len() < n_episodes && next_index < max_attempts {
        let end = (next_index + (n_episodes - episodes.len())).min(max_attempts);
        let seeds: Vec<u64> = (next_index..end).map(|i| episode_seed(master_seed, i)).collect();
        let batch: Vec<Option<DatasetEpisode>> =
            seeds.par_iter().map(|&s| run(s)).collect::<Result<_>>()?;
        for (seed, ep) in seeds.into_iter().zip(batch) {
            match ep {
                Some(ep) => episodes.push(ep),
                None => dropped.push(seed),
            }
        }
        next_index = end;
    }
    if episodes.len() < n_episodes {
        return Err(Error::invalid(format!(
            "only {} of {n_episodes} reference episodes survived after {max_attempts} attempts",
            episodes.len()
        )));
    }
    Ok((episodes, dropped))
}

/// Reference three-wave episodes under uniform random constant-per-
/// window actions, projected to spatial means at the reduced cadence.
pub fn generate_srs_dataset(
    cfg: &SrsEnvConfig,
    n_episodes: usize,
    master_seed: u64,
) -> Result<MultiFidelityDataset> {
    cfg.validate()?;
    if n_episodes == 0 {
        return Err(Error::config("dataset needs at least one episode"));
    }
    if cfg.substeps % 2 != 0 {
        return Err(Error::config(
            "reference substeps must be even to align with the reduced cadence",
        ));
    }
    let (episodes, dropped) = collect_episodes(n_episodes, master_seed, |seed| {
        run_srs_episode(cfg, seed)
    })?;
    let mut params = cfg.params;
    params.dt *= 2.0;
    let dataset = MultiFidelityDataset {
        header: DatasetHeader {
            dynamics: HybridDynamics::ThreeWave {
                params,
                dt: params.dt,
            },
            n_control_steps: cfg.n_control_steps,
            substeps: cfg.substeps / 2,
            state_dim: 6,
            master_seed,
            n_episodes,
            dropped_seeds: dropped,
        },
        episodes,
    };
    dataset.validate()?;
    Ok(dataset)
}

/// Fine-grid Burgers episodes restricted to the coarse grid at the
/// coarse step cadence.
pub fn generate_sbe_dataset(
    cfg: &SbeEnvConfig,
    n_episodes: usize,
    master_seed: u64,
) -> Result<MultiFidelityDataset> {
    cfg.validate()?;
    if n_episodes == 0 {
        return Err(Error::config("dataset needs at least one episode"));
    }
    if cfg.ticks_per_window != cfg.substeps_fine / 2 {
        return Err(Error::config(format!(
            "surrogate datasets need one snapshot per coarse step: set ticks_per_window to {} (substeps_fine / 2), got {}",
            cfg.substeps_fine / 2,
            cfg.ticks_per_window
        )));
    }
    let (episodes, dropped) = collect_episodes(n_episodes, master_seed, |seed| {
        run_sbe_episode(cfg, seed)
    })?;
    let dataset = MultiFidelityDataset {
        header: DatasetHeader {
            dynamics: HybridDynamics::Burgers { params: cfg.params },
            n_control_steps: cfg.n_control_steps,
            substeps: cfg.substeps_fine / 2,
            state_dim: cfg.params.coarse_grid.n_points,
            master_seed,
            n_episodes,
            dropped_seeds: dropped,
        },
        episodes,
    };
    dataset.validate()?;
    Ok(dataset)
}

// ---- on-disk layout ----

const EPISODE_MAGIC: &[u8; 4] = b"MFDS";
const EPISODE_VERSION: u32 = 1;

fn episode_bytes(ep: &DatasetEpisode, state_dim: usize) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(EPISODE_MAGIC);
    buf.extend_from_slice(&EPISODE_VERSION.to_le_bytes());
    buf.extend_from_slice(&ep.seed.to_le_bytes());
    buf.extend_from_slice(&(state_dim as u32).to_le_bytes());
    buf.extend_from_slice(&(ep.trajectory.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(ep.actions.len() as u32).to_le_bytes());
    let profile_len = ep.forcing_profile.as_ref().map_or(0, |p| p.len());
    buf.extend_from_slice(&(profile_len as u32).to_le_bytes());
    for &t in &ep.times {
        buf.extend_from_slice(&t.to_le_bytes());
    }
    for state in &ep.trajectory {
        for &v in state {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    for a in &ep.actions {
        buf.extend_from_slice(&a[0].to_le_bytes());
        buf.extend_from_slice(&a[1].to_le_bytes());
    }
    for &m in &ep.window_mus {
        buf.extend_from_slice(&m.to_le_bytes());
    }
    if let Some(p) = &ep.forcing_profile {
        for &v in p {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    buf
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::invalid("episode file truncated"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(8 * n)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

fn episode_from_bytes(bytes: &[u8]) -> Result<DatasetEpisode> {
    let mut r = ByteReader { bytes, pos: 0 };
    if r.take(4)? != EPISODE_MAGIC {
        return Err(Error::invalid("not an episode file"));
    }
    let version = r.u32()?;
    if version != EPISODE_VERSION {
        return Err(Error::invalid(format!("unsupported episode version {version}")));
    }
    let seed = r.u64()?;
    let state_dim = r.u32()? as usize;
    let n_states = r.u32()? as usize;
    let n_actions = r.u32()? as usize;
    let profile_len = r.u32()? as usize;
    let times = r.f64s(n_states)?;
    let flat = r.f64s(n_states * state_dim)?;
    let trajectory: Vec<Vec<f64>> = flat.chunks_exact(state_dim).map(|c| c.to_vec()).collect();
    let actions: Vec<[f64; 2]> = r
        .f64s(2 * n_actions)?
        .chunks_exact(2)
        .map(|c| [c[0], c[1]])
        .collect();
    let window_mus = r.f64s(n_actions)?;
    let forcing_profile = if profile_len > 0 {
        Some(r.f64s(profile_len)?)
    } else {
        None
    };
    Ok(DatasetEpisode {
        seed,
        actions,
        window_mus,
        times,
        trajectory,
        forcing_profile,
    })
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ManifestEntry {
    file: String,
    seed: u64,
    sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    header: DatasetHeader,
    episodes: Vec<ManifestEntry>,
    /// Digest over the per-episode digests, in order.
    content_hash: String,
}

fn build_manifest(dataset: &MultiFidelityDataset) -> (Manifest, Vec<Vec<u8>>) {
    let mut entries = Vec::new();
    let mut blobs = Vec::new();
    let mut combined = Sha256::new();
    for (i, ep) in dataset.episodes.iter().enumerate() {
        let bytes = episode_bytes(ep, dataset.header.state_dim);
        let digest = sha256_hex(&bytes);
        combined.update(digest.as_bytes());
        entries.push(ManifestEntry {
            file: format!("ep-{i:04}.bin"),
            seed: ep.seed,
            sha256: digest,
        });
        blobs.push(bytes);
    }
    let content_hash: String = combined.finalize().iter().map(|b| format!("{b:02x}")).collect();
    (
        Manifest {
            header: dataset.header.clone(),
            episodes: entries,
            content_hash,
        },
        blobs,
    )
}

/// Content digest of the whole dataset (order-sensitive), identical
/// across runs with the same seeds.
pub fn dataset_hash(dataset: &MultiFidelityDataset) -> String {
    build_manifest(dataset).0.content_hash
}

#[derive(Serialize)]
struct SidecarRef<'a> {
    seed: u64,
    state_dim: usize,
    n_states: usize,
    n_actions: usize,
    has_forcing_profile: bool,
    sha256: &'a str,
}

/// Writes `manifest.json` plus one `.bin`/`.json` pair per episode.
pub fn save_dataset(dir: &Path, dataset: &MultiFidelityDataset) -> Result<()> {
    dataset.validate()?;
    fs::create_dir_all(dir)?;
    let (manifest, blobs) = build_manifest(dataset);
    for ((entry, blob), ep) in manifest.episodes.iter().zip(&blobs).zip(&dataset.episodes) {
        let mut f = fs::File::create(dir.join(&entry.file))?;
        f.write_all(blob)?;
        let sidecar = SidecarRef {
            seed: ep.seed,
            state_dim: dataset.header.state_dim,
            n_states: ep.trajectory.len(),
            n_actions: ep.actions.len(),
            has_forcing_profile: ep.forcing_profile.is_some(),
            sha256: &entry.sha256,
        };
        let json_path = dir.join(entry.file.replace(".bin", ".json"));
        fs::write(json_path, serde_json::to_string_pretty(&sidecar)?)?;
    }
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

/// Reads a dataset written by [`save_dataset`], verifying every
/// episode digest against the manifest.
pub fn load_dataset(dir: &Path) -> Result<MultiFidelityDataset> {
    let manifest_bytes = fs::read(dir.join("manifest.json"))?;
    let manifest: Manifest = serde_json::from_slice(&manifest_bytes)?;
    let mut episodes = Vec::with_capacity(manifest.episodes.len());
    for entry in &manifest.episodes {
        let mut bytes = Vec::new();
        fs::File::open(dir.join(&entry.file))?.read_to_end(&mut bytes)?;
        let digest = sha256_hex(&bytes);
        if digest != entry.sha256 {
            return Err(Error::invalid(format!(
                "episode {} digest mismatch: manifest {} vs file {digest}",
                entry.file, entry.sha256
            )));
        }
        episodes.push(episode_from_bytes(&bytes)?);
    }
    let dataset = MultiFidelityDataset {
        header: manifest.header,
        episodes,
    };
    dataset.validate()?;
    Ok(dataset)
}
