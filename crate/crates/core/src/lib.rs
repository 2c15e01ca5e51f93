//! Multi-fidelity control toolkit for unstable 1-D physical systems.
//!
//! The crate bundles everything needed to learn pulse-shaping control
//! policies on cheap surrogate environments and evaluate them against
//! expensive reference solvers:
//!
//! - [`numerics`]: grids, integrators, spectral operators, Welch PSD,
//!   peak detection and moment statistics shared by everything else.
//! - [`envs`]: the physics environments (three-wave coupling PDE/ODE,
//!   stochastic Burgers DNS/LES) behind one step/reset interface.
//! - [`nn`]: a small dense-network stack (sine/relu/tanh MLPs) with
//!   reverse-mode gradients, Adam, weight averaging and checkpoints.
//! - [`hybrid`]: the predictor-corrector surrogate (low-fidelity step
//!   plus learned correction), dataset generation and windowed training.
//! - [`rl`]: twin-critic delayed deterministic policy gradient with a
//!   replay buffer and weight-averaged evaluation policies.
//! - [`rewards_eval`]: spectrum-based rewards and evaluation metrics.
//! - [`config`] / [`cli`]: experiment configuration and the pipeline
//!   commands (`simulate`, `gen-data`, `train-hybrid`, `train-rl`,
//!   `evaluate`).
//!
//! All floating-point work is `f64` and every random draw goes through
//! named, explicitly seeded streams so reruns are bit-reproducible.

pub mod cli;
pub mod config;
pub mod envs;
pub mod error;
pub mod hybrid;
pub mod nn;
pub mod numerics;
pub mod rewards_eval;
pub mod rl;

pub use error::Error;

/// Crate version embedded in every output artifact.
pub const BUILD_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
