//! Controlled dynamical systems: the three-wave coupling model and the
//! stochastic Burgers model, each at reference and reduced fidelity,
//! plus the shared control-signal and observation plumbing.

pub mod action;
pub mod env;
pub mod forcing;
pub mod obs;
pub mod sbe;
pub mod srs;
pub mod toy;

pub use action::{butterworth_source, clip_action, ControlSignal, ACTION_HIGH, ACTION_LOW};
pub use env::{
    srs_means_from_tick, ControlEnv, EpisodeMeta, EpisodeRecord, SbeDlesEnv, SbeDnsEnv,
    SbeEnvConfig, SrsEnvConfig, SrsHfEnv, SrsLfEnv, StepResult, DIVERGENCE_PENALTY,
    DIVERGENCE_THRESHOLD,
};
pub use forcing::sample_forcing_profile;
pub use obs::{build_observation, observation_dim, ObsMode};
pub use sbe::{
    sample_sbe_ic, sbe_advance, sbe_dles_step, sbe_dns_step, sbe_rhs, SbeParams, SbeState,
};
pub use srs::{
    sample_srs_ic, srs_hf_step, srs_lf_rhs, srs_lf_step, srs_rhs, SrsMeans, SrsParams, SrsState,
};
pub use toy::ToyEnv;
