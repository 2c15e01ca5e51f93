//! Spectrum-based rewards and policy-evaluation metrics.

pub mod metrics;
pub mod rewards;

pub use metrics::{
    kl_spectra, smse, smse_log, spectral_metrics, SpectralMetrics, SPECTRUM_FLOOR,
};
pub use rewards::{
    sbe_reward, srs_reward, srs_signal, SbeReward, SbeRewardCfg, SignalSource, SrsReward,
    SrsRewardCfg,
};
