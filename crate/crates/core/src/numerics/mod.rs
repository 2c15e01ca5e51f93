//! Shared numerical kernels.
//!
//! Grids, explicit time integrators, Fourier-based spatial operators,
//! Welch power spectra, peak detection and moment statistics. Everything
//! here is a pure function over owned data: no globals, no interior
//! mutability, safe to call from parallel workers.

mod fft;
mod grid;
mod integrate;
mod peaks;
mod spectral;
mod spectrum;
mod stats;
mod welch;

pub use fft::{fft_forward, fft_inverse, field_from_coeffs, fourier_coeffs, signed_mode};
pub use grid::Grid1D;
pub use integrate::{ab2_step, rk4_step, StateVector};
pub use peaks::{detect_peaks, PeakSet};
pub use spectral::{
    central_diff_periodic, lowpass_filter, restrict_to_grid, spatial_psd, spectral_derivative,
};
pub use spectrum::Spectrum;
pub use stats::{moments, Moments};
pub use welch::welch_psd;
