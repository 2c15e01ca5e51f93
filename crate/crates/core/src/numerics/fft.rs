//! Thin FFT wrappers with a per-thread plan cache.
//!
//! Conventions used throughout the crate: the forward transform is the
//! plain unnormalized DFT sum, the inverse carries the 1/n factor, so
//! `fourier_coeffs` returns the coefficients `c_m` of
//! `sum_m c_m * exp(i * 2*pi*m*x / L)` directly.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// In-place unnormalized forward DFT.
pub fn fft_forward(buf: &mut [Complex64]) {
    plan(buf.len(), false).process(buf);
}

/// In-place inverse DFT including the 1/n normalization.
pub fn fft_inverse(buf: &mut [Complex64]) {
    plan(buf.len(), true).process(buf);
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Fourier coefficients of a real field: `FFT(field) / n`.
pub fn fourier_coeffs(field: &[f64]) -> Vec<Complex64> {
    let n = field.len();
    let mut buf: Vec<Complex64> = field.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_forward(&mut buf);
    let scale = 1.0 / n as f64;
    for c in buf.iter_mut() {
        *c *= scale;
    }
    buf
}

/// Real field with the given Fourier coefficients:
/// `field_j = sum_m c_m exp(i 2 pi m j / n)` (the imaginary residue of
/// non-Hermitian inputs is discarded).
pub fn field_from_coeffs(coeffs: &[Complex64]) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    plan(buf.len(), true).process(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

/// Signed mode number for DFT bin `m` of an `n`-point transform, with
/// the Nyquist bin mapped to `+n/2`.
pub fn signed_mode(m: usize, n: usize) -> i64 {
    if m <= n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}
