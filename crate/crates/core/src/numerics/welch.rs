//! Welch power spectral density estimation.

use num_complex::Complex64;

use super::fft::fft_forward;
use super::spectrum::Spectrum;
use crate::{Error, Result};

/// Welch PSD: Hann-windowed overlapping segments, each detrended by its
/// own mean, periodograms averaged into a one-sided spectrum.
///
/// Normalization is density-style: `sum(PSD) * df` estimates the signal
/// variance (Parseval). `sample_spacing` is the time between samples.
pub fn welch_psd(
    signal: &[f64],
    segment_length: usize,
    overlap_fraction: f64,
    sample_spacing: f64,
) -> Result<Spectrum> {
    if segment_length < 4 {
        return Err(Error::invalid(format!(
            "segment_length must be at least 4, got {segment_length}"
        )));
    }
    if signal.len() < segment_length {
        return Err(Error::invalid(format!(
            "signal length {} shorter than segment_length {segment_length}",
            signal.len()
        )));
    }
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(Error::invalid(format!(
            "overlap_fraction must be in [0, 1), got {overlap_fraction}"
        )));
    }
    if !(sample_spacing > 0.0 && sample_spacing.is_finite()) {
        return Err(Error::invalid(format!(
            "sample_spacing must be positive, got {sample_spacing}"
        )));
    }

    let nseg = segment_length;
    let hop = ((nseg as f64) * (1.0 - overlap_fraction)).round().max(1.0) as usize;
    // Periodic Hann window.
    let window: Vec<f64> = (0..nseg)
        .map(|j| 0.5 * (1.0 - (std::f64::consts::TAU * j as f64 / nseg as f64).cos()))
        .collect();
    let win_power: f64 = window.iter().map(|w| w * w).sum();

    let n_bins = nseg / 2 + 1;
    let mut psd = vec![0.0; n_bins];
    let mut n_segments = 0usize;
    let mut start = 0usize;
    while start + nseg <= signal.len() {
        let seg = &signal[start..start + nseg];
        let mean = seg.iter().sum::<f64>() / nseg as f64;
        let mut buf: Vec<Complex64> = seg
            .iter()
            .zip(&window)
            .map(|(&x, &w)| Complex64::new((x - mean) * w, 0.0))
            .collect();
        fft_forward(&mut buf);
        for (k, p) in psd.iter_mut().enumerate() {
            *p += buf[k].norm_sqr();
        }
        n_segments += 1;
        start += hop;
    }

    // |X_k|^2 * dt / sum(w^2), doubled for the interior one-sided bins.
    let scale = sample_spacing / (win_power * n_segments as f64);
    let fs = 1.0 / sample_spacing;
    let mut freqs = Vec::with_capacity(n_bins);
    let mut energy = Vec::with_capacity(n_bins);
    for (k, p) in psd.iter().enumerate() {
        let interior = k != 0 && !(nseg % 2 == 0 && k == nseg / 2);
        let factor = if interior { 2.0 } else { 1.0 };
        freqs.push(k as f64 * fs / nseg as f64);
        energy.push(p * scale * factor);
    }
    Spectrum::new(freqs, energy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinusoid_peak_and_parseval() {
        // Frequency on a bin center so Hann leakage stays local.
        let n = 4096;
        let dt = 0.01;
        let seg = 256;
        let amp = 1.3;
        let freq = 20.0 / (seg as f64 * dt); // bin 20
        let signal: Vec<f64> = (0..n)
            .map(|j| amp * (std::f64::consts::TAU * freq * dt * j as f64).sin())
            .collect();
        let s = welch_psd(&signal, seg, 0.5, dt).unwrap();

        let peak_bin = s
            .energy
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!((s.frequencies[peak_bin] - freq).abs() < 1e-9);

        let variance = amp * amp / 2.0;
        assert!(
            (s.integrated() - variance).abs() <= 0.02 * variance,
            "integrated {} vs variance {}",
            s.integrated(),
            variance
        );
    }

    #[test]
    fn zero_signal_zero_psd() {
        let s = welch_psd(&vec![0.0; 512], 128, 0.5, 1.0).unwrap();
        assert!(s.energy.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn white_noise_variance() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let sigma = 0.7;
        let normal = Normal::new(0.0, sigma).unwrap();
        let mut ratios = Vec::new();
        for seed in 0..10u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let signal: Vec<f64> = (0..16384).map(|_| normal.sample(&mut rng)).collect();
            let s = welch_psd(&signal, 256, 0.5, 0.5).unwrap();
            ratios.push(s.integrated() / (sigma * sigma));
        }
        let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!(
            (mean_ratio - 1.0).abs() <= 0.05,
            "mean integrated/variance ratio {mean_ratio}"
        );
    }

    #[test]
    fn short_signal_rejected() {
        assert!(welch_psd(&[0.0; 10], 16, 0.5, 1.0).is_err());
        assert!(welch_psd(&[0.0; 10], 2, 0.5, 1.0).is_err());
        assert!(welch_psd(&[0.0; 64], 16, 1.0, 1.0).is_err());
        assert!(welch_psd(&[0.0; 64], 16, 0.5, 0.0).is_err());
    }

    #[test]
    fn deterministic() {
        let signal: Vec<f64> = (0..1000).map(|j| ((j * j) as f64 * 0.01).sin()).collect();
        let a = welch_psd(&signal, 250, 0.5, 0.002).unwrap();
        let b = welch_psd(&signal, 250, 0.5, 0.002).unwrap();
        assert_eq!(a, b);
    }
}
