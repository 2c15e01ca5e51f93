//! Scalar metrics computed from one-sided spectra.

use serde::{Deserialize, Serialize};

use crate::numerics::{PeakSet, Spectrum};
use crate::{Error, Result};

/// Floor applied to spectral energies before probability normalization.
pub const SPECTRUM_FLOOR: f64 = 1e-12;

/// Peak-based summary of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct SpectralMetrics {
    /// Sum of peak energies.
    pub l1: f64,
    /// Sum of squared peak energies. Always `<= l1^2`.
    pub l2: f64,
    /// Frequency span between the outermost peaks; 0 with fewer than
    /// two peaks.
    pub delta_omega: f64,
}

/// Sums peak energies, squared peak energies and the frequency span of
/// the outermost peaks. An empty peak set yields all zeros.
pub fn spectral_metrics(spectrum: &Spectrum, peaks: &PeakSet) -> SpectralMetrics {
    debug_assert!(peaks.indices.iter().all(|&i| i < spectrum.len()));
    if peaks.is_empty() {
        return SpectralMetrics::default();
    }
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    for &i in &peaks.indices {
        let e = spectrum.energy[i];
        l1 += e;
        l2 += e * e;
    }
    let first = peaks.indices[0];
    let last = peaks.indices[peaks.indices.len() - 1];
    SpectralMetrics {
        l1,
        l2,
        delta_omega: spectrum.frequencies[last] - spectrum.frequencies[first],
    }
}

fn check_bins(reference: &Spectrum, candidate: &Spectrum) -> Result<()> {
    if reference.len() != candidate.len() {
        return Err(Error::ShapeMismatch {
            context: "spectrum bins",
            expected: reference.len(),
            got: candidate.len(),
        });
    }
    for (a, b) in reference.frequencies.iter().zip(&candidate.frequencies) {
        if (a - b).abs() > 1e-9 * a.abs().max(1.0) {
            return Err(Error::invalid(format!(
                "spectra use different frequency bins ({a} vs {b})"
            )));
        }
    }
    Ok(())
}

fn to_probabilities(energy: &[f64]) -> Vec<f64> {
    let floored: Vec<f64> = energy.iter().map(|&e| e.max(SPECTRUM_FLOOR)).collect();
    let total: f64 = floored.iter().sum();
    floored.into_iter().map(|e| e / total).collect()
}

/// Kullback-Leibler divergence between two spectra over identical
/// frequency bins; both are floored at `SPECTRUM_FLOOR` and normalized
/// to probability vectors first. Asymmetric in its arguments.
pub fn kl_spectra(reference: &Spectrum, candidate: &Spectrum) -> Result<f64> {
    check_bins(reference, candidate)?;
    let p = to_probabilities(&reference.energy);
    let q = to_probabilities(&candidate.energy);
    Ok(p.iter()
        .zip(&q)
        .map(|(&pi, &qi)| pi * (pi / qi).ln())
        .sum())
}

/// Mean squared difference of the two energy sequences (linear
/// domain).
pub fn smse(reference: &Spectrum, candidate: &Spectrum) -> Result<f64> {
    check_bins(reference, candidate)?;
    let n = reference.len() as f64;
    Ok(reference
        .energy
        .iter()
        .zip(&candidate.energy)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n)
}

/// Mean squared difference of log10 energies, both floored at
/// `SPECTRUM_FLOOR` first. Used when spectra span many decades.
pub fn smse_log(reference: &Spectrum, candidate: &Spectrum) -> Result<f64> {
    check_bins(reference, candidate)?;
    let n = reference.len() as f64;
    Ok(reference
        .energy
        .iter()
        .zip(&candidate.energy)
        .map(|(&a, &b)| {
            let d = a.max(SPECTRUM_FLOOR).log10() - b.max(SPECTRUM_FLOOR).log10();
            d * d
        })
        .sum::<f64>()
        / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::detect_peaks;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec_of(freqs: Vec<f64>, energy: Vec<f64>) -> Spectrum {
        Spectrum::new(freqs, energy).unwrap()
    }

    #[test]
    fn single_peak_example() {
        // Peak of energy 2 at f=0.9 surrounded by zeros.
        let s = spec_of(vec![0.8, 0.9, 1.0], vec![0.0, 2.0, 0.0]);
        let p = detect_peaks(&s, 0.0);
        let m = spectral_metrics(&s, &p);
        assert_eq!((m.l1, m.l2, m.delta_omega), (2.0, 4.0, 0.0));
    }

    #[test]
    fn two_peak_example() {
        let s = spec_of(
            vec![0.1, 0.2, 0.3, 1.0, 1.1, 1.2],
            vec![0.0, 1.0, 0.0, 0.0, 3.0, 0.0],
        );
        let p = detect_peaks(&s, 0.0);
        assert_eq!(p.indices, vec![1, 4]);
        let m = spectral_metrics(&s, &p);
        assert!((m.l1 - 4.0).abs() < 1e-15);
        assert!((m.l2 - 10.0).abs() < 1e-15);
        assert!((m.delta_omega - 0.9).abs() < 1e-12);
    }

    #[test]
    fn empty_peaks_give_zero_metrics() {
        let s = spec_of(vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 3.0]);
        let m = spectral_metrics(&s, &detect_peaks(&s, 0.0));
        assert_eq!(m, SpectralMetrics::default());
    }

    #[test]
    fn l2_bounded_by_l1_squared_on_random_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..200 {
            let n = rng.gen_range(8..64);
            let energy: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..5.0)).collect();
            let freqs: Vec<f64> = (0..n).map(|k| k as f64 * 0.1).collect();
            let s = spec_of(freqs, energy);
            let m = spectral_metrics(&s, &detect_peaks(&s, 0.0));
            assert!(m.l2 <= m.l1 * m.l1 + 1e-12);
            assert!(m.delta_omega >= 0.0);
        }
    }

    #[test]
    fn kl_of_spectrum_with_itself_is_zero() {
        let s = spec_of(vec![0.0, 1.0, 2.0], vec![0.3, 1.7, 0.0]);
        assert_eq!(kl_spectra(&s, &s).unwrap(), 0.0);
    }

    #[test]
    fn kl_two_bin_closed_form() {
        let r = spec_of(vec![0.0, 1.0], vec![1.0, 0.0]);
        let c = spec_of(vec![0.0, 1.0], vec![0.5, 0.5]);
        // Floored reference (1, 1e-12) normalizes to p; candidate is
        // exactly uniform.
        let z: f64 = 1.0 + 1e-12;
        let p: [f64; 2] = [1.0 / z, 1e-12 / z];
        let expect = p[0] * (p[0] / 0.5).ln() + p[1] * (p[1] / 0.5).ln();
        assert!((kl_spectra(&r, &c).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn kl_nonnegative_and_asymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(4..64);
            let freqs: Vec<f64> = (0..n).map(|k| k as f64).collect();
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..3.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..3.0)).collect();
            let sa = spec_of(freqs.clone(), a);
            let sb = spec_of(freqs, b);
            assert!(kl_spectra(&sa, &sb).unwrap() >= 0.0);
        }
        let r = spec_of(vec![0.0, 1.0], vec![0.9, 0.1]);
        let c = spec_of(vec![0.0, 1.0], vec![0.5, 0.5]);
        let fwd = kl_spectra(&r, &c).unwrap();
        let bwd = kl_spectra(&c, &r).unwrap();
        assert!((fwd - bwd).abs() > 1e-3);
    }

    #[test]
    fn smse_examples_and_symmetry() {
        let f = vec![0.0, 1.0, 2.0, 3.0];
        let a = spec_of(f.clone(), vec![1.0, 2.0, 3.0, 4.0]);
        let b = spec_of(f.clone(), vec![1.5, 2.5, 3.5, 4.5]);
        assert_eq!(smse(&a, &a).unwrap(), 0.0);
        assert!((smse(&a, &b).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(smse(&a, &b).unwrap(), smse(&b, &a).unwrap());

        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..2.0)).collect();
            let y: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..2.0)).collect();
            let brute: f64 =
                x.iter().zip(&y).map(|(u, v)| (u - v) * (u - v)).sum::<f64>() / 4.0;
            let sx = spec_of(f.clone(), x);
            let sy = spec_of(f.clone(), y);
            assert!((smse(&sx, &sy).unwrap() - brute).abs() < 1e-15);
        }
    }

    #[test]
    fn bin_mismatch_is_an_error() {
        let a = spec_of(vec![0.0, 1.0], vec![1.0, 1.0]);
        let b = spec_of(vec![0.0, 1.0, 2.0], vec![1.0, 1.0, 1.0]);
        assert!(kl_spectra(&a, &b).is_err());
        assert!(smse(&a, &b).is_err());
        let c = spec_of(vec![0.0, 1.5], vec![1.0, 1.0]);
        assert!(kl_spectra(&a, &c).is_err());
    }

    #[test]
    fn smse_log_floors_empty_bins() {
        let f = vec![0.0, 1.0];
        let a = spec_of(f.clone(), vec![1.0, 0.0]);
        let b = spec_of(f, vec![1.0, 0.0]);
        assert_eq!(smse_log(&a, &b).unwrap(), 0.0);
    }
}
