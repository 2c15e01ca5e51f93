//! Spatial operators: finite differences, Fourier derivatives, sharp
//! spectral filters and spatial energy spectra.

use num_complex::Complex64;

use super::fft::{fft_forward, fft_inverse, fourier_coeffs, signed_mode};
use super::grid::Grid1D;
use super::spectrum::Spectrum;
use crate::{Error, Result};

/// Second-order central difference with periodic wraparound.
pub fn central_diff_periodic(field: &[Complex64], grid: &Grid1D) -> Vec<Complex64> {
    let n = grid.n_points;
    assert_eq!(field.len(), n, "field length must match grid");
    let inv2h = 1.0 / (2.0 * grid.spacing());
    (0..n)
        .map(|i| (field[(i + 1) % n] - field[(i + n - 1) % n]) * inv2h)
        .collect()
}

/// Fourier collocation derivative of the given order (1 or 2).
///
/// The Nyquist mode is zeroed for odd orders; it carries no usable sign
/// information there and would otherwise leave a spurious imaginary
/// component.
pub fn spectral_derivative(field: &[f64], grid: &Grid1D, order: u32) -> Vec<f64> {
    let n = grid.n_points;
    assert_eq!(field.len(), n, "field length must match grid");
    assert!(grid.is_spectral(), "spectral ops need a power-of-two grid");
    assert!(order == 1 || order == 2, "order must be 1 or 2");

    let mut buf: Vec<Complex64> = field.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_forward(&mut buf);
    let base = std::f64::consts::TAU / grid.length;
    for (m, c) in buf.iter_mut().enumerate() {
        let s = signed_mode(m, n);
        if order % 2 == 1 && s == (n / 2) as i64 {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        let ik = Complex64::new(0.0, base * s as f64);
        *c *= ik.powu(order);
    }
    fft_inverse(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

/// Sharp spectral truncation: zeroes all Fourier modes with
/// `|mode| > cutoff_mode`. The spatial mean (mode 0) always survives.
pub fn lowpass_filter(field: &[f64], cutoff_mode: usize) -> Vec<f64> {
    let n = field.len();
    assert!(
        cutoff_mode < n / 2,
        "cutoff {cutoff_mode} must be below Nyquist {}",
        n / 2
    );
    let mut buf: Vec<Complex64> = field.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_forward(&mut buf);
    for (m, c) in buf.iter_mut().enumerate() {
        if signed_mode(m, n).unsigned_abs() > cutoff_mode as u64 {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    fft_inverse(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

/// Projects a fine-grid field onto a coarse grid: sharp truncation at
/// the coarse Nyquist mode followed by subsampling.
pub fn restrict_to_grid(field: &[f64], coarse: &Grid1D) -> Result<Vec<f64>> {
    let fine_n = field.len();
    let coarse_n = coarse.n_points;
    if coarse_n == 0 || fine_n % coarse_n != 0 {
        return Err(Error::invalid(format!(
            "fine size {fine_n} is not a multiple of coarse size {coarse_n}"
        )));
    }
    let ratio = fine_n / coarse_n;
    if ratio == 1 {
        return Ok(field.to_vec());
    }
    let cutoff = coarse_n / 2;
    let mut buf: Vec<Complex64> = field.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_forward(&mut buf);
    for (m, c) in buf.iter_mut().enumerate() {
        if signed_mode(m, fine_n).unsigned_abs() > cutoff as u64 {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    fft_inverse(&mut buf);
    Ok((0..coarse_n).map(|j| buf[j * ratio].re).collect())
}

/// Spatial energy spectrum of the fluctuation `u' = u - mean(u)`.
///
/// Bins are the angular wavenumbers `2*pi*k/L` for `k = 1..n/2`, and the
/// normalization is fixed so that `sum_k E(k)` equals the spatial mean
/// of `u'^2 / 2` (the mean fluctuation kinetic energy).
pub fn spatial_psd(field: &[f64], grid: &Grid1D) -> Spectrum {
    let n = grid.n_points;
    assert_eq!(field.len(), n, "field length must match grid");
    assert!(grid.is_spectral(), "spectral ops need a power-of-two grid");

    let mean = field.iter().sum::<f64>() / n as f64;
    let fluct: Vec<f64> = field.iter().map(|&x| x - mean).collect();
    let coeffs = fourier_coeffs(&fluct);

    let base = std::f64::consts::TAU / grid.length;
    let half = n / 2;
    let mut freqs = Vec::with_capacity(half);
    let mut energy = Vec::with_capacity(half);
    for k in 1..=half {
        // +k and -k bins carry equal power for a real field; the
        // Nyquist bin is its own conjugate pair.
        let e = if k < half {
            coeffs[k].norm_sqr()
        } else {
            0.5 * coeffs[k].norm_sqr()
        };
        freqs.push(base * k as f64);
        energy.push(e);
    }
    Spectrum {
        frequencies: freqs,
        energy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn tau_grid(n: usize) -> Grid1D {
        Grid1D::new(n, TAU).unwrap()
    }

    fn sampled(n: usize, l: f64, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..n).map(|j| f(l * j as f64 / n as f64)).collect()
    }

    #[test]
    fn central_diff_constant_is_zero() {
        let g = Grid1D::new(100, 10.0).unwrap();
        let field = vec![Complex64::new(3.5, -1.0); 100];
        for d in central_diff_periodic(&field, &g) {
            assert_eq!(d, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn central_diff_single_mode_taylor_bound() {
        let g = Grid1D::new(100, 10.0).unwrap();
        let k = TAU / g.length;
        let field: Vec<Complex64> = g
            .points()
            .iter()
            .map(|&x| (Complex64::new(0.0, k * x)).exp())
            .collect();
        let deriv = central_diff_periodic(&field, &g);
        // (sin(kh)/h) replaces k, so the relative error is <= (kh)^2/6.
        let bound = (k * g.spacing()).powi(2) / 6.0;
        for (d, f) in deriv.iter().zip(&field) {
            let exact = Complex64::new(0.0, k) * f;
            assert!((d - exact).norm() / exact.norm() <= bound * 1.0001);
        }
    }

    #[test]
    fn central_diff_wraparound() {
        // Linear-in-index data: interior slope exact, the two boundary
        // points see the periodic jump.
        let g = Grid1D::new(8, 8.0).unwrap();
        let field: Vec<Complex64> = (0..8).map(|j| Complex64::new(j as f64, 0.0)).collect();
        let d = central_diff_periodic(&field, &g);
        for i in 1..7 {
            assert!((d[i].re - 1.0).abs() < 1e-14);
        }
        assert!((d[0].re - (1.0 - 7.0) / 2.0).abs() < 1e-14);
        assert!((d[7].re - (0.0 - 6.0) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn spectral_derivative_first_order_exact() {
        let g = tau_grid(64);
        let f = sampled(64, TAU, |x| (3.0 * x).sin());
        let d = spectral_derivative(&f, &g, 1);
        let exact = sampled(64, TAU, |x| 3.0 * (3.0 * x).cos());
        for (a, b) in d.iter().zip(&exact) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn spectral_derivative_second_order_exact() {
        let g = tau_grid(64);
        let f = sampled(64, TAU, |x| (3.0 * x).sin());
        let d = spectral_derivative(&f, &g, 2);
        for (a, b) in d.iter().zip(&f) {
            assert!((a + 9.0 * b).abs() <= 1e-9);
        }
    }

    #[test]
    fn spectral_derivative_constant_is_zero() {
        let g = tau_grid(32);
        for order in [1, 2] {
            for v in spectral_derivative(&vec![4.2; 32], &g, order) {
                assert!(v.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spectral_derivative_noninteger_length() {
        // Wavenumbers scale with 2*pi/L.
        let n = 128;
        let l = 10.0;
        let g = Grid1D::new(n, l).unwrap();
        let k = 2.0 * TAU / l; // mode 2
        let f = sampled(n, l, |x| (k * x).cos());
        let d = spectral_derivative(&f, &g, 1);
        let exact = sampled(n, l, |x| -k * (k * x).sin());
        for (a, b) in d.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn lowpass_is_idempotent_and_mean_preserving() {
        let n = 256;
        let f = sampled(n, TAU, |x| 1.7 + (3.0 * x).sin() + 0.25 * (10.0 * x).cos());
        let once = lowpass_filter(&f, 16);
        let twice = lowpass_filter(&once, 16);
        for (a, b) in once.iter().zip(&twice) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in f.iter().zip(&once) {
            assert!((a - b).abs() < 1e-12); // already band-limited
        }
        let mean_in = f.iter().sum::<f64>() / n as f64;
        let heavy = lowpass_filter(&f, 5);
        let mean_out = heavy.iter().sum::<f64>() / n as f64;
        assert!((mean_in - mean_out).abs() < 1e-12);
    }

    #[test]
    fn lowpass_kills_mode_above_cutoff() {
        let n = 128;
        let f = sampled(n, TAU, |x| (9.0 * x).sin());
        for v in lowpass_filter(&f, 8) {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn lowpass_reduces_noise_variance() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let f: Vec<f64> = (0..512).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let var = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
        };
        let filtered = lowpass_filter(&f, 32);
        assert!(var(&filtered) < var(&f));
    }

    #[test]
    fn restrict_mode3_sine() {
        let coarse = tau_grid(512);
        let fine = sampled(1024, TAU, |x| (3.0 * x).sin());
        let out = restrict_to_grid(&fine, &coarse).unwrap();
        let expect = sampled(512, TAU, |x| (3.0 * x).sin());
        for (a, b) in out.iter().zip(&expect) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn restrict_drops_modes_above_coarse_nyquist() {
        let coarse = tau_grid(512);
        let low = sampled(1024, TAU, |x| 0.5 * (2.0 * x).cos());
        let fine: Vec<f64> = low
            .iter()
            .enumerate()
            .map(|(j, &v)| v + (400.0 * TAU * j as f64 / 1024.0).sin())
            .collect();
        let out = restrict_to_grid(&fine, &coarse).unwrap();
        let expect = sampled(512, TAU, |x| 0.5 * (2.0 * x).cos());
        for (a, b) in out.iter().zip(&expect) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn restrict_constant_and_errors() {
        let coarse = tau_grid(8);
        let out = restrict_to_grid(&[2.5; 32], &coarse).unwrap();
        assert!(out.iter().all(|&v| (v - 2.5).abs() < 1e-13));
        assert!(restrict_to_grid(&[0.0; 30], &coarse).is_err());
    }

    #[test]
    fn spatial_psd_single_mode() {
        let g = tau_grid(256);
        let f = sampled(256, TAU, |x| 2.0 * (7.0 * x).sin());
        let s = spatial_psd(&f, &g);
        let total: f64 = s.energy.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // All of it in bin k=7 (frequency index 6 since bins start at 1).
        assert!((s.energy[6] - 1.0).abs() < 1e-12);
        assert!((s.frequencies[6] - 7.0).abs() < 1e-12);
    }

    #[test]
    fn spatial_psd_matches_fluctuation_energy() {
        let g = tau_grid(128);
        let f = sampled(128, TAU, |x| {
            3.0 + (2.0 * x).sin() - 0.4 * (11.0 * x).cos() + 0.01 * (63.0 * x).sin()
        });
        let s = spatial_psd(&f, &g);
        let mean = f.iter().sum::<f64>() / f.len() as f64;
        let ke = f.iter().map(|&u| 0.5 * (u - mean).powi(2)).sum::<f64>() / f.len() as f64;
        let total: f64 = s.energy.iter().sum();
        assert!((total - ke).abs() < 1e-12 * ke.max(1.0));
    }

    #[test]
    fn spatial_psd_constant_is_zero() {
        let g = tau_grid(64);
        let s = spatial_psd(&[1.23; 64], &g);
        assert!(s.energy.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn spatial_psd_two_equal_modes() {
        let g = tau_grid(128);
        let f = sampled(128, TAU, |x| (4.0 * x).sin() + (9.0 * x).cos());
        let s = spatial_psd(&f, &g);
        assert!((s.energy[3] - s.energy[8]).abs() < 1e-13);
    }
}
