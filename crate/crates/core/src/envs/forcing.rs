//! Stochastic forcing profiles with power-law spatial spectra.

use num_complex::Complex64;
use rand::Rng;

use crate::numerics::{field_from_coeffs, Grid1D};

/// Samples the spatial forcing shape `eta(x)` with deterministic mode
/// amplitudes `|eta_hat(k)|^2 = 2 D0 |k|^beta` for k >= 1 and uniform
/// random phases (Hermitian-paired so the field is real). The k=0 and
/// Nyquist modes are zero, so the profile has zero spatial mean.
///
/// Phases are drawn in ascending-k order: two grids sharing a seed
/// agree on every mode they both resolve, which keeps coarse- and
/// fine-grid runs of the same episode physically consistent.
pub fn sample_forcing_profile<R: Rng>(
    grid: &Grid1D,
    d0: f64,
    beta: f64,
    rng: &mut R,
) -> Vec<f64> {
    assert!(grid.is_spectral(), "forcing needs a power-of-two grid");
    assert!(d0 >= 0.0, "forcing strength must be nonnegative");
    let n = grid.n_points;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for k in 1..n / 2 {
        let amplitude = (2.0 * d0 * (k as f64).powf(beta)).sqrt();
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let c = Complex64::from_polar(amplitude, phase);
        coeffs[k] = c;
        coeffs[n - k] = c.conj();
    }
    field_from_coeffs(&coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::fourier_coeffs;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tau_grid(n: usize) -> Grid1D {
        Grid1D::new(n, std::f64::consts::TAU).unwrap()
    }

    #[test]
    fn amplitude_spectrum_is_exact() {
        let grid = tau_grid(512);
        let (d0, beta) = (1e-6, -0.75);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let eta = sample_forcing_profile(&grid, d0, beta, &mut rng);
        let coeffs = fourier_coeffs(&eta);
        for k in 1..256usize {
            let expect = 2.0 * d0 * (k as f64).powf(beta);
            let got = coeffs[k].norm_sqr();
            assert!(
                (got - expect).abs() <= 1e-12 * expect.max(1e-30),
                "mode {k}: {got} vs {expect}"
            );
        }
        assert!(coeffs[0].norm() < 1e-15);
        assert!(coeffs[256].norm() < 1e-15);
    }

    #[test]
    fn zero_mean() {
        let grid = tau_grid(256);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let eta = sample_forcing_profile(&grid, 1e-6, -0.75, &mut rng);
        let mean = eta.iter().sum::<f64>() / eta.len() as f64;
        assert!(mean.abs() < 1e-15);
    }

    #[test]
    fn seeds_change_phases_not_amplitudes() {
        let grid = tau_grid(128);
        let mut r1 = ChaCha8Rng::seed_from_u64(1);
        let mut r2 = ChaCha8Rng::seed_from_u64(2);
        let e1 = sample_forcing_profile(&grid, 1e-4, -0.75, &mut r1);
        let e2 = sample_forcing_profile(&grid, 1e-4, -0.75, &mut r2);
        assert_ne!(e1, e2);
        let c1 = fourier_coeffs(&e1);
        let c2 = fourier_coeffs(&e2);
        for k in 1..64 {
            assert!((c1[k].norm() - c2[k].norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn coarse_profile_matches_fine_low_modes() {
        let fine = tau_grid(1024);
        let coarse = tau_grid(512);
        let mut rf = ChaCha8Rng::seed_from_u64(9);
        let mut rc = ChaCha8Rng::seed_from_u64(9);
        let ef = sample_forcing_profile(&fine, 1e-6, -0.75, &mut rf);
        let ec = sample_forcing_profile(&coarse, 1e-6, -0.75, &mut rc);
        let cf = fourier_coeffs(&ef);
        let cc = fourier_coeffs(&ec);
        for k in 1..256 {
            assert!(
                (cf[k] - cc[k]).norm() < 1e-14,
                "shared mode {k} disagrees between grids"
            );
        }
    }
}
