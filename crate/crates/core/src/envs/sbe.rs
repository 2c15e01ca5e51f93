//! Stochastic Burgers system: fully resolved reference solver on the
//! fine grid and the coarse-grid solver used bare (no closure) or with
//! a learned subgrid term.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::action::{butterworth_source, ControlSignal};
use crate::numerics::{
    ab2_step, field_from_coeffs, rk4_step, spectral_derivative, Grid1D,
};
use crate::{Error, Result};

/// Physical and numerical parameters of the Burgers system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbeParams {
    /// Viscosity.
    pub nu: f64,
    /// Forcing strength in `|eta_hat(k)|^2 = 2 D0 |k|^beta`.
    pub d0: f64,
    /// Forcing spectral slope.
    pub beta: f64,
    /// Fine-grid time step; the coarse solver uses `dt * (fine/coarse)`
    /// so both cover the same physical horizon per control step.
    pub dt: f64,
    pub fine_grid: Grid1D,
    pub coarse_grid: Grid1D,
}

impl Default for SbeParams {
    fn default() -> Self {
        let tau = std::f64::consts::TAU;
        SbeParams {
            nu: 2e-3,
            d0: 1e-6,
            beta: -0.75,
            dt: 1e-4,
            fine_grid: Grid1D::new(1024, tau).expect("static grid"),
            coarse_grid: Grid1D::new(512, tau).expect("static grid"),
        }
    }
}

impl SbeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) {
            return Err(Error::config(format!("sbe.nu must be positive, got {}", self.nu)));
        }
        if !(self.dt > 0.0) {
            return Err(Error::config(format!("sbe.dt must be positive, got {}", self.dt)));
        }
        if self.fine_grid.n_points != 2 * self.coarse_grid.n_points {
            return Err(Error::config(format!(
                "fine grid ({}) must be exactly twice the coarse grid ({})",
                self.fine_grid.n_points, self.coarse_grid.n_points
            )));
        }
        if !self.fine_grid.is_spectral() || !self.coarse_grid.is_spectral() {
            return Err(Error::config("sbe grids must be powers of two"));
        }
        if (self.fine_grid.length - self.coarse_grid.length).abs() > 1e-12 {
            return Err(Error::config("sbe grids must share the domain length"));
        }
        Ok(())
    }

    /// Grid ratio (always 2 after validation).
    pub fn grid_ratio(&self) -> usize {
        self.fine_grid.n_points / self.coarse_grid.n_points
    }

    /// Coarse-solver step size.
    pub fn coarse_dt(&self) -> f64 {
        self.dt * self.grid_ratio() as f64
    }
}

/// Solver state on either grid. `rhs_prev` is the Adams-Bashforth
/// history slope; `None` right after reset (the next step bootstraps
/// with RK4).
#[derive(Debug, Clone, PartialEq)]
pub struct SbeState {
    pub u: Vec<f64>,
    pub t: f64,
    pub rhs_prev: Option<Vec<f64>>,
    pub forcing_profile: Vec<f64>,
}

impl SbeState {
    pub fn max_abs(&self) -> f64 {
        self.u.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().all(|v| v.is_finite())
    }
}

/// Right-hand side in conservative form:
/// `-d/dx(u^2/2) + nu d^2u/dx^2 + forcing (+ sgs)`.
pub fn sbe_rhs(u: &[f64], grid: &Grid1D, nu: f64, forcing: &[f64], sgs: Option<&[f64]>) -> Vec<f64> {
    debug_assert_eq!(u.len(), grid.n_points);
    debug_assert_eq!(forcing.len(), u.len());
    let half_sq: Vec<f64> = u.iter().map(|&v| 0.5 * v * v).collect();
    let flux = spectral_derivative(&half_sq, grid, 1);
    let diff = spectral_derivative(u, grid, 2);
    let mut rhs: Vec<f64> = (0..u.len())
        .map(|i| -flux[i] + nu * diff[i] + forcing[i])
        .collect();
    if let Some(s) = sgs {
        debug_assert_eq!(s.len(), u.len());
        for (r, v) in rhs.iter_mut().zip(s) {
            *r += v;
        }
    }
    rhs
}

/// Advances one Adams-Bashforth step (RK4 on the first step after
/// reset), holding the forcing and subgrid term frozen over the step.
/// Returns the updated state with refreshed history.
pub fn sbe_advance(
    state: &SbeState,
    grid: &Grid1D,
    nu: f64,
    dt: f64,
    source_value: f64,
    sgs: Option<&[f64]>,
) -> SbeState {
    let forcing: Vec<f64> = state
        .forcing_profile
        .iter()
        .map(|&e| e * source_value)
        .collect();
    let f_now = sbe_rhs(&state.u, grid, nu, &forcing, sgs);
    let u_next = match &state.rhs_prev {
        Some(f_prev) => ab2_step(&state.u, &f_now, f_prev, dt),
        None => rk4_step(&state.u, state.t, dt, |u, _| {
            sbe_rhs(u, grid, nu, &forcing, sgs)
        }),
    };
    SbeState {
        u: u_next,
        t: state.t + dt,
        rhs_prev: Some(f_now),
        forcing_profile: state.forcing_profile.clone(),
    }
}

/// One fine-grid reference step: forcing `eta(x) * S0(a, t)` with the
/// pulse evaluated at the step-start time.
pub fn sbe_dns_step(state: &SbeState, action: &ControlSignal, params: &SbeParams) -> SbeState {
    let s0 = butterworth_source(action, state.t);
    sbe_advance(state, &params.fine_grid, params.nu, params.dt, s0, None)
}

/// One coarse-grid step without any closure. Prone to blow-up in long
/// forced runs; divergence is detected by the environment wrapper, not
/// here.
pub fn sbe_dles_step(state: &SbeState, action: &ControlSignal, params: &SbeParams) -> SbeState {
    let s0 = butterworth_source(action, state.t);
    sbe_advance(
        state,
        &params.coarse_grid,
        params.nu,
        params.coarse_dt(),
        s0,
        None,
    )
}

/// Initial-condition family: random-phase field with energy spectrum
/// `E(k) proportional to k^-2` over modes `k_lo..=k_hi`, scaled so the
/// fluctuation kinetic energy `mean(u^2/2)` is `energy`.
pub fn sample_sbe_ic<R: Rng>(
    grid: &Grid1D,
    k_lo: usize,
    k_hi: usize,
    energy: f64,
    rng: &mut R,
) -> Vec<f64> {
    assert!(k_lo >= 1 && k_hi >= k_lo && k_hi < grid.n_points / 2);
    let n = grid.n_points;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    let norm_sq: f64 = (k_lo..=k_hi).map(|k| (k as f64).powi(-2)).sum();
    let scale = (energy / norm_sq).sqrt();
    for k in k_lo..=k_hi {
        let amp = scale / k as f64;
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let c = Complex64::from_polar(amp, phase);
        coeffs[k] = c;
        coeffs[n - k] = c.conj();
    }
    field_from_coeffs(&coeffs)
}
