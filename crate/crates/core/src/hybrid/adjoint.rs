//! Reverse-mode derivatives of the reduced-order steppers.
//!
//! Gradients of complex quantities use the real-pair convention: the
//! cotangent of `z` is `dL/d(Re z) + i dL/d(Im z)`. Under it the
//! product rule for `c = a * b` reads `g_a += conj(b) * g_c`, and
//! `c = conj(a)` gives `g_a += conj(g_c)`; every rule below composes
//! from those two.

use num_complex::Complex64;

use crate::envs::{butterworth_source, srs_lf_rhs, ControlSignal, SrsMeans, SrsParams};
use crate::numerics::{spectral_derivative, Grid1D};

fn axpy3(acc: &mut SrsMeans, c: f64, v: &SrsMeans) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += c * b;
    }
}

fn scale3(v: &SrsMeans, c: f64) -> SrsMeans {
    [c * v[0], c * v[1], c * v[2]]
}

fn add3(a: &SrsMeans, b: &SrsMeans) -> SrsMeans {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub const ZERO_MEANS: SrsMeans = [Complex64::new(0.0, 0.0); 3];

/// Cotangent of the mean three-wave rhs with respect to the state. The
/// source term is state-independent and drops out.
pub fn srs_lf_rhs_vjp(u: &SrsMeans, params: &SrsParams, g: &SrsMeans) -> SrsMeans {
    let b2 = params.beta0 * params.beta0;
    let (u0, u1, u2) = (u[0], u[1], u[2]);
    let (g0, g1, g2) = (g[0], g[1], g[2]);
    let mut gu0 = Complex64::new(0.0, 0.0);
    let mut gu1 = Complex64::new(0.0, 0.0);
    let mut gu2 = Complex64::new(0.0, 0.0);

    // r0 = -u1 u2 + s
    gu1 += -u2.conj() * g0;
    gu2 += -u1.conj() * g0;

    // r1 = u0 conj(u2)
    gu0 += u2 * g1;
    gu2 += u0 * g1.conj();

    // r2 = b2 u0 conj(u1) + i sigma |u2|^2 u2 - nu u2
    gu0 += b2 * u1 * g2;
    gu1 += b2 * u0 * g2.conj();
    let s2 = u2 * u2.conj();
    let gw = Complex64::new(0.0, -params.sigma) * g2;
    let gs2 = u2.conj() * gw;
    gu2 += s2.conj() * gw + u2 * gs2 + u2 * gs2.conj();
    gu2 += -params.nu * g2;

    [gu0, gu1, gu2]
}

/// Stage states of one Runge-Kutta step of the mean three-wave ODE,
/// recorded for the backward pass.
#[derive(Debug, Clone)]
pub struct SrsStepTape {
    pub u: SrsMeans,
    /// Stage entry states a2, a3, a4 (a1 is `u`).
    pub stages: [SrsMeans; 3],
    pub source: f64,
}

/// Forward step mirroring the production stepper's arithmetic exactly
/// (same operations in the same order), returning the tape.
pub fn srs_lf_step_tape(
    u: &SrsMeans,
    t: f64,
    dt: f64,
    signal: &ControlSignal,
    params: &SrsParams,
) -> (SrsMeans, SrsStepTape) {
    let source = butterworth_source(signal, t);
    let k1 = srs_lf_rhs(u, params, source, &ZERO_MEANS);
    let mut a2 = *u;
    axpy3(&mut a2, 0.5 * dt, &k1);
    let k2 = srs_lf_rhs(&a2, params, source, &ZERO_MEANS);
    let mut a3 = *u;
    axpy3(&mut a3, 0.5 * dt, &k2);
    let k3 = srs_lf_rhs(&a3, params, source, &ZERO_MEANS);
    let mut a4 = *u;
    axpy3(&mut a4, dt, &k3);
    let k4 = srs_lf_rhs(&a4, params, source, &ZERO_MEANS);

    let mut next = *u;
    axpy3(&mut next, dt / 6.0, &k1);
    axpy3(&mut next, dt / 3.0, &k2);
    axpy3(&mut next, dt / 3.0, &k3);
    axpy3(&mut next, dt / 6.0, &k4);
    (
        next,
        SrsStepTape {
            u: *u,
            stages: [a2, a3, a4],
            source,
        },
    )
}

/// Pulls a cotangent on the step output back to the step input.
pub fn srs_lf_step_vjp(
    tape: &SrsStepTape,
    dt: f64,
    params: &SrsParams,
    g_next: &SrsMeans,
) -> SrsMeans {
    let gk4 = scale3(g_next, dt / 6.0);
    let ga4 = srs_lf_rhs_vjp(&tape.stages[2], params, &gk4);

    let gk3 = add3(&scale3(g_next, dt / 3.0), &scale3(&ga4, dt));
    let ga3 = srs_lf_rhs_vjp(&tape.stages[1], params, &gk3);

    let gk2 = add3(&scale3(g_next, dt / 3.0), &scale3(&ga3, 0.5 * dt));
    let ga2 = srs_lf_rhs_vjp(&tape.stages[0], params, &gk2);

    let gk1 = add3(&scale3(g_next, dt / 6.0), &scale3(&ga2, 0.5 * dt));
    let ga1 = srs_lf_rhs_vjp(&tape.u, params, &gk1);

    let mut g = *g_next;
    for part in [&ga4, &ga3, &ga2, &ga1] {
        g = add3(&g, part);
    }
    g
}

/// Cotangent of the Burgers rhs with respect to the state: the
/// advection Jacobian transposes to `u * d/dx(g)` (the first spectral
/// derivative is antisymmetric) and diffusion is symmetric.
pub fn sbe_rhs_vjp(u: &[f64], grid: &Grid1D, nu: f64, g: &[f64]) -> Vec<f64> {
    debug_assert_eq!(u.len(), grid.n_points);
    debug_assert_eq!(g.len(), u.len());
    let dg = spectral_derivative(g, grid, 1);
    let d2g = spectral_derivative(g, grid, 2);
    (0..u.len()).map(|i| u[i] * dg[i] + nu * d2g[i]).collect()
}

/// Stage states of the Runge-Kutta bootstrap step of the coarse
/// Burgers solver (the multistep path needs no extra tape).
#[derive(Debug, Clone)]
pub struct SbeBootstrapTape {
    pub stages: [Vec<f64>; 3],
}

fn axpy(acc: &mut [f64], c: f64, v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += c * b;
    }
}

/// Bootstrap step mirroring the production solver: frozen forcing,
/// four rhs evaluations, classical combination.
pub fn sbe_rk4_tape(
    u: &[f64],
    forcing: &[f64],
    grid: &Grid1D,
    nu: f64,
    dt: f64,
) -> (Vec<f64>, SbeBootstrapTape) {
    let rhs = |x: &[f64]| crate::envs::sbe_rhs(x, grid, nu, forcing, None);
    let k1 = rhs(u);
    let mut a2 = u.to_vec();
    axpy(&mut a2, 0.5 * dt, &k1);
    let k2 = rhs(&a2);
    let mut a3 = u.to_vec();
    axpy(&mut a3, 0.5 * dt, &k2);
    let k3 = rhs(&a3);
    let mut a4 = u.to_vec();
    axpy(&mut a4, dt, &k3);
    let k4 = rhs(&a4);

    let mut next = u.to_vec();
    axpy(&mut next, dt / 6.0, &k1);
    axpy(&mut next, dt / 3.0, &k2);
    axpy(&mut next, dt / 3.0, &k3);
    axpy(&mut next, dt / 6.0, &k4);
    (next, SbeBootstrapTape { stages: [a2, a3, a4] })
}

/// Backward pass of [`sbe_rk4_tape`].
pub fn sbe_rk4_vjp(
    u: &[f64],
    tape: &SbeBootstrapTape,
    grid: &Grid1D,
    nu: f64,
    dt: f64,
    g_next: &[f64],
) -> Vec<f64> {
    let n = u.len();
    let scaled = |g: &[f64], c: f64| -> Vec<f64> { g.iter().map(|v| c * v).collect() };

    let gk4 = scaled(g_next, dt / 6.0);
    let ga4 = sbe_rhs_vjp(&tape.stages[2], grid, nu, &gk4);

    let mut gk3 = scaled(g_next, dt / 3.0);
    axpy(&mut gk3, dt, &ga4);
    let ga3 = sbe_rhs_vjp(&tape.stages[1], grid, nu, &gk3);

    let mut gk2 = scaled(g_next, dt / 3.0);
    axpy(&mut gk2, 0.5 * dt, &ga3);
    let ga2 = sbe_rhs_vjp(&tape.stages[0], grid, nu, &gk2);

    let mut gk1 = scaled(g_next, dt / 6.0);
    axpy(&mut gk1, 0.5 * dt, &ga2);
    let ga1 = sbe_rhs_vjp(u, grid, nu, &gk1);

    let mut g = g_next.to_vec();
    for part in [&ga4, &ga3, &ga2, &ga1] {
        for i in 0..n {
            g[i] += part[i];
        }
    }
    g
}
