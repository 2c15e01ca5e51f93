//! Three-wave coupling system: a pump wave feeding a daughter wave and
//! a scattered wave, in both its full PDE form (100-point periodic
//! grid, RK4) and its spatially averaged ODE form.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::action::{butterworth_source, ControlSignal};
use crate::numerics::{central_diff_periodic, rk4_step, Grid1D, StateVector};
use crate::{Error, Result};

/// Physical and numerical parameters of the three-wave system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SrsParams {
    /// Advection speeds of pump, daughter and scattered waves.
    pub v0: f64,
    pub v1: f64,
    pub v2: f64,
    /// Pump-daughter coupling strength (enters squared in the
    /// scattered-wave equation).
    pub beta0: f64,
    /// Cubic self-interaction coefficient of the scattered wave.
    pub sigma: f64,
    /// Linear damping of the scattered wave.
    pub nu: f64,
    /// Solver time step.
    pub dt: f64,
    pub grid: Grid1D,
}

impl Default for SrsParams {
    fn default() -> Self {
        // beta0 and sigma set the three-wave exchange rate (~beta0 *
        // pump) fast enough that mean-amplitude oscillations resolve
        // inside one control window, while sigma * |u2|^2 stays well
        // under the explicit-step stability bound at the saturated
        // scattered amplitude (~beta0 * pump).
        SrsParams {
            v0: 1.0,
            v1: 0.5,
            v2: 1.0,
            beta0: 250.0,
            sigma: 3e-3,
            nu: 0.1,
            dt: 1e-3,
            grid: Grid1D::new(100, 10.0).expect("static grid"),
        }
    }
}

impl SrsParams {
    /// Checks the advective stability guard and sign constraints.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::config(format!("srs.dt must be positive, got {}", self.dt)));
        }
        if self.nu < 0.0 {
            return Err(Error::config(format!("srs.nu must be >= 0, got {}", self.nu)));
        }
        let vmax = self.v0.abs().max(self.v1.abs()).max(self.v2.abs());
        let cfl = self.dt * vmax / self.grid.spacing();
        if cfl > 1.0 {
            return Err(Error::config(format!(
                "srs advective CFL {cfl:.3} exceeds 1 (dt * max|V| / spacing)"
            )));
        }
        Ok(())
    }
}

/// Full-field state: three complex wave envelopes plus time.
#[derive(Debug, Clone, PartialEq)]
pub struct SrsState {
    pub u0: Vec<Complex64>,
    pub u1: Vec<Complex64>,
    pub u2: Vec<Complex64>,
    pub t: f64,
}

impl SrsState {
    pub fn zeros(grid: &Grid1D) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); grid.n_points];
        SrsState {
            u0: z.clone(),
            u1: z.clone(),
            u2: z,
            t: 0.0,
        }
    }

    /// Spatial means of the three envelopes (the reduced-state view).
    pub fn means(&self) -> [Complex64; 3] {
        [mean_c(&self.u0), mean_c(&self.u1), mean_c(&self.u2)]
    }

    /// Largest envelope magnitude over all fields and points.
    pub fn max_abs(&self) -> f64 {
        self.u0
            .iter()
            .chain(&self.u1)
            .chain(&self.u2)
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.u0
            .iter()
            .chain(&self.u1)
            .chain(&self.u2)
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

fn mean_c(v: &[Complex64]) -> Complex64 {
    v.iter().sum::<Complex64>() / v.len() as f64
}

// The integrators update the wave fields; `t` is advanced by the
// steppers, not by the axpy.
impl StateVector for SrsState {
    fn scaled_add_assign(&mut self, c: f64, other: &Self) {
        for (a, b) in self.u0.iter_mut().zip(&other.u0) {
            *a += c * b;
        }
        for (a, b) in self.u1.iter_mut().zip(&other.u1) {
            *a += c * b;
        }
        for (a, b) in self.u2.iter_mut().zip(&other.u2) {
            *a += c * b;
        }
    }
}

/// Right-hand sides of the three coupled envelope equations with the
/// advection terms moved to the right:
///
/// du0/dt = -V0 du0/dx - u1 u2 + S0
/// du1/dt = +V1 du1/dx + u0 conj(u2)
/// du2/dt = -V2 du2/dx + beta0^2 u0 conj(u1) + i sigma |u2|^2 u2 - nu u2
pub fn srs_rhs(state: &SrsState, params: &SrsParams, source: f64) -> SrsState {
    let n = params.grid.n_points;
    debug_assert_eq!(state.u0.len(), n);
    let d0 = central_diff_periodic(&state.u0, &params.grid);
    let d1 = central_diff_periodic(&state.u1, &params.grid);
    let d2 = central_diff_periodic(&state.u2, &params.grid);
    let b2 = params.beta0 * params.beta0;

    let mut out = SrsState::zeros(&params.grid);
    for i in 0..n {
        out.u0[i] = -params.v0 * d0[i] - state.u1[i] * state.u2[i] + source;
        out.u1[i] = params.v1 * d1[i] + state.u0[i] * state.u2[i].conj();
        let u2 = state.u2[i];
        out.u2[i] = -params.v2 * d2[i]
            + b2 * state.u0[i] * state.u1[i].conj()
            + Complex64::new(0.0, params.sigma) * u2.norm_sqr() * u2
            - params.nu * u2;
    }
    out
}

/// One RK4 step of the full-field system. The pulsed source is frozen
/// at its value at the step start.
pub fn srs_hf_step(state: &SrsState, action: &ControlSignal, params: &SrsParams) -> SrsState {
    let source = butterworth_source(action, state.t);
    let mut next = rk4_step(state, state.t, params.dt, |s, _| srs_rhs(s, params, source));
    next.t = state.t + params.dt;
    next
}

/// Reduced (spatially averaged) state: one complex amplitude per wave.
pub type SrsMeans = [Complex64; 3];

/// Right-hand side of the reduced ODE system: the full equations with
/// the advection terms dropped (they average to zero over the periodic
/// domain) plus an additive correction `n` per component.
pub fn srs_lf_rhs(
    u: &SrsMeans,
    params: &SrsParams,
    source: f64,
    correction: &SrsMeans,
) -> SrsMeans {
    let b2 = params.beta0 * params.beta0;
    [
        -u[1] * u[2] + source + correction[0],
        u[0] * u[2].conj() + correction[1],
        b2 * u[0] * u[1].conj() + Complex64::new(0.0, params.sigma) * u[2].norm_sqr() * u[2]
            - params.nu * u[2]
            + correction[2],
    ]
}

/// One RK4 step of the reduced ODE (uncorrected), source frozen at the
/// step-start time `t`.
pub fn srs_lf_step(u: &SrsMeans, t: f64, dt: f64, action: &ControlSignal, params: &SrsParams) -> SrsMeans {
    let source = butterworth_source(action, t);
    let zero = [Complex64::new(0.0, 0.0); 3];
    let v = rk4_step(&vec![u[0], u[1], u[2]], t, dt, |s, _| {
        let arr = [s[0], s[1], s[2]];
        let r = srs_lf_rhs(&arr, params, source, &zero);
        vec![r[0], r[1], r[2]]
    });
    [v[0], v[1], v[2]]
}

/// Initial-condition family: spatially uniform real pump with amplitude
/// drawn from `pump_range`, daughter and scattered envelopes seeded with
/// pointwise noise of magnitude at most `seed_level * pump`.
pub fn sample_srs_ic<R: Rng>(
    params: &SrsParams,
    pump_range: (f64, f64),
    seed_level: f64,
    rng: &mut R,
) -> SrsState {
    let pump = rng.gen_range(pump_range.0..pump_range.1);
    let mut state = SrsState::zeros(&params.grid);
    for c in state.u0.iter_mut() {
        *c = Complex64::new(pump, 0.0);
    }
    let max_r = seed_level * pump;
    for field in [&mut state.u1, &mut state.u2] {
        for c in field.iter_mut() {
            let r = rng.gen_range(0.0..max_r);
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            *c = Complex64::from_polar(r, phi);
        }
    }
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn conj_state(s: &SrsState) -> SrsState {
        SrsState {
            u0: s.u0.iter().map(|c| c.conj()).collect(),
            u1: s.u1.iter().map(|c| c.conj()).collect(),
            u2: s.u2.iter().map(|c| c.conj()).collect(),
            t: s.t,
        }
    }

    fn random_state(params: &SrsParams, seed: u64) -> SrsState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = SrsState::zeros(&params.grid);
        for f in [&mut s.u0, &mut s.u1, &mut s.u2] {
            for c in f.iter_mut() {
                *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        s
    }

    #[test]
    fn decoupled_pump_sees_only_advection_and_source() {
        let params = SrsParams::default();
        let mut s = random_state(&params, 1);
        s.u1.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        s.u2.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        let src = 0.7;
        let rhs = srs_rhs(&s, &params, src);
        let d0 = central_diff_periodic(&s.u0, &params.grid);
        for i in 0..params.grid.n_points {
            let expect = -params.v0 * d0[i] + src;
            assert!((rhs.u0[i] - expect).norm() < 1e-14);
            assert!(rhs.u1[i].norm() < 1e-14);
            assert!(rhs.u2[i].norm() < 1e-14);
        }
    }

    #[test]
    fn constant_states_show_pure_coupling() {
        let mut params = SrsParams::default();
        params.sigma = 0.0;
        params.nu = 0.0;
        let n = params.grid.n_points;
        let u0 = Complex64::new(0.8, -0.1);
        let u1 = Complex64::new(0.05, 0.02);
        let u2 = Complex64::new(-0.03, 0.04);
        let s = SrsState {
            u0: vec![u0; n],
            u1: vec![u1; n],
            u2: vec![u2; n],
            t: 0.0,
        };
        let rhs = srs_rhs(&s, &params, 0.0);
        let b2 = params.beta0 * params.beta0;
        for i in 0..n {
            assert!((rhs.u1[i] - u0 * u2.conj()).norm() < 1e-14);
            assert!((rhs.u2[i] - b2 * u0 * u1.conj()).norm() < 1e-14);
            assert!((rhs.u0[i] - (-u1 * u2)).norm() < 1e-14);
        }
    }

    #[test]
    fn daughter_equation_is_conjugation_equivariant() {
        let params = SrsParams::default();
        let s = random_state(&params, 2);
        let rhs = srs_rhs(&s, &params, 0.4);
        let rhs_conj = srs_rhs(&conj_state(&s), &params, 0.4);
        for i in 0..params.grid.n_points {
            assert!((rhs_conj.u1[i] - rhs.u1[i].conj()).norm() < 1e-12);
            assert!((rhs_conj.u0[i] - rhs.u0[i].conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn full_conjugation_symmetry_flips_sigma() {
        // Conjugating the state maps trajectories of the system onto
        // trajectories of the system with the opposite cubic
        // coefficient; with sigma = 0 the rhs itself is equivariant.
        let params = SrsParams::default();
        let mut flipped = params;
        flipped.sigma = -params.sigma;
        let s = random_state(&params, 3);
        let rhs = srs_rhs(&s, &params, 0.2);
        let rhs_conj = srs_rhs(&conj_state(&s), &flipped, 0.2);
        for i in 0..params.grid.n_points {
            for (a, b) in [
                (rhs_conj.u0[i], rhs.u0[i]),
                (rhs_conj.u1[i], rhs.u1[i]),
                (rhs_conj.u2[i], rhs.u2[i]),
            ] {
                assert!((a - b.conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_state_zero_source_is_fixed_point() {
        let params = SrsParams::default();
        let s = SrsState::zeros(&params.grid);
        let sig = ControlSignal::new(0.0, 1.0, 0.0);
        let next = srs_hf_step(&s, &sig, &params);
        assert!(next.max_abs() == 0.0);
        assert!((next.t - params.dt).abs() < 1e-15);
    }

    #[test]
    fn scattered_wave_decays_at_linear_damping_rate() {
        let mut params = SrsParams::default();
        params.sigma = 0.0;
        let n = params.grid.n_points;
        let mut s = SrsState::zeros(&params.grid);
        // Uniform small scattered wave, no pump or daughter: the only
        // active term is -nu u2.
        for c in s.u2.iter_mut() {
            *c = Complex64::new(1e-3, 5e-4);
        }
        let sig = ControlSignal::new(0.0, 1.0, -100.0);
        let a0 = s.max_abs();
        for _ in 0..100 {
            s = srs_hf_step(&s, &sig, &params);
        }
        let expect = a0 * (-params.nu * 100.0 * params.dt).exp();
        assert!(
            (s.max_abs() - expect).abs() < 1e-9,
            "{} vs {expect}",
            s.max_abs()
        );
        assert_eq!(s.u2.len(), n);
    }

    #[test]
    fn lf_rhs_trivial_cases() {
        let params = SrsParams::default();
        let zero = [Complex64::new(0.0, 0.0); 3];
        let r = srs_lf_rhs(&zero, &params, 0.9, &zero);
        assert!((r[0] - Complex64::new(0.9, 0.0)).norm() < 1e-15);
        assert!(r[1].norm() < 1e-15 && r[2].norm() < 1e-15);

        let n = [
            Complex64::new(0.1, 0.2),
            Complex64::new(-0.3, 0.0),
            Complex64::new(0.0, 0.4),
        ];
        let r = srs_lf_rhs(&zero, &params, 0.0, &n);
        for (a, b) in r.iter().zip(&n) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn lf_rhs_matches_mean_of_full_rhs_on_constant_state() {
        let params = SrsParams::default();
        let n = params.grid.n_points;
        let u = [
            Complex64::new(0.9, 0.1),
            Complex64::new(0.02, -0.01),
            Complex64::new(-0.015, 0.03),
        ];
        let s = SrsState {
            u0: vec![u[0]; n],
            u1: vec![u[1]; n],
            u2: vec![u[2]; n],
            t: 0.0,
        };
        let full = srs_rhs(&s, &params, 0.5);
        let reduced = srs_lf_rhs(&u, &params, 0.5, &[Complex64::new(0.0, 0.0); 3]);
        let means = full.means();
        for (a, b) in means.iter().zip(&reduced) {
            assert!((a - b).norm() < 1e-12 * b.norm().max(1.0));
        }
    }

    #[test]
    fn ic_family_respects_seed_level() {
        let params = SrsParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let s = sample_srs_ic(&params, (0.8, 1.2), 1e-3, &mut rng);
            let pump = s.u0[0].re;
            assert!((0.8..1.2).contains(&pump));
            assert!(s.u0.iter().all(|c| (c - s.u0[0]).norm() == 0.0));
            let cap = 1e-3 * pump;
            assert!(s.u1.iter().chain(&s.u2).all(|c| c.norm() <= cap));
        }
    }

    #[test]
    fn stability_guard_rejects_fast_advection() {
        let mut params = SrsParams::default();
        params.validate().unwrap();
        params.v2 = 200.0;
        assert!(params.validate().is_err());
    }

    #[test]
    fn parametric_growth_transfers_energy() {
        // Pump feeding the daughters: daughter amplitudes must grow and
        // the pump must weaken once the transfer is underway.
        let params = SrsParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut s = sample_srs_ic(&params, (1.0, 1.0001), 1e-3, &mut rng);
        let a1_0: f64 = s.u1.iter().map(|c| c.norm()).sum::<f64>();
        let a2_0: f64 = s.u2.iter().map(|c| c.norm()).sum::<f64>();
        let pump_0: f64 = s.u0.iter().map(|c| c.norm()).sum::<f64>();
        let sig = ControlSignal::new(0.0, 1.0, -100.0); // no external source
        for _ in 0..1200 {
            s = srs_hf_step(&s, &sig, &params);
        }
        let a1_t: f64 = s.u1.iter().map(|c| c.norm()).sum::<f64>();
        let a2_t: f64 = s.u2.iter().map(|c| c.norm()).sum::<f64>();
        let pump_t: f64 = s.u0.iter().map(|c| c.norm()).sum::<f64>();
        assert!(
            a1_t > 10.0 * a1_0 && a2_t > 10.0 * a2_0,
            "daughters failed to grow: {a1_0} -> {a1_t}, {a2_0} -> {a2_t}"
        );
        assert!(pump_t < pump_0, "pump failed to deplete: {pump_0} -> {pump_t}");
    }
}
