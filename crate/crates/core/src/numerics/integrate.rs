//! Explicit time integrators over generic state vectors.

use num_complex::Complex64;

/// State supporting the axpy updates the integrators need.
///
/// Implemented for flat real and complex vectors; environments with
/// structured states (several coupled fields) implement it once and get
/// both steppers for free.
pub trait StateVector: Clone {
    /// `self += c * other`. Lengths must agree.
    fn scaled_add_assign(&mut self, c: f64, other: &Self);
}

impl StateVector for Vec<f64> {
    fn scaled_add_assign(&mut self, c: f64, other: &Self) {
        debug_assert_eq!(self.len(), other.len());
        for (s, o) in self.iter_mut().zip(other) {
            *s += c * o;
        }
    }
}

impl StateVector for Vec<Complex64> {
    fn scaled_add_assign(&mut self, c: f64, other: &Self) {
        debug_assert_eq!(self.len(), other.len());
        for (s, o) in self.iter_mut().zip(other) {
            *s += c * o;
        }
    }
}

/// One classical fourth-order Runge-Kutta step of size `dt` from time `t`.
///
/// Non-finite values in `rhs` output propagate into the result; callers
/// detect divergence on the returned state.
pub fn rk4_step<S, F>(state: &S, t: f64, dt: f64, mut rhs: F) -> S
where
    S: StateVector,
    F: FnMut(&S, f64) -> S,
{
    debug_assert!(dt > 0.0, "rk4_step needs dt > 0, got {dt}");
    let k1 = rhs(state, t);
    let mut x = state.clone();
    x.scaled_add_assign(0.5 * dt, &k1);
    let k2 = rhs(&x, t + 0.5 * dt);
    let mut x = state.clone();
    x.scaled_add_assign(0.5 * dt, &k2);
    let k3 = rhs(&x, t + 0.5 * dt);
    let mut x = state.clone();
    x.scaled_add_assign(dt, &k3);
    let k4 = rhs(&x, t + dt);

    let mut next = state.clone();
    next.scaled_add_assign(dt / 6.0, &k1);
    next.scaled_add_assign(dt / 3.0, &k2);
    next.scaled_add_assign(dt / 3.0, &k3);
    next.scaled_add_assign(dt / 6.0, &k4);
    next
}

/// One second-order Adams-Bashforth step:
/// `state + dt * (1.5 * rhs_now - 0.5 * rhs_prev)`.
///
/// `rhs_prev` must come from the immediately preceding step; the first
/// step of a trajectory is bootstrapped with [`rk4_step`] by the caller.
pub fn ab2_step<S: StateVector>(state: &S, rhs_now: &S, rhs_prev: &S, dt: f64) -> S {
    debug_assert!(dt > 0.0, "ab2_step needs dt > 0, got {dt}");
    let mut next = state.clone();
    next.scaled_add_assign(1.5 * dt, rhs_now);
    next.scaled_add_assign(-0.5 * dt, rhs_prev);
    next
}
