//! Fixed-step classical Runge-Kutta integration.
//!
//! Every time-dependent computation in the crate (network and graphon
//! simulation, scalar and matrix Riccati equations, closed loops) runs
//! through [`rk4`], so step counts passed to public functions mean the same
//! thing everywhere: `steps` uniform steps of size `horizon / steps`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// States whose sup norm exceeds this are reported as a blow-up.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

/// Default number of steps per unit of time.
pub const STEPS_PER_UNIT_TIME: usize = 1000;

/// Vector-space operations the integrator needs.
pub trait OdeState: Clone {
    /// `self += a * x`
    fn axpy(&mut self, a: f64, x: &Self);
    fn sup_norm(&self) -> f64;
}

impl OdeState for f64 {
    fn axpy(&mut self, a: f64, x: &Self) {
        *self += a * x;
    }

    fn sup_norm(&self) -> f64 {
        self.abs()
    }
}

impl OdeState for Vec<f64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            *s += a * v;
        }
    }

    fn sup_norm(&self) -> f64 {
        self.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl OdeState for GridFunction {
    fn axpy(&mut self, a: f64, x: &Self) {
        GridFunction::axpy(self, a, x)
    }

    fn sup_norm(&self) -> f64 {
        GridFunction::sup_norm(self)
    }
}

impl OdeState for DMatrix<f64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x.iter()) {
            *s += a * v;
        }
    }

    fn sup_norm(&self) -> f64 {
        self.amax()
    }
}

/// Sampled solution: `states[k]` approximates `x(times[k])`.
#[derive(Clone, Debug)]
pub struct Solution<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
}

pub(crate) fn time_grid(t0: f64, horizon: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| t0 + horizon * k as f64 / steps as f64).collect()
}

pub(crate) fn check_horizon(horizon: f64, steps: usize) -> Result<()> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::argument(format!("horizon must be positive, got {horizon}")));
    }
    if steps == 0 {
        return Err(Error::argument("at least one integration step is required"));
    }
    Ok(())
}

/// One classical RK4 step from `(t, x)` with step `h`.
pub fn rk4_step<S, F>(rhs: &mut F, t: f64, x: &S, h: f64) -> Result<S>
where
    S: OdeState,
    F: FnMut(f64, &S) -> Result<S>,
{
    let half = 0.5 * h;
    let k1 = rhs(t, x)?;
    let mut y = x.clone();
    y.axpy(half, &k1);
    let k2 = rhs(t + half, &y)?;
    let mut y = x.clone();
    y.axpy(half, &k2);
    let k3 = rhs(t + half, &y)?;
    let mut y = x.clone();
    y.axpy(h, &k3);
    let k4 = rhs(t + h, &y)?;

    let mut next = x.clone();
    next.axpy(h / 6.0, &k1);
    next.axpy(h / 3.0, &k2);
    next.axpy(h / 3.0, &k3);
    next.axpy(h / 6.0, &k4);
    Ok(next)
}

/// Integrates `x' = rhs(t, x)` over `[t0, t0 + horizon]` with `steps`
/// uniform RK4 steps, keeping every state.
pub fn rk4<S, F>(mut rhs: F, x0: S, t0: f64, horizon: f64, steps: usize) -> Result<Solution<S>>
where
    S: OdeState,
    F: FnMut(f64, &S) -> Result<S>,
{
    check_horizon(horizon, steps)?;
    let times = time_grid(t0, horizon, steps);
    let h = horizon / steps as f64;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x0);
    for k in 0..steps {
        let next = rk4_step(&mut rhs, times[k], &states[k], h)?;
        let sup = next.sup_norm();
        // NaN compares false, so test the negation
        if !(sup <= BLOW_UP_THRESHOLD) {
            return Err(Error::Numeric {
                time: times[k + 1],
                sup,
            });
        }
        states.push(next);
    }
    Ok(Solution { times, states })
}

/// Linear interpolation into a uniform sample grid on `[0, horizon]`.
/// Exact (no rounding blend) when `t` sits on a grid point.
pub(crate) fn interp_uniform(values: &[f64], horizon: f64, t: f64) -> f64 {
    let (k, w) = interp_weights(values.len() - 1, horizon, t);
    if w == 0.0 {
        values[k]
    } else {
        (1.0 - w) * values[k] + w * values[k + 1]
    }
}

/// Returns `(k, w)` such that `t ~ (1-w) t_k + w t_{k+1}` with `w` in `[0,1)`.
pub(crate) fn interp_weights(steps: usize, horizon: f64, t: f64) -> (usize, f64) {
    let s = (t / horizon * steps as f64).clamp(0.0, steps as f64);
    let nearest = s.round();
    if (s - nearest).abs() <= 1e-9 * steps.max(1) as f64 {
        return (nearest as usize, 0.0);
    }
    let k = (s.floor() as usize).min(steps - 1);
    (k, s - k as f64)
}
