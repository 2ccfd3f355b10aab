//! Finite-horizon LQR for graphon systems `(aI + A; bI)` with cost
//! `int q ||(I - eta A) x||^2 + ||u||^2 dt + qT ||(I - eta A) x_T||^2`.
//!
//! For a finite-rank `A` the Riccati solution stays diagonal in the
//! eigenbasis of `A`: one scalar equation on the orthogonal complement (the
//! bulk) and one per eigenvalue. Riccati time runs forward from the terminal
//! weight, so the feedback at time `t` uses `P_{T-t}`. Solutions are stored
//! at every RK4 step and interpolated linearly in between.

mod glqr;
mod matrix;

pub use glqr::{glqr_table, run_glqr, GlqrPlan, GlqrReport, GlqrRow};
pub use matrix::{solve_matrix_riccati, solve_matrix_riccati_general, MatrixRiccati, MAX_MATRIX_RICCATI_NODES};

use crate::dynamics::{GraphonSystem, LinearSystem, Trajectory};
use crate::error::{Error, Result};
use crate::graphon::{SpectralGraphon, StepKernel};
use crate::grid::GridFunction;
use crate::min_energy::trapezoid;
use crate::ode::{self, interp_uniform};

use nalgebra::DMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LqrProblem {
    pub q: f64,
    pub q_t: f64,
    pub eta: f64,
    pub horizon: f64,
}

impl LqrProblem {
    pub fn new(q: f64, q_t: f64, eta: f64, horizon: f64) -> Result<Self> {
        if !(q >= 0.0 && q.is_finite() && q_t >= 0.0 && q_t.is_finite()) {
            return Err(Error::argument("q and qT must be finite and nonnegative"));
        }
        if !eta.is_finite() {
            return Err(Error::argument("eta must be finite"));
        }
        ode::check_horizon(horizon, 1)?;
        Ok(LqrProblem { q, q_t, eta, horizon })
    }

    /// `(1 - eta lambda)^2`, the weight of an eigenmode in both cost terms.
    fn mode_weight(&self, lambda: f64) -> f64 {
        (1.0 - self.eta * lambda).powi(2)
    }

    /// `(I - eta A) x`
    fn output(&self, sys: &dyn LinearSystem, x: &GridFunction) -> Result<GridFunction> {
        let mut y = x.clone();
        if self.eta != 0.0 {
            y.axpy(-self.eta, &sys.apply_a(x)?);
        }
        Ok(y)
    }
}

/// Uniform samples of a scalar function on `[0, horizon]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarTrajectory {
    pub horizon: f64,
    pub values: Vec<f64>,
}

impl ScalarTrajectory {
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn at(&self, t: f64) -> Result<f64> {
        let t = clamp_time(t, self.horizon)?;
        Ok(interp_uniform(&self.values, self.horizon, t))
    }

    pub fn terminal(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

fn clamp_time(t: f64, horizon: f64) -> Result<f64> {
    let tol = 1e-9 * horizon.max(1.0);
    if !(t >= -tol && t <= horizon + tol) {
        return Err(Error::argument(format!("time {t} is outside [0, {horizon}]")));
    }
    Ok(t.clamp(0.0, horizon))
}

/// `p' = 2 a p - b^2 p^2 + q`, `p(0) = p0`, by RK4.
pub fn solve_scalar_riccati(a: f64, b: f64, q: f64, p0: f64, horizon: f64, steps: usize) -> Result<ScalarTrajectory> {
    if !(q >= 0.0 && p0 >= 0.0) {
        return Err(Error::argument(format!(
            "Riccati weights must be nonnegative, got q = {q}, p0 = {p0}"
        )));
    }
    let b2 = b * b;
    let sol = ode::rk4(|_, p: &f64| Ok(2.0 * a * p - b2 * p * p + q), p0, 0.0, horizon, steps)?;
    Ok(ScalarTrajectory {
        horizon,
        values: sol.states,
    })
}

/// `P_t = Pi_t I + sum_l (Pi^l_t - Pi_t) f_l f_l^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct RiccatiSolution {
    pub bulk: ScalarTrajectory,
    pub modes: Vec<ScalarTrajectory>,
    pub spectrum: SpectralGraphon,
}

/// Solves the operator Riccati equation of a graphon system with input
/// `bI` through its scalar decomposition.
pub fn solve_graphon_riccati(sys: &GraphonSystem, prob: &LqrProblem, steps: usize) -> Result<RiccatiSolution> {
    if sys.b.is_some() {
        return Err(Error::UnsupportedStructure(
            "the scalar Riccati decomposition needs the input operator b I".into(),
        ));
    }
    let spectrum = sys.a.finite_spectrum()?;
    let (alpha, beta) = (sys.alpha, sys.beta);
    let bulk = solve_scalar_riccati(alpha, beta, prob.q, prob.q_t, prob.horizon, steps)?;
    let modes = spectrum
        .eigenvalues()
        .iter()
        .map(|&l| {
            let w = prob.mode_weight(l);
            solve_scalar_riccati(alpha + l, beta, prob.q * w, prob.q_t * w, prob.horizon, steps)
        })
        .collect::<Result<_>>()?;
    Ok(RiccatiSolution { bulk, modes, spectrum })
}

impl RiccatiSolution {
    pub fn horizon(&self) -> f64 {
        self.bulk.horizon
    }

    pub fn steps(&self) -> usize {
        self.bulk.steps()
    }

    pub fn times(&self) -> Vec<f64> {
        ode::time_grid(0.0, self.horizon(), self.steps())
    }

    /// `(Pi_t, [Pi^l_t - Pi_t])`
    fn coefficients(&self, t: f64) -> Result<(f64, Vec<f64>)> {
        let bulk = self.bulk.at(t)?;
        let modes = self
            .modes
            .iter()
            .map(|m| m.at(t).map(|v| v - bulk))
            .collect::<Result<_>>()?;
        Ok((bulk, modes))
    }

    /// `P_t x` at the finer of the two grids.
    pub fn apply(&self, t: f64, x: &GridFunction) -> Result<GridFunction> {
        let (bulk, modes) = self.coefficients(t)?;
        self.spectrum.modal_map(bulk, &modes, x)
    }

    /// The kernel part `sum_l (Pi^l_t - Pi_t) f_l f_l^T` as a graphon.
    pub fn mode_kernel(&self, t: f64) -> Result<SpectralGraphon> {
        let (_, modes) = self.coefficients(t)?;
        Ok(SpectralGraphon::from_parts_unchecked(
            self.spectrum.resolution(),
            modes,
            self.spectrum.eigenfunctions().to_vec(),
        ))
    }

    /// `||P'_t x - (A^T P_t + P_t A - b^2 P_t^2 + q (I - eta A)^2) x||` with
    /// `P'` by fourth-order central differences of the stored samples, so
    /// `t` must be at least two steps away from both ends.
    pub fn residual(&self, sys: &GraphonSystem, prob: &LqrProblem, t: f64, x: &GridFunction) -> Result<f64> {
        let h = self.horizon() / self.steps() as f64;
        if t < 2.0 * h || t > self.horizon() - 2.0 * h {
            return Err(Error::argument("residual time must be two steps inside the horizon"));
        }
        let mut dp = self.apply(t - 2.0 * h, x)?;
        dp.axpy(-8.0, &self.apply(t - h, x)?);
        dp.axpy(8.0, &self.apply(t + h, x)?);
        dp.axpy(-1.0, &self.apply(t + 2.0 * h, x)?);
        dp.scale(1.0 / (12.0 * h));

        // the generator is self-adjoint, so A^T P x = A (P x)
        let px = self.apply(t, x)?;
        let mut rhs = sys.rhs(&px, None)?;
        rhs.axpy(1.0, &self.apply(t, &sys.rhs(x, None)?)?);
        rhs.axpy(-sys.beta * sys.beta, &self.apply(t, &px)?);
        let y = prob.output(sys, x)?;
        rhs.axpy(prob.q, &prob.output(sys, &y)?);
        Ok(dp.difference(&rhs)?.norm())
    }
}

/// Riccati operators indexed by Riccati time.
pub trait Feedback {
    fn horizon(&self) -> f64;
    /// `P_s x`, at the resolution of `x`.
    fn apply(&self, s: f64, x: &GridFunction) -> Result<GridFunction>;
}

impl Feedback for RiccatiSolution {
    fn horizon(&self) -> f64 {
        RiccatiSolution::horizon(self)
    }

    fn apply(&self, s: f64, x: &GridFunction) -> Result<GridFunction> {
        let y = RiccatiSolution::apply(self, s, x)?;
        if y.resolution() != x.resolution() {
            return Err(Error::resolution(format!(
                "state grid {} is coarser than the eigenfunction grid {}",
                x.resolution(),
                y.resolution()
            )));
        }
        Ok(y)
    }
}

/// Cell averages of `P_t` on the uniform `n`-partition. The identity part is
/// kept as the scalar `bulk`; only the kernel part is averaged.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproximateRiccati {
    pub bulk: f64,
    pub kernel: StepKernel,
}

impl ApproximateRiccati {
    pub fn apply(&self, x: &GridFunction) -> Result<GridFunction> {
        let mut y = self.kernel.apply(x)?;
        y.axpy(self.bulk, x);
        Ok(y)
    }
}

pub fn approximate_riccati(p: &RiccatiSolution, t: f64, n: usize) -> Result<ApproximateRiccati> {
    let (bulk, modes) = p.coefficients(t)?;
    let averaged = averaged_eigenfunctions(p, n)?;
    let mut values = DMatrix::zeros(n, n);
    for (c, f) in modes.iter().zip(&averaged) {
        let f = f.values();
        for i in 0..n {
            for j in i..n {
                values[(i, j)] += c * f[i] * f[j];
            }
        }
    }
    values.fill_lower_triangle_with_upper_triangle();
    Ok(ApproximateRiccati {
        bulk,
        kernel: StepKernel::symmetric_unchecked(values),
    })
}

fn averaged_eigenfunctions(p: &RiccatiSolution, n: usize) -> Result<Vec<GridFunction>> {
    p.spectrum
        .eigenfunctions()
        .iter()
        .map(|f| f.values().project(n))
        .collect()
}

/// The time-varying feedback of [`approximate_riccati`] on an `n`-node
/// network, kept in low-rank form.
#[derive(Clone, Debug)]
pub struct ApproximateFeedback<'a> {
    solution: &'a RiccatiSolution,
    averaged: Vec<GridFunction>,
}

impl<'a> ApproximateFeedback<'a> {
    pub fn new(solution: &'a RiccatiSolution, n: usize) -> Result<Self> {
        let averaged = averaged_eigenfunctions(solution, n)?;
        Ok(ApproximateFeedback { solution, averaged })
    }

    pub fn size(&self) -> Option<usize> {
        self.averaged.first().map(GridFunction::resolution)
    }
}

impl Feedback for ApproximateFeedback<'_> {
    fn horizon(&self) -> f64 {
        self.solution.horizon()
    }

    fn apply(&self, s: f64, x: &GridFunction) -> Result<GridFunction> {
        if let Some(n) = self.size() {
            if x.resolution() != n {
                return Err(Error::resolution(format!(
                    "feedback built for {n} nodes given a state of length {}",
                    x.resolution()
                )));
            }
        }
        let (bulk, modes) = self.solution.coefficients(s)?;
        let mut y = x.scaled(bulk);
        for (c, f) in modes.iter().zip(&self.averaged) {
            y.axpy(c * x.dot_same(f), f);
        }
        Ok(y)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedLoop {
    pub trajectory: Trajectory,
    /// The input at every stored time.
    pub controls: Vec<GridFunction>,
    pub cost: f64,
}

/// RK4 of `x' = (aI + A) x + (bI + B) u` with `u_t = -(bI + B) P_{T-t} x_t`.
pub fn closed_loop_simulate(
    sys: &dyn LinearSystem,
    feedback: &dyn Feedback,
    prob: &LqrProblem,
    x0: &GridFunction,
    steps: usize,
) -> Result<ClosedLoop> {
    let horizon = prob.horizon;
    if (feedback.horizon() - horizon).abs() > 1e-12 * horizon {
        return Err(Error::argument(format!(
            "feedback covers [0, {}] but the horizon is {horizon}",
            feedback.horizon()
        )));
    }
    let control = |t: f64, x: &GridFunction| -> Result<GridFunction> {
        let mut u = sys.apply_input(&feedback.apply(horizon - t, x)?)?;
        u.scale(-1.0);
        Ok(u)
    };
    let sol = ode::rk4(
        |t, x: &GridFunction| sys.rhs(x, Some(&control(t, x)?)),
        x0.clone(),
        0.0,
        horizon,
        steps,
    )?;
    let controls = sol
        .times
        .iter()
        .zip(&sol.states)
        .map(|(&t, x)| control(t, x))
        .collect::<Result<Vec<_>>>()?;
    let trajectory = Trajectory::from(sol);
    let cost = lqr_cost(sys, prob, &trajectory, &controls)?;
    Ok(ClosedLoop {
        trajectory,
        controls,
        cost,
    })
}

/// Trapezoid rule for the running cost on the trajectory's time grid, plus
/// the terminal cost.
pub fn lqr_cost(
    sys: &dyn LinearSystem,
    prob: &LqrProblem,
    trajectory: &Trajectory,
    controls: &[GridFunction],
) -> Result<f64> {
    if controls.len() != trajectory.states.len() {
        return Err(Error::invalid(format!(
            "{} controls for {} states",
            controls.len(),
            trajectory.states.len()
        )));
    }
    let running = trajectory
        .states
        .iter()
        .zip(controls)
        .map(|(x, u)| Ok(prob.q * prob.output(sys, x)?.norm().powi(2) + u.norm().powi(2)))
        .collect::<Result<Vec<_>>>()?;
    let terminal = prob.output(sys, trajectory.final_state())?.norm().powi(2);
    Ok(trapezoid(&trajectory.times, &running) + prob.q_t * terminal)
}
