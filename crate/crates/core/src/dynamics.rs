//! Network systems `x' = a_N x + (1/N) A_N x + b_N u + (1/N) B_N u` and
//! graphon systems `x' = (aI + A) x + (bI + B) u`, simulated with the
//! shared RK4 integrator, plus the closed-form semigroup of finite-rank
//! graphon systems.
//!
//! A network state is the vector of cell values of a [`GridFunction`] with
//! one cell per node, so both kinds of system run through the same right-hand
//! side and a step graphon system reproduces its network twin bit for bit.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graphon::{Graphon, KernelSum, SpectralGraphon, StepGraphon};
use crate::grid::{common_resolution, GridFunction};
use crate::ode::{self, Solution, STEPS_PER_UNIT_TIME};

/// The pair `(alpha I + A; beta I + B)` acting on grid functions.
pub trait LinearSystem {
    fn alpha(&self) -> f64;
    fn beta(&self) -> f64;
    /// `A x`
    fn apply_a(&self, x: &GridFunction) -> Result<GridFunction>;
    /// `B u`, or `None` when `B = 0`.
    fn apply_b(&self, u: &GridFunction) -> Result<Option<GridFunction>>;

    /// `(alpha I + A) x + (beta I + B) u`
    fn rhs(&self, x: &GridFunction, u: Option<&GridFunction>) -> Result<GridFunction> {
        let mut dx = self.apply_a(x)?;
        dx.axpy(self.alpha(), x);
        if let Some(u) = u {
            let u = match_resolution(u, x.resolution())?;
            dx.axpy(self.beta(), &u);
            if let Some(bu) = self.apply_b(&u)? {
                dx.axpy(1.0, &bu);
            }
        }
        Ok(dx)
    }

    /// `(beta I + B) u`
    fn apply_input(&self, u: &GridFunction) -> Result<GridFunction> {
        let mut out = u.scaled(self.beta());
        if let Some(bu) = self.apply_b(u)? {
            out.axpy(1.0, &bu);
        }
        Ok(out)
    }
}

fn match_resolution(u: &GridFunction, m: usize) -> Result<std::borrow::Cow<'_, GridFunction>> {
    if u.resolution() == m {
        Ok(std::borrow::Cow::Borrowed(u))
    } else {
        Ok(std::borrow::Cow::Owned(u.refine(m)?))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSystem {
    pub alpha: f64,
    pub beta: f64,
    pub a: StepGraphon,
    pub b: Option<StepGraphon>,
}

impl NetworkSystem {
    pub fn new(alpha: f64, beta: f64, a: StepGraphon, b: Option<StepGraphon>) -> Result<Self> {
        if let Some(b) = &b {
            if b.n() != a.n() {
                return Err(Error::invalid(format!("A_N has {} nodes but B_N has {}", a.n(), b.n())));
            }
        }
        check_scalars(alpha, beta)?;
        Ok(NetworkSystem { alpha, beta, a, b })
    }

    pub fn from_matrices(alpha: f64, beta: f64, a: DMatrix<f64>, b: Option<DMatrix<f64>>) -> Result<Self> {
        let b = b.map(StepGraphon::new).transpose()?;
        Self::new(alpha, beta, StepGraphon::new(a)?, b)
    }

    pub fn size(&self) -> usize {
        self.a.n()
    }

    /// The graphon system with the same data under the step-function mapping.
    pub fn graphon_twin(&self) -> GraphonSystem {
        GraphonSystem {
            alpha: self.alpha,
            beta: self.beta,
            a: Graphon::Step(self.a.clone()),
            b: self.b.clone().map(Graphon::Step),
        }
    }
}

fn check_scalars(alpha: f64, beta: f64) -> Result<()> {
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::invalid("alpha and beta must be finite"));
    }
    Ok(())
}

impl LinearSystem for NetworkSystem {
    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn apply_a(&self, x: &GridFunction) -> Result<GridFunction> {
        check_nodes(x, self.size())?;
        self.a.apply(x)
    }

    fn apply_b(&self, u: &GridFunction) -> Result<Option<GridFunction>> {
        check_nodes(u, self.size())?;
        self.b.as_ref().map(|b| b.apply(u)).transpose()
    }
}

fn check_nodes(x: &GridFunction, n: usize) -> Result<()> {
    if x.resolution() != n {
        return Err(Error::resolution(format!(
            "network of {n} nodes given a state of length {}",
            x.resolution()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphonSystem {
    pub alpha: f64,
    pub beta: f64,
    pub a: Graphon,
    pub b: Option<Graphon>,
}

impl GraphonSystem {
    pub fn new(alpha: f64, beta: f64, a: Graphon, b: Option<Graphon>) -> Result<Self> {
        check_scalars(alpha, beta)?;
        let b = b.filter(|b| !b.is_zero());
        Ok(GraphonSystem { alpha, beta, a, b })
    }
}

impl LinearSystem for GraphonSystem {
    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn apply_a(&self, x: &GridFunction) -> Result<GridFunction> {
        let y = self.a.apply(x)?;
        if y.resolution() != x.resolution() {
            return Err(Error::resolution(format!(
                "state resolution {} is coarser than the graphon grid {}",
                x.resolution(),
                self.a.resolution()
            )));
        }
        Ok(y)
    }

    fn apply_b(&self, u: &GridFunction) -> Result<Option<GridFunction>> {
        match &self.b {
            None => Ok(None),
            Some(b) => {
                let y = b.apply(u)?;
                if y.resolution() != u.resolution() {
                    return Err(Error::resolution("input grid is coarser than the B grid"));
                }
                Ok(Some(y))
            }
        }
    }
}

/// A time-indexed input. `None` means the zero input.
pub trait Control {
    fn at(&self, t: f64) -> Result<Option<GridFunction>>;
}

pub struct ZeroControl;

impl Control for ZeroControl {
    fn at(&self, _t: f64) -> Result<Option<GridFunction>> {
        Ok(None)
    }
}

impl<F> Control for F
where
    F: Fn(f64) -> Result<GridFunction>,
{
    fn at(&self, t: f64) -> Result<Option<GridFunction>> {
        self(t).map(Some)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<GridFunction>,
}

impl Trajectory {
    pub fn final_state(&self) -> &GridFunction {
        self.states.last().expect("a trajectory has at least one state")
    }

    pub fn horizon(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0) - self.times[0]
    }

    /// Header `t,cell_0,...,cell_{M-1}`, one row per stored time.
    pub fn to_csv(&self) -> String {
        let m = self.states[0].resolution();
        let mut out = String::from("t");
        for i in 0..m {
            let _ = write!(out, ",cell_{i}");
        }
        out.push('\n');
        for (t, x) in self.times.iter().zip(&self.states) {
            let _ = write!(out, "{t}");
            for v in x.values() {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

impl From<Solution<GridFunction>> for Trajectory {
    fn from(s: Solution<GridFunction>) -> Self {
        Trajectory {
            times: s.times,
            states: s.states,
        }
    }
}

/// Default step count for a horizon: [`STEPS_PER_UNIT_TIME`] per unit time.
pub fn default_steps(horizon: f64) -> usize {
    ((horizon * STEPS_PER_UNIT_TIME as f64).round() as usize).max(1)
}

pub(crate) fn simulate<S: LinearSystem + ?Sized>(
    sys: &S,
    control: &dyn Control,
    x0: GridFunction,
    horizon: f64,
    steps: usize,
) -> Result<Trajectory> {
    let sol = ode::rk4(
        |t, x: &GridFunction| {
            let u = control.at(t)?;
            sys.rhs(x, u.as_ref())
        },
        x0,
        0.0,
        horizon,
        steps,
    )?;
    Ok(sol.into())
}

/// RK4 on the network, with `steps` uniform steps over `[0, horizon]`.
pub fn simulate_network(
    sys: &NetworkSystem,
    control: &dyn Control,
    x0: &[f64],
    horizon: f64,
    steps: usize,
) -> Result<Trajectory> {
    let x0 = GridFunction::from_vector(x0)?;
    check_nodes(&x0, sys.size())?;
    simulate(sys, control, x0, horizon, steps)
}

/// RK4 on the grid of `x0`. The state grid must be at least as fine as the
/// graphon grids (one resolution dividing the other).
pub fn simulate_graphon(
    sys: &GraphonSystem,
    control: &dyn Control,
    x0: &GridFunction,
    horizon: f64,
    steps: usize,
) -> Result<Trajectory> {
    common_resolution(x0.resolution(), sys.a.resolution())?;
    simulate(sys, control, x0.clone(), horizon, steps)
}

/// `e^{(alpha I + A) t} x = e^{alpha t} (x + sum_l (e^{lambda_l t} - 1) <x, f_l> f_l)`,
/// returned at the finer of the two grids.
pub fn semigroup_apply(alpha: f64, a: &SpectralGraphon, t: f64, x: &GridFunction) -> Result<GridFunction> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::argument(format!("semigroup time must be nonnegative, got {t}")));
    }
    if t == 0.0 {
        return Ok(x.clone());
    }
    let m = if a.rank() == 0 {
        x.resolution()
    } else {
        common_resolution(x.resolution(), a.resolution())?
    };
    let mut out = x.refine(m)?;
    for (l, f) in a.eigenvalues().iter().zip(a.eigenfunctions()) {
        let f = f.values().refine(m)?;
        let c = (l * t).exp_m1() * x.inner(&f)?;
        out.axpy(c, &f);
    }
    out.scale((alpha * t).exp());
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapReport {
    pub empirical: f64,
    pub bound: f64,
}

/// Compares `e^{(a_N I + A_N) t} x` with `e^{(a I + A_*) t} x`, both by RK4
/// on the grid of `x`, against
/// `t e^{(a_N + 1) t} ||A_N - A_*|| ||x|| + |a - a_N| t e^{(L + ||A_*||) t} ||x||`
/// with `L = max(|a|, |a_N|)` and operator norms taken on the grid of `x`.
pub fn semigroup_convergence_gap(
    a_n: &StepGraphon,
    a_star: &Graphon,
    alpha_n: f64,
    alpha_star: f64,
    t: f64,
    x: &GridFunction,
    steps: usize,
) -> Result<GapReport> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::argument(format!("time must be nonnegative, got {t}")));
    }
    let m = x.resolution();
    let net = Graphon::Step(a_n.clone());
    let delta = KernelSum::new(m)?
        .graphon(1.0, &net)?
        .graphon(-1.0, a_star)?
        .distance()
        .operator;
    let star_norm = KernelSum::new(m)?.graphon(1.0, a_star)?.distance().operator;
    let xn = x.norm();
    let l_alpha = alpha_star.abs().max(alpha_n.abs());
    let bound = t * ((alpha_n + 1.0) * t).exp() * delta * xn
        + (alpha_star - alpha_n).abs() * t * ((l_alpha + star_norm) * t).exp() * xn;
    if t == 0.0 {
        return Ok(GapReport { empirical: 0.0, bound });
    }
    let sys_n = GraphonSystem::new(alpha_n, 0.0, net, None)?;
    let sys_star = GraphonSystem::new(alpha_star, 0.0, a_star.clone(), None)?;
    let x_n = simulate_graphon(&sys_n, &ZeroControl, x, t, steps)?;
    let x_star = simulate_graphon(&sys_star, &ZeroControl, x, t, steps)?;
    let empirical = x_n.final_state().difference(x_star.final_state())?.norm();
    Ok(GapReport { empirical, bound })
}
