//! Minimum-energy state-to-state control of graphon systems `(aI + A; bI)`.
//!
//! For a finite-rank `A` the controllability Gramian is diagonal in the
//! eigenbasis of `A`: it acts as `w0` on the orthogonal complement and as
//! `w0 + w_l` on `f_l`, so both the Gramian and its inverse are closed form.

mod gssc;

pub use gssc::{gssc_table, run_gssc, GsscPlan, GsscReport, GsscRow};

use crate::dynamics::{semigroup_apply, simulate_graphon, simulate_network, Control, GraphonSystem, NetworkSystem};
use crate::error::{Error, Result};
use crate::graphon::{KernelSum, SpectralGraphon};
use crate::grid::{common_resolution, GridFunction};

/// Margins at or below this count as a singular input operator.
pub const CONTROLLABILITY_TOL: f64 = 1e-12;

/// Below this `|cT|` the series branch of [`phi`] is used.
const PHI_SERIES_CUTOFF: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Verdict {
    pub controllable: bool,
    /// Smallest point of the spectrum of `(bI + B)(bI + B)^T`.
    pub margin: f64,
}

/// The spectrum of `(bI + B)^2` is `{b^2} U {(b + mu_l)^2}`; the system is
/// exactly controllable iff its infimum is positive.
pub fn check_exact_controllability(sys: &GraphonSystem) -> Result<Verdict> {
    let b = sys.beta;
    let mut margin = b * b;
    if let Some(bg) = &sys.b {
        for mu in bg.finite_spectrum()?.eigenvalues() {
            margin = margin.min((b + mu) * (b + mu));
        }
    }
    Ok(Verdict {
        controllable: margin > CONTROLLABILITY_TOL,
        margin,
    })
}

/// `(e^{cT} - 1) / c`, equal to `T` at `c = 0`.
pub fn phi(c: f64, t: f64) -> f64 {
    let x = c * t;
    if x.abs() < PHI_SERIES_CUTOFF {
        t * (1.0 + x / 2.0 * (1.0 + x / 3.0 * (1.0 + x / 4.0)))
    } else {
        x.exp_m1() / c
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GramianSpectral {
    pub horizon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub spectrum: SpectralGraphon,
    pub w0: f64,
    pub w: Vec<f64>,
}

/// Closed-form Gramian of `(aI + A; bI)` over `[0, T]`:
/// `w0 = b^2 phi(2a, T)`, `w_l = b^2 (phi(2a + 2 lambda_l, T) - phi(2a, T))`.
pub fn gramian_spectral(sys: &GraphonSystem, horizon: f64) -> Result<GramianSpectral> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::argument(format!("horizon must be positive, got {horizon}")));
    }
    if sys.b.is_some() {
        return Err(Error::UnsupportedStructure(
            "closed-form Gramian needs B = beta I".into(),
        ));
    }
    if sys.beta == 0.0 {
        return Err(Error::Controllability("beta = 0 gives a zero input operator".into()));
    }
    let spectrum = sys.a.finite_spectrum()?;
    let b2 = sys.beta * sys.beta;
    let base = phi(2.0 * sys.alpha, horizon);
    let w = spectrum
        .eigenvalues()
        .iter()
        .map(|l| b2 * (phi(2.0 * (sys.alpha + l), horizon) - base))
        .collect();
    Ok(GramianSpectral {
        horizon,
        alpha: sys.alpha,
        beta: sys.beta,
        spectrum,
        w0: b2 * base,
        w,
    })
}

impl GramianSpectral {
    pub fn apply(&self, h: &GridFunction) -> Result<GridFunction> {
        self.spectrum.modal_map(self.w0, &self.w, h)
    }

    /// `h / w0 + sum_l (1/(w0 + w_l) - 1/w0) <h, f_l> f_l`
    pub fn inverse_apply(&self, h: &GridFunction) -> Result<GridFunction> {
        if !(self.w0 > 0.0) {
            return Err(Error::SingularGramian {
                index: 0,
                value: self.w0,
            });
        }
        let mut coeffs = Vec::with_capacity(self.w.len());
        for (l, w) in self.w.iter().enumerate() {
            let total = self.w0 + w;
            if !(total > 0.0) {
                return Err(Error::SingularGramian {
                    index: l + 1,
                    value: total,
                });
            }
            coeffs.push(1.0 / total - 1.0 / self.w0);
        }
        self.spectrum.modal_map(1.0 / self.w0, &coeffs, h)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateToStateProblem {
    pub x0: GridFunction,
    pub x_t: GridFunction,
    pub horizon: f64,
}

/// `u_tau = b e^{(aI + A)(T - tau)} W_T^{-1} (x_T - e^{(aI + A)T} x0)`.
#[derive(Clone, Debug)]
pub struct MinEnergyLaw {
    gramian: GramianSpectral,
    eta: GridFunction,
    costate: GridFunction,
    x0_is_zero: bool,
}

impl MinEnergyLaw {
    pub fn new(sys: &GraphonSystem, prob: &StateToStateProblem) -> Result<Self> {
        let verdict = check_exact_controllability(sys)?;
        if !verdict.controllable {
            return Err(Error::Controllability(format!(
                "input operator spectrum reaches {:e}",
                verdict.margin
            )));
        }
        common_resolution(prob.x0.resolution(), prob.x_t.resolution())?;
        let gramian = gramian_spectral(sys, prob.horizon)?;
        let free = semigroup_apply(sys.alpha, &gramian.spectrum, prob.horizon, &prob.x0)?;
        let eta = prob.x_t.difference(&free)?;
        let costate = gramian.inverse_apply(&eta)?;
        Ok(MinEnergyLaw {
            x0_is_zero: prob.x0.values().iter().all(|v| *v == 0.0),
            gramian,
            eta,
            costate,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.gramian.horizon
    }

    pub fn gramian(&self) -> &GramianSpectral {
        &self.gramian
    }

    /// Grid the control lives on.
    pub fn resolution(&self) -> usize {
        self.costate.resolution()
    }

    pub fn control_at(&self, tau: f64) -> Result<GridFunction> {
        let t = self.horizon();
        if !(-1e-12 * t..=t * (1.0 + 1e-12)).contains(&tau) {
            return Err(Error::argument(format!("time {tau} is outside [0, {t}]")));
        }
        let g = &self.gramian;
        let mut u = semigroup_apply(g.alpha, &g.spectrum, (t - tau).max(0.0), &self.costate)?;
        u.scale(g.beta);
        Ok(u)
    }

    /// `<W_T^{-1} eta, eta>`
    pub fn energy(&self) -> f64 {
        self.costate.inner(&self.eta).expect("same grid")
    }

    /// Samples the law on `steps` uniform intervals of `[0, T]`.
    pub fn trajectory(&self, steps: usize) -> Result<ControlTrajectory> {
        crate::ode::check_horizon(self.horizon(), steps)?;
        let times = crate::ode::time_grid(0.0, self.horizon(), steps);
        let controls = times.iter().map(|&t| self.control_at(t)).collect::<Result<_>>()?;
        ControlTrajectory::new(times, controls)
    }
}

impl Control for MinEnergyLaw {
    fn at(&self, t: f64) -> Result<Option<GridFunction>> {
        self.control_at(t).map(Some)
    }
}

/// Stored controls; between samples the value is held from the latest
/// sample at or before `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlTrajectory {
    pub times: Vec<f64>,
    pub controls: Vec<GridFunction>,
    /// Trapezoid rule for `int ||u_t||^2 dt` on `times`.
    pub energy: f64,
}

impl ControlTrajectory {
    pub fn new(times: Vec<f64>, controls: Vec<GridFunction>) -> Result<Self> {
        if times.is_empty() || times.len() != controls.len() {
            return Err(Error::invalid("need one control per time, at least one time"));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("control times must increase"));
        }
        let sq: Vec<f64> = controls.iter().map(|u| u.norm().powi(2)).collect();
        let energy = trapezoid(&times, &sq);
        Ok(ControlTrajectory {
            times,
            controls,
            energy,
        })
    }

    pub fn resolution(&self) -> usize {
        self.controls[0].resolution()
    }

    fn index_at(&self, t: f64) -> usize {
        // tolerate rounding in stage times that should land on a sample
        let tol = 1e-9 * (self.times[self.times.len() - 1] - self.times[0]).max(1.0);
        match self.times.partition_point(|&s| s <= t + tol) {
            0 => 0,
            k => k - 1,
        }
    }

    pub fn control_at(&self, t: f64) -> &GridFunction {
        &self.controls[self.index_at(t)]
    }
}

impl Control for ControlTrajectory {
    fn at(&self, t: f64) -> Result<Option<GridFunction>> {
        Ok(Some(self.control_at(t).clone()))
    }
}

pub(crate) fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Minimum-energy control sampled on `steps` intervals.
pub fn min_energy_control(sys: &GraphonSystem, prob: &StateToStateProblem, steps: usize) -> Result<ControlTrajectory> {
    MinEnergyLaw::new(sys, prob)?.trajectory(steps)
}

/// Cell averages of every stored control on the uniform `n`-partition.
pub fn approximate_control(u: &ControlTrajectory, n: usize) -> Result<ControlTrajectory> {
    let controls = u.controls.iter().map(|c| c.project(n)).collect::<Result<_>>()?;
    ControlTrajectory::new(u.times.clone(), controls)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundReport {
    /// `||x_T(u) - x^N_T(u^[N])||`
    pub empirical: f64,
    pub bound: f64,
    /// The four contributions to `bound`, in the order
    /// `|a - a_N|`, `||A_Delta||`, `|b - b_N| + ||B_Delta||`, projection.
    pub terms: [f64; 4],
}

/// Terminal-state gap between the limit system under `u` and the network
/// under its cell averages, with the network-approximation bound.
///
/// Both systems start at the origin. The limit runs on the control grid,
/// which must be a multiple of the network size; integrals in the bound use
/// the trapezoid rule on the stored control times.
pub fn terminal_error_bound(
    limit: &GraphonSystem,
    net: &NetworkSystem,
    u: &ControlTrajectory,
    steps: usize,
) -> Result<BoundReport> {
    let controls = u.controls.iter().collect::<Vec<_>>();
    let horizon = u.times[u.times.len() - 1] - u.times[0];
    if u.times[0] != 0.0 {
        return Err(Error::argument("control trajectory must start at t = 0"));
    }
    bound_report(limit, net, u, &u.times, &controls, horizon, steps)
}

/// As [`terminal_error_bound`] for a minimum-energy law, which is evaluated
/// exactly at every integrator stage. The bound is only stated for transfers
/// from the origin, so a law with nonzero `x0` is refused.
pub fn terminal_error_bound_law(
    limit: &GraphonSystem,
    net: &NetworkSystem,
    law: &MinEnergyLaw,
    steps: usize,
) -> Result<BoundReport> {
    if !law.x0_is_zero {
        return Err(Error::argument(
            "the network-approximation bound covers transfers from the origin only",
        ));
    }
    let sampled = law.trajectory(steps)?;
    let controls = sampled.controls.iter().collect::<Vec<_>>();
    bound_report(limit, net, law, &sampled.times, &controls, law.horizon(), steps)
}

fn bound_report(
    limit: &GraphonSystem,
    net: &NetworkSystem,
    control: &dyn Control,
    times: &[f64],
    samples: &[&GridFunction],
    horizon: f64,
    steps: usize,
) -> Result<BoundReport> {
    let m = samples[0].resolution();
    let n = net.size();
    if m % n != 0 {
        return Err(Error::resolution(format!(
            "network of {n} nodes does not divide control grid {m}"
        )));
    }

    let a_norm = KernelSum::new(m)?.graphon(1.0, &limit.a)?.distance().operator;
    let a_delta = KernelSum::new(m)?
        .graphon(1.0, &limit.a)?
        .step(-1.0, net.a.kernel())?
        .distance()
        .operator;
    let a_n_norm = net.a.operator_norm();
    let b_norm = match &limit.b {
        Some(b) => KernelSum::new(m)?.graphon(1.0, b)?.distance().operator,
        None => 0.0,
    };
    let mut b_delta = KernelSum::new(m)?;
    if let Some(b) = &limit.b {
        b_delta = b_delta.graphon(1.0, b)?;
    }
    if let Some(b) = &net.b {
        b_delta = b_delta.step(-1.0, b.kernel())?;
    }
    let b_delta = b_delta.distance().operator;

    let (alpha, alpha_n) = (limit.alpha, net.alpha);
    let l_alpha = alpha.abs().max(alpha_n.abs());
    let mut u_norm = Vec::with_capacity(times.len());
    let mut proj_err = Vec::with_capacity(times.len());
    for u in samples {
        u_norm.push(u.norm());
        let un = u.project(n)?;
        proj_err.push(u.difference(&un)?.norm());
    }
    let weighted = |rate: f64, linear: bool, v: &[f64]| -> f64 {
        let f: Vec<f64> = times
            .iter()
            .zip(v)
            .map(|(t, x)| {
                let s = horizon - t;
                let w = if linear { s } else { 1.0 };
                w * (rate * s).exp() * x
            })
            .collect();
        trapezoid(times, &f)
    };
    let gain = limit.beta.abs() + b_norm;
    let net_rate = alpha_n + a_n_norm;
    let terms = [
        (alpha - alpha_n).abs() * gain * weighted(l_alpha + a_norm, true, &u_norm),
        a_delta * gain * weighted(alpha_n + 1.0, true, &u_norm),
        ((limit.beta - net.beta).abs() + b_delta) * weighted(net_rate, false, &u_norm),
        net.beta.abs() * weighted(net_rate, false, &proj_err),
    ];

    let x0 = GridFunction::zeros(m);
    let x_lim = simulate_graphon(limit, control, &x0, horizon, steps)?;
    let projected = |t: f64| -> Result<GridFunction> {
        match control.at(t)? {
            Some(u) => u.project(n),
            None => Ok(GridFunction::zeros(n)),
        }
    };
    let x_net = simulate_network(net, &projected, &vec![0.0; n], horizon, steps)?;
    let empirical = x_lim.final_state().difference(x_net.final_state())?.norm();
    Ok(BoundReport {
        empirical,
        bound: terms.iter().sum(),
        terms,
    })
}
