//! The state-to-state pipeline: identify a network, solve the transfer on
//! the limit, average the limit control over the network's cells and apply it.

use std::fmt::Write as _;

use serde::Serialize;

use super::{terminal_error_bound_law, trapezoid, ControlTrajectory, MinEnergyLaw, StateToStateProblem};
use crate::config::{build_graphon, cases, Case, GsscConfig, NetworkKind};
use crate::dynamics::{default_steps, simulate_graphon, GraphonSystem, NetworkSystem};
use crate::error::{Error, Result};
use crate::graphon::Graphon;
use crate::grid::GridFunction;
use crate::sampling::{grid_network, sample_network};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GsscRow {
    pub n: usize,
    pub seed: Option<u64>,
    /// `||x_T(u) - x^N_T(u^[N])||`
    pub terminal_error: f64,
    pub bound: f64,
    /// `int ||u^[N]_t||^2 dt` of the control applied to the network.
    pub energy: f64,
}

/// Everything shared by the cases of one configuration: the limit system,
/// its minimum-energy law and the sampled limit control.
pub struct GsscPlan {
    graphon: Graphon,
    limit: GraphonSystem,
    law: MinEnergyLaw,
    target: GridFunction,
    samples: ControlTrajectory,
    steps: usize,
    network: NetworkKind,
    cases: Vec<Case>,
}

impl GsscPlan {
    /// Builds the limit problem. Controllability is checked here, before any
    /// simulation runs.
    pub fn new(cfg: &GsscConfig) -> Result<Self> {
        let graphon = build_graphon(&cfg.graphon)?;
        let m = cfg.resolution.unwrap_or_else(|| graphon.resolution());
        if let Some(n) = cfg.ns.iter().find(|&&n| m % n != 0) {
            return Err(Error::Config(format!(
                "network size {n} does not divide the state grid {m}"
            )));
        }
        let target = cfg.target.build(m).map_err(|e| Error::Config(e.to_string()))?;
        let limit = GraphonSystem::new(cfg.alpha, cfg.beta, graphon.clone(), None)?;
        let prob = StateToStateProblem {
            x0: GridFunction::zeros(m),
            x_t: target.clone(),
            horizon: cfg.horizon,
        };
        let law = MinEnergyLaw::new(&limit, &prob)?;
        let steps = cfg.steps.unwrap_or_else(|| default_steps(cfg.horizon));
        let samples = law.trajectory(steps)?;

        Ok(GsscPlan {
            graphon,
            limit,
            law,
            target,
            samples,
            steps,
            network: cfg.network,
            cases: cases(cfg.network, &cfg.ns, &cfg.seeds),
        })
    }

    pub fn cases(&self) -> &[Case] {
        &self.cases
    }

    pub fn law(&self) -> &MinEnergyLaw {
        &self.law
    }

    pub fn target(&self) -> &GridFunction {
        &self.target
    }

    /// Terminal state of the limit system under the exact law.
    pub fn limit_terminal(&self) -> Result<GridFunction> {
        let x0 = GridFunction::zeros(self.target.resolution());
        let tr = simulate_graphon(&self.limit, &self.law, &x0, self.law.horizon(), self.steps)?;
        Ok(tr.final_state().clone())
    }

    pub fn run_case(&self, case: Case) -> Result<GsscRow> {
        let net = match (self.network, case.seed) {
            (NetworkKind::Sampled, Some(seed)) => sample_network(&self.graphon, case.n, seed)?,
            _ => grid_network(&self.graphon, case.n)?,
        };
        let sys = NetworkSystem::new(self.limit.alpha, self.limit.beta, net.adjacency().clone(), None)?;
        let report = terminal_error_bound_law(&self.limit, &sys, &self.law, self.steps)?;
        let sq = self
            .samples
            .controls
            .iter()
            .map(|u| u.project(case.n).map(|v| v.norm().powi(2)))
            .collect::<Result<Vec<_>>>()?;
        Ok(GsscRow {
            n: case.n,
            seed: case.seed,
            terminal_error: report.empirical,
            bound: report.bound,
            energy: trapezoid(&self.samples.times, &sq),
        })
    }
}

#[derive(Clone, Debug)]
pub struct GsscReport {
    pub rows: Vec<GsscRow>,
    pub target: GridFunction,
    /// Limit terminal state under the exact law.
    pub achieved: GridFunction,
    /// Minimum energy of the limit transfer.
    pub energy: f64,
}

/// Runs every case in order.
pub fn run_gssc(cfg: &GsscConfig) -> Result<GsscReport> {
    let plan = GsscPlan::new(cfg)?;
    let rows = plan
        .cases()
        .iter()
        .map(|&c| plan.run_case(c))
        .collect::<Result<Vec<_>>>()?;
    Ok(GsscReport {
        rows,
        achieved: plan.limit_terminal()?,
        target: plan.target.clone(),
        energy: plan.law.energy(),
    })
}

/// CSV with columns `N,seed,terminal_error,bound,energy`.
pub fn gssc_table(rows: &[GsscRow]) -> String {
    let mut out = String::from("N,seed,terminal_error,bound,energy\n");
    for r in rows {
        let seed = r.seed.map(|s| s.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{seed},{},{},{}", r.n, r.terminal_error, r.bound, r.energy);
    }
    out
}
