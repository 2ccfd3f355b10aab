//! The network LQR pipeline: solve the Riccati equation once on the limit,
//! then for each network compare its own optimal feedback with the cell
//! averages of the limit solution.

use std::fmt::Write as _;

use serde::Serialize;

use super::{
    closed_loop_simulate, solve_graphon_riccati, solve_matrix_riccati, ApproximateFeedback, LqrProblem, RiccatiSolution,
};
use crate::config::{build_graphon, cases, Case, GlqrConfig, NetworkKind, X0Spec};
use crate::dynamics::{default_steps, GraphonSystem, NetworkSystem};
use crate::error::{Error, Result};
use crate::graphon::Graphon;
use crate::sampling::{grid_network, network_distance, sample_network};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GlqrRow {
    pub n: usize,
    pub seed: Option<u64>,
    pub op_dist: f64,
    pub l2_dist: f64,
    /// `100 max_t ||x*_t - x^[N]_t||_sup / ||x_0||_sup`
    pub max_gap_pct: f64,
    pub cost_opt: f64,
    pub cost_approx: f64,
    /// `100 (cost_approx - cost_opt) / cost_opt`, zero when both vanish.
    pub excess_pct: f64,
}

pub struct GlqrPlan {
    graphon: Graphon,
    riccati: RiccatiSolution,
    problem: LqrProblem,
    alpha: f64,
    beta: f64,
    x0: X0Spec,
    steps: usize,
    network: NetworkKind,
    resolution: Option<usize>,
    cases: Vec<Case>,
}

impl GlqrPlan {
    /// Solves the limit Riccati equation with twice the closed-loop step
    /// count, so every integrator stage lands on a stored time.
    pub fn new(cfg: &GlqrConfig) -> Result<Self> {
        let graphon = build_graphon(&cfg.graphon)?;
        let m = graphon.resolution();
        if let Some(n) = cfg.ns.iter().find(|&&n| m % n != 0) {
            return Err(Error::Config(format!(
                "network size {n} does not divide the limit grid {m}"
            )));
        }
        let problem =
            LqrProblem::new(cfg.q, cfg.q_t, cfg.eta, cfg.horizon).map_err(|e| Error::Config(e.to_string()))?;
        let limit = GraphonSystem::new(cfg.alpha, cfg.beta, graphon.clone(), None)?;
        let steps = cfg.steps.unwrap_or_else(|| default_steps(cfg.horizon));
        let riccati = solve_graphon_riccati(&limit, &problem, 2 * steps)?;
        Ok(GlqrPlan {
            graphon,
            riccati,
            problem,
            alpha: cfg.alpha,
            beta: cfg.beta,
            x0: cfg.x0.clone(),
            steps,
            network: cfg.network,
            resolution: cfg.resolution,
            cases: cases(cfg.network, &cfg.ns, &cfg.seeds),
        })
    }

    pub fn cases(&self) -> &[Case] {
        &self.cases
    }

    pub fn riccati(&self) -> &RiccatiSolution {
        &self.riccati
    }

    pub fn run_case(&self, case: Case) -> Result<GlqrRow> {
        let net = match (self.network, case.seed) {
            (NetworkKind::Sampled, Some(seed)) => sample_network(&self.graphon, case.n, seed)?,
            _ => grid_network(&self.graphon, case.n)?,
        };
        let dist = network_distance(&net, &self.graphon, self.resolution)?;
        let sys = NetworkSystem::new(self.alpha, self.beta, net.adjacency().clone(), None)?;
        let x0 = self.x0.build(case.n, case.seed.unwrap_or(0))?;

        let exact = solve_matrix_riccati(&sys, &self.problem, 2 * self.steps)?;
        let opt = closed_loop_simulate(&sys, &exact, &self.problem, &x0, self.steps)?;
        drop(exact);
        let approx = ApproximateFeedback::new(&self.riccati, case.n)?;
        let apx = closed_loop_simulate(&sys, &approx, &self.problem, &x0, self.steps)?;

        let gap = opt
            .trajectory
            .states
            .iter()
            .zip(&apx.trajectory.states)
            .map(|(a, b)| a.difference(b).map(|d| d.sup_norm()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let scale = x0.sup_norm();
        let max_gap_pct = if scale > 0.0 { 100.0 * gap / scale } else { 0.0 };
        let excess_pct = if opt.cost > 0.0 {
            100.0 * (apx.cost - opt.cost) / opt.cost
        } else {
            0.0
        };
        Ok(GlqrRow {
            n: case.n,
            seed: case.seed,
            op_dist: dist.op,
            l2_dist: dist.l2,
            max_gap_pct,
            cost_opt: opt.cost,
            cost_approx: apx.cost,
            excess_pct,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlqrReport {
    pub rows: Vec<GlqrRow>,
}

/// Runs every case in order.
pub fn run_glqr(cfg: &GlqrConfig) -> Result<GlqrReport> {
    let plan = GlqrPlan::new(cfg)?;
    let rows = plan
        .cases()
        .iter()
        .map(|&c| plan.run_case(c))
        .collect::<Result<Vec<_>>>()?;
    Ok(GlqrReport { rows })
}

/// CSV with columns `N,seed,op_dist,l2_dist,max_gap_pct,cost_opt,cost_approx,excess_pct`.
pub fn glqr_table(rows: &[GlqrRow]) -> String {
    let mut out = String::from("N,seed,op_dist,l2_dist,max_gap_pct,cost_opt,cost_approx,excess_pct\n");
    for r in rows {
        let seed = r.seed.map(|s| s.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{seed},{},{},{},{},{},{}",
            r.n, r.op_dist, r.l2_dist, r.max_gap_pct, r.cost_opt, r.cost_approx, r.excess_pct
        );
    }
    out
}
