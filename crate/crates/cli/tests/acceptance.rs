//! One line per acceptance criterion; exits nonzero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use common::*;
use graphon_core::config::{parse, GlqrConfig, GsscConfig};
use graphon_core::dynamics::{
    semigroup_convergence_gap, simulate_graphon, simulate_network, GraphonSystem, NetworkSystem,
};
use graphon_core::graphon::{Graphon, SpectralGraphon};
use graphon_core::lqr::{closed_loop_simulate, solve_graphon_riccati, solve_matrix_riccati, GlqrPlan, LqrProblem};
use graphon_core::min_energy::{
    gramian_spectral, terminal_error_bound_law, GsscPlan, MinEnergyLaw, StateToStateProblem,
};
use graphon_core::ode::rk4;
use graphon_core::sampling::{grid_network, sample_network};
use graphon_core::{GridFunction, Result as CoreResult};
use nalgebra::DMatrix;
use rand::Rng;

type Outcome = Result<String, String>;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn read_config(name: &str) -> String {
    fs::read_to_string(configs().join(name)).expect("packaged config")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn spectral_golden() -> Outcome {
    let start = Instant::now();
    let g = SpectralGraphon::sinusoidal(512).unwrap();
    let dec = g.discretize(512).unwrap().spectral_decomposition(6).unwrap();
    let top: Vec<f64> = dec.eigenvalues().iter().take(4).map(|l| l.abs()).collect();
    let secs = start.elapsed().as_secs_f64();
    ensure(top.len() == 4, || format!("only {} eigenvalues", top.len()))?;
    for (got, want) in top.iter().zip([0.25, 0.25, 0.125, 0.125]) {
        ensure((got - want).abs() <= 1e-2, || format!("top |eigenvalues| {top:?}"))?;
    }
    ensure(secs < 5.0, || format!("took {secs:.2}s"))?;
    Ok(format!("top |eigenvalues| {top:.5?} in {secs:.2}s"))
}

fn inner_product_goldens() -> Outcome {
    let cfg: GsscConfig = parse(&read_config("fig3.json")).unwrap();
    let plan = GsscPlan::new(&cfg).unwrap();
    let target = plan.target();
    ensure(target.resolution() == 2000, || format!("M = {}", target.resolution()))?;
    let f = plan.law().gramian().spectrum.eigenfunctions();
    let c1 = target.inner(f[0].values()).unwrap();
    let c2 = target.inner(f[1].values()).unwrap();
    ensure((c1 + 0.116).abs() <= 1e-3, || format!("<x_T, f1> = {c1}"))?;
    ensure((c2 - 0.064).abs() <= 1e-3, || format!("<x_T, f2> = {c2}"))?;
    Ok(format!("<x_T,f1> = {c1:.6}, <x_T,f2> = {c2:.6}"))
}

fn gssc_terminal_accuracy() -> Outcome {
    let start = Instant::now();
    let mut cfg: GsscConfig = parse(&read_config("fig3.json")).unwrap();
    cfg.ns = vec![100];
    cfg.steps = Some(2000);
    let plan = GsscPlan::new(&cfg).unwrap();
    let row = plan.run_case(plan.cases()[0]).unwrap();
    ensure(row.terminal_error <= row.bound, || format!("{row:?}"))?;
    let achieved = plan.limit_terminal().unwrap();
    let miss = achieved.difference(plan.target()).unwrap().norm();
    let scale = plan.target().norm();
    ensure(miss <= 1e-3 * scale, || {
        format!("limit terminal error {miss:e} vs |x_T| {scale}")
    })?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 30.0, || format!("took {secs:.1}s"))?;
    Ok(format!(
        "N=100 error {:.5} <= bound {:.5}, limit miss {miss:.2e} ({:.1e} of |x_T|), {secs:.1}s",
        row.terminal_error,
        row.bound,
        miss / scale
    ))
}

fn glqr_band() -> Outcome {
    let start = Instant::now();
    let cfg: GlqrConfig = parse(&read_config("fig4.json")).unwrap();
    ensure(cfg.ns == [100] && cfg.seeds.len() == 5, || {
        "glqr config is not N=100 over 5 seeds".into()
    })?;
    let plan = GlqrPlan::new(&cfg).unwrap();
    let rows = plan
        .cases()
        .iter()
        .map(|&c| plan.run_case(c))
        .collect::<CoreResult<Vec<_>>>()
        .unwrap();
    let op = median(rows.iter().map(|r| r.op_dist).collect());
    let l2 = median(rows.iter().map(|r| r.l2_dist).collect());
    let gap = rows.iter().map(|r| r.max_gap_pct).fold(0.0, f64::max);
    let excess = rows.iter().map(|r| r.excess_pct).fold(0.0, f64::max);
    let min_excess = rows.iter().map(|r| r.excess_pct).fold(f64::INFINITY, f64::min);
    ensure((0.02..=0.15).contains(&op), || format!("median op distance {op}"))?;
    ensure((0.05..=0.25).contains(&l2), || format!("median L2 distance {l2}"))?;
    ensure(gap <= 3.5, || format!("max trajectory gap {gap}%"))?;
    ensure(excess <= 1.0 && min_excess >= 0.0, || {
        format!("cost excess in [{min_excess}, {excess}]%")
    })?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 300.0, || format!("took {secs:.0}s"))?;
    Ok(format!(
        "median op {op:.4}, median L2 {l2:.4}, max gap {gap:.3}%, excess in [{min_excess:.4}, {excess:.4}]%, {secs:.0}s"
    ))
}

fn oracle_equivalences() -> Outcome {
    let mut r = rng(7001);

    // (a) network simulation against its step graphon twin
    let mut worst_a = 0.0f64;
    for _ in 0..20 {
        let n = r.gen_range(2..12);
        let net = NetworkSystem::new(
            r.gen_range(-1.0..1.0),
            r.gen_range(-1.0..1.0),
            random_step(&mut r, n),
            Some(random_step(&mut r, n)),
        )
        .unwrap();
        let x0 = random_function(&mut r, n);
        let phase = random_function(&mut r, n);
        let u = |t: f64| -> CoreResult<GridFunction> {
            GridFunction::new(phase.values().iter().map(|p| (2.0 * t + p).cos()).collect())
        };
        let a = simulate_network(&net, &u, x0.values(), 1.0, 500).unwrap();
        let b = simulate_graphon(&net.graphon_twin(), &u, &x0, 1.0, 500).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            worst_a = worst_a.max(x.difference(y).unwrap().sup_norm());
        }
    }
    ensure(worst_a <= 1e-12, || format!("(a) cellwise gap {worst_a:e}"))?;

    // (b) closed-form Gramian against Simpson quadrature of the dense flow
    let mut worst_b = 0.0f64;
    for _ in 0..10 {
        let m = 32;
        let g = random_rank2(&mut r, m);
        let (alpha, beta) = (r.gen_range(-0.5..0.5), r.gen_range(0.5..1.5));
        let gen = generator(alpha, g.discretize(m).unwrap().values());
        let oracle = simpson_gramian(&gen, &(DMatrix::identity(m, m) * (beta * beta)), 1.0, 200);
        let sys = GraphonSystem::new(alpha, beta, Graphon::Spectral(g), None).unwrap();
        let w = gramian_spectral(&sys, 1.0).unwrap();
        let h = random_function(&mut r, m);
        let d = w.apply(&h).unwrap().difference(&matvec(&oracle, &h)).unwrap().norm();
        worst_b = worst_b.max(d);
    }
    ensure(worst_b <= 1e-6, || format!("(b) Gramian gap {worst_b:e}"))?;

    // (c) modal Riccati against the dense matrix Riccati on rank-4 grid networks
    let mut worst_c = 0.0f64;
    for _ in 0..3 {
        let limit = Graphon::Spectral(random_rank4(&mut r, 64));
        let net = grid_network(&limit, 64).unwrap();
        let sys = NetworkSystem::new(
            r.gen_range(-1.0..1.0),
            r.gen_range(0.5..1.5),
            net.adjacency().clone(),
            None,
        )
        .unwrap();
        let prob = LqrProblem::new(r.gen_range(0.5..3.0), r.gen_range(0.0..3.0), r.gen_range(0.0..3.0), 1.0).unwrap();
        let x0 = random_function(&mut r, 64);
        let spectral = solve_graphon_riccati(&sys.graphon_twin(), &prob, 1000).unwrap();
        let matrix = solve_matrix_riccati(&sys, &prob, 1000).unwrap();
        let a = closed_loop_simulate(&sys, &spectral, &prob, &x0, 500).unwrap().cost;
        let b = closed_loop_simulate(&sys, &matrix, &prob, &x0, 500).unwrap().cost;
        worst_c = worst_c.max((a - b).abs() / b);
    }
    ensure(worst_c <= 1e-5, || format!("(c) relative cost gap {worst_c:e}"))?;

    // (d) Gray-code cut norm against the double exhaustive search
    for _ in 0..20 {
        let a = random_symmetric(&mut r, 8);
        let oracle = cut_norm_exhaustive(&a);
        let got = graphon_core::StepGraphon::new(a).unwrap().cut_norm_exact().unwrap();
        ensure((got - oracle).abs() <= 1e-14, || format!("(d) cut {got} vs {oracle}"))?;
    }
    Ok(format!(
        "(a) {worst_a:.1e} (b) {worst_b:.1e} (c) {worst_c:.1e} (d) 20/20 equal"
    ))
}

fn invariant_suites() -> Outcome {
    let mut r = rng(7002);
    for _ in 0..100 {
        let n = r.gen_range(1..=16);
        let g = random_step(&mut r, n);
        let cut = g.cut_norm_exact().unwrap();
        let op = g.operator_norm();
        let eps = 1e-12;
        ensure(
            cut <= g.l1_norm() + eps && g.l1_norm() <= g.l2_norm() + eps && op <= g.l2_norm() + eps,
            || format!("norm chain fails at N={n}"),
        )?;
        ensure(cut <= op + eps && op <= (8.0 * cut).sqrt() + eps, || {
            format!("sandwich fails at N={n}")
        })?;
    }
    for _ in 0..100 {
        let n = r.gen_range(1..=20);
        let m = n * r.gen_range(1..=8);
        let f = random_function(&mut r, m);
        ensure(f.project(n).unwrap().norm() <= f.norm() * (1.0 + 1e-14), || {
            "projection grew a norm".into()
        })?;
    }

    let mut thm4 = 0;
    for _ in 0..50 {
        let n = r.gen_range(1..=8);
        let a_n = random_step(&mut r, n);
        let a_star = Graphon::Step(random_step(&mut r, 2 * n));
        let x = random_function(&mut r, 2 * n);
        let (t, an, a) = (r.gen_range(0.0..2.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        let gap = semigroup_convergence_gap(&a_n, &a_star, an, a, t, &x, 200).unwrap();
        ensure(gap.empirical <= gap.bound, || format!("semigroup gap {gap:?}"))?;
        thm4 += 1;
    }

    let mut thm5 = 0;
    for case in 0..10 {
        let m = 48;
        let g = random_rank2(&mut r, m);
        let alpha = r.gen_range(-0.5..0.5);
        let sys = GraphonSystem::new(alpha, 1.0, Graphon::Spectral(g.clone()), None).unwrap();
        let prob = StateToStateProblem {
            x0: GridFunction::zeros(m),
            x_t: random_function(&mut r, m),
            horizon: 1.0,
        };
        let law = MinEnergyLaw::new(&sys, &prob).unwrap();
        let n = [4, 8, 12, 16, 24][case % 5];
        let limit = Graphon::Spectral(g);
        let net = if case % 2 == 0 {
            grid_network(&limit, n).unwrap()
        } else {
            sample_network(&limit, n, case as u64).unwrap()
        };
        let ns = NetworkSystem::new(
            alpha + r.gen_range(-0.1..0.1),
            1.0 + r.gen_range(-0.1..0.1),
            net.adjacency().clone(),
            None,
        )
        .unwrap();
        let rep = terminal_error_bound_law(&sys, &ns, &law, 500).unwrap();
        ensure(rep.empirical <= rep.bound, || format!("terminal gap {rep:?}"))?;
        thm5 += 1;
    }
    let mut gssc: GsscConfig = parse(&read_config("fig3.json")).unwrap();
    gssc.ns = vec![25, 50, 100];
    let plan = GsscPlan::new(&gssc).unwrap();
    for &c in plan.cases() {
        let row = plan.run_case(c).unwrap();
        ensure(row.terminal_error <= row.bound, || format!("{row:?}"))?;
        thm5 += 1;
    }

    let mut worst = 0.0f64;
    for _ in 0..20 {
        let g = random_rank2(&mut r, 40);
        let sys = GraphonSystem::new(
            r.gen_range(-1.0..1.0),
            r.gen_range(0.2..2.0),
            Graphon::Spectral(g),
            None,
        )
        .unwrap();
        let w = gramian_spectral(&sys, r.gen_range(0.1..3.0)).unwrap();
        let h = random_function(&mut r, 40);
        let back = w.apply(&w.inverse_apply(&h).unwrap()).unwrap();
        worst = worst.max(back.difference(&h).unwrap().sup_norm());
    }
    ensure(worst <= 1e-9, || format!("Gramian round trip {worst:e}"))?;

    let err = |k: usize| (rk4(|_, x: &f64| Ok(*x), 1.0, 0.0, 1.0, k).unwrap().states[k] - std::f64::consts::E).abs();
    let factor = err(16) / err(32);
    ensure((12.0..=20.0).contains(&factor), || format!("RK4 factor {factor}"))?;
    Ok(format!(
        "100 graphons, 100 functions, {thm4} semigroup and {thm5} terminal bounds, round trip {worst:.1e}, RK4 factor {factor:.2}"
    ))
}

fn run_cli(sub: &str, config: &Path, out: &Path) -> Vec<(String, Vec<u8>)> {
    let status = Command::new(env!("CARGO_BIN_EXE_graphon-control"))
        .args([sub, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .env_remove("GRAPHON_CONTROL_SEED")
        .output()
        .expect("runs the binary");
    assert!(
        status.status.success(),
        "{sub}: {}",
        String::from_utf8_lossy(&status.stderr)
    );
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let glqr = dir.path().join("glqr.json");
    fs::write(
        &glqr,
        r#"{"graphon":{"kind":"sinusoidal","resolution":200},"alpha":2,"beta":1.5,"q":3,"qT":7,
            "eta":3,"T":1,"Ns":[20,40],"seeds":[1,2],"steps":200}"#,
    )
    .unwrap();
    let runs = [
        ("spectra", configs().join("spectra.json")),
        ("sample", configs().join("sample.json")),
        ("gssc", configs().join("fig3.json")),
        ("glqr", glqr),
    ];
    let mut count = 0;
    for (k, (sub, cfg)) in runs.iter().enumerate() {
        let a = run_cli(sub, cfg, &dir.path().join(format!("a{k}")));
        let b = run_cli(sub, cfg, &dir.path().join(format!("b{k}")));
        ensure(!a.is_empty(), || format!("{sub} wrote no CSV"))?;
        ensure(a == b, || format!("{sub} outputs differ between runs"))?;
        count += a.len();
    }
    Ok(format!("{count} CSV files identical across two runs"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("spectral golden", spectral_golden),
        ("inner-product goldens", inner_product_goldens),
        ("gssc terminal accuracy", gssc_terminal_accuracy),
        ("glqr band", glqr_band),
        ("oracle equivalences", oracle_equivalences),
        ("invariant suites", invariant_suites),
        ("determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
