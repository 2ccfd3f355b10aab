mod common;

use std::f64::consts::TAU;
use std::time::Instant;

use common::*;
use graphon_core::graphon::{Graphon, SpectralGraphon, StepGraphon, StepKernel};
use graphon_core::GridFunction;
use nalgebra::DMatrix;
use rand::Rng;

fn sinusoid(x: f64, y: f64) -> f64 {
    0.5 * (TAU * (x - y)).cos() + 0.25 * (2.0 * TAU * (x - y)).cos()
}

#[test]
fn apply_matches_quadrature() {
    let mut r = rng(11);
    for _ in 0..10 {
        let g = random_step(&mut r, 4);
        for m in [4, 12] {
            let f = random_function(&mut r, m);
            let got = g.apply(&f).unwrap();
            let h = 1.0 / m as f64;
            for i in 0..m {
                let x = (i as f64 + 0.5) * h;
                let want: f64 = (0..m)
                    .map(|j| g.eval(x, (j as f64 + 0.5) * h).unwrap() * f.values()[j] * h)
                    .sum();
                assert!((got.values()[i] - want).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn compose_matches_cellwise_integral() {
    let mut r = rng(12);
    for _ in 0..10 {
        let u = random_step(&mut r, 3);
        let w = random_step(&mut r, 3);
        let p = u.compose(&w).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want: f64 = (0..3).map(|k| u.values()[(i, k)] * w.values()[(k, j)] / 3.0).sum();
                assert!((p.values()[(i, j)] - want).abs() < 1e-15);
            }
        }
    }
    let z = StepGraphon::zero(3);
    let w = random_step(&mut r, 3);
    assert!(z.compose(&w).unwrap().values().iter().all(|v| *v == 0.0));
}

#[test]
fn operator_norm_matches_power_iteration() {
    let mut r = rng(13);
    for _ in 0..20 {
        let a = random_symmetric(&mut r, 8);
        let g = StepGraphon::new(a.clone()).unwrap();
        let oracle = power_iteration(&(a / 8.0), 5000);
        assert!(
            (g.operator_norm() - oracle).abs() < 1e-8,
            "{} {oracle}",
            g.operator_norm()
        );
    }
}

#[test]
fn exact_cut_norm_matches_double_exhaustive_search() {
    let mut r = rng(14);
    for _ in 0..20 {
        let mut a = DMatrix::zeros(8, 8);
        for i in 0..8 {
            for j in i..8 {
                let v = if r.gen::<bool>() { 1.0 } else { -1.0 };
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        let oracle = cut_norm_exhaustive(&a);
        let got = StepGraphon::new(a).unwrap().cut_norm_exact().unwrap();
        assert!((got - oracle).abs() < 1e-15, "{got} {oracle}");
    }
}

#[test]
fn decomposition_reconstructs_step_graphon() {
    let mut r = rng(15);
    for _ in 0..10 {
        let g = random_step(&mut r, 6);
        let dec = g.spectral_decomposition(6).unwrap();
        let back = dec.discretize(6).unwrap();
        let err = (back.values() - g.values()).amax();
        assert!(err < 1e-10, "{err}");
    }
}

#[test]
fn sinusoidal_l2_norm_by_double_integral() {
    let m = 400;
    let h = 1.0 / m as f64;
    let mut sq = 0.0;
    for i in 0..m {
        for j in 0..m {
            sq += sinusoid((i as f64 + 0.5) * h, (j as f64 + 0.5) * h).powi(2) * h * h;
        }
    }
    let g = SpectralGraphon::sinusoidal(1000).unwrap();
    assert!((g.l2_norm() - sq.sqrt()).abs() < 1e-6);
    assert!((g.l2_norm() - 0.3953).abs() < 1e-4);
}

#[test]
fn discretization_is_close_to_cell_averages() {
    let g = Graphon::Spectral(SpectralGraphon::sinusoidal(1000).unwrap());
    let m = 200;
    let d = g.discretize(m).unwrap();
    // L2 distance of the step graphon from the kernel, 4x4 sub-samples per cell
    let sub = 4;
    let fine = m * sub;
    let h = 1.0 / fine as f64;
    let mut sq = 0.0;
    for i in 0..fine {
        for j in 0..fine {
            let diff = d.values()[(i / sub, j / sub)] - sinusoid((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            sq += diff * diff * h * h;
        }
    }
    assert!(sq.sqrt() < 0.02, "{}", sq.sqrt());
    let one = g.discretize(1).unwrap();
    assert!((one.values()[(0, 0)] - 0.75).abs() < 1e-12);
}

#[test]
fn sinusoidal_spectrum_at_512() {
    let start = Instant::now();
    let g = SpectralGraphon::sinusoidal(512).unwrap();
    let dec = g.discretize(512).unwrap().spectral_decomposition(6).unwrap();
    let mut top: Vec<f64> = dec.eigenvalues().iter().map(|l| l.abs()).collect();
    top.truncate(4);
    for (got, want) in top.iter().zip([0.25, 0.25, 0.125, 0.125]) {
        assert!((got - want).abs() < 1e-2, "{top:?}");
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn step_kernel_refinement_preserves_action() {
    let mut r = rng(16);
    let g = random_step(&mut r, 5);
    let fine = g.refine(20).unwrap();
    let f = random_function(&mut r, 20);
    let a = g.apply(&f).unwrap();
    let b = fine.apply(&f).unwrap();
    assert!(a.difference(&b).unwrap().sup_norm() < 1e-14);
    let k = StepKernel::new(random_symmetric(&mut r, 5)).unwrap();
    assert_eq!(k.refine(10).unwrap().n(), 10);
    let x = GridFunction::constant(5, 1.0);
    assert!((StepGraphon::constant(5, 0.3).apply(&x).unwrap().values()[2] - 0.3).abs() < 1e-15);
}
