mod common;

use std::f64::consts::{PI, SQRT_2, TAU};

use common::*;
use graphon_core::graphon::{Basis, SpectralGraphon};
use graphon_core::GridFunction;

fn gaussian(m: usize) -> GridFunction {
    GridFunction::from_fn(m, |x| (-50.0 * (x - 0.5).powi(2)).exp() / TAU.sqrt()).unwrap()
}

/// `int (2 pi)^{-1/2} e^{-50 (x - 1/2)^2} sqrt2 cos(2 pi k x) dx` over the real
/// line; the tails beyond the unit interval are below 1e-5.
fn gaussian_mode(k: f64) -> f64 {
    let sign = if k as i64 % 2 == 0 { 1.0 } else { -1.0 };
    sign * SQRT_2 / TAU.sqrt() * (PI / 50.0).sqrt() * (-(TAU * k).powi(2) / 200.0).exp()
}

#[test]
fn tabulated_modes_are_orthonormal() {
    let f1 = Basis::Cos(1).tabulate(1000).unwrap();
    let f2 = Basis::Cos(2).tabulate(1000).unwrap();
    assert!(f1.inner(&f2).unwrap().abs() < 1e-6);
    assert!((f1.norm() - 1.0).abs() < 1e-6);
    let one = GridFunction::constant(7, 1.0);
    assert!((one.inner(&one).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn gaussian_target_projections() {
    let x = gaussian(2000);
    let g = SpectralGraphon::sinusoidal(2000).unwrap();
    let f = g.eigenfunctions();
    let c1 = x.inner(f[0].values()).unwrap();
    let c2 = x.inner(f[1].values()).unwrap();
    assert!((c1 - gaussian_mode(1.0)).abs() < 1e-5, "{c1}");
    assert!((c2 - gaussian_mode(2.0)).abs() < 1e-5, "{c2}");
    assert!((c1 + 0.116).abs() < 1e-3 && (c2 - 0.064).abs() < 1e-3);
}

#[test]
fn projection_equals_brute_force_cell_means() {
    let mut r = rng(21);
    let f = random_function(&mut r, 512);
    let p = f.project(8).unwrap();
    for (i, v) in p.values().iter().enumerate() {
        let mean = f.values()[i * 64..(i + 1) * 64].iter().sum::<f64>() / 64.0;
        assert!((v - mean).abs() < 1e-14);
    }
    assert!(p.norm() <= f.norm());
    assert_eq!(p.project(8).unwrap(), p);
}

#[test]
fn projected_mode_matches_analytic_means() {
    let f1 = Basis::Cos(1).tabulate(1000).unwrap();
    let p = f1.project(10).unwrap();
    // midpoint tabulation error, h^2 max|f''| / 24
    let tol = 1e-6 * TAU * TAU * SQRT_2 / 24.0;
    for (i, v) in p.values().iter().enumerate() {
        let (a, b) = (i as f64 / 10.0, (i + 1) as f64 / 10.0);
        let mean = 10.0 * SQRT_2 / TAU * ((TAU * b).sin() - (TAU * a).sin());
        assert!((v - mean).abs() <= tol, "{v} {mean}");
    }
}

#[test]
fn step_operator_sees_only_cell_means() {
    let mut r = rng(22);
    for _ in 0..20 {
        let a = random_step(&mut r, 6);
        let f = random_function(&mut r, 60);
        let p = f.project(6).unwrap().refine(60).unwrap();
        let (mut x, mut y) = (f, p);
        for _ in 0..3 {
            x = a.apply(&x).unwrap();
            y = a.apply(&y).unwrap();
            assert!(x.difference(&y).unwrap().sup_norm() < 1e-12);
        }
    }
}

#[test]
fn vector_round_trip() {
    let mut r = rng(23);
    let v: Vec<f64> = random_function(&mut r, 100).into_values();
    let f = GridFunction::from_vector(&v).unwrap();
    assert_eq!(f.values(), v.as_slice());
    let mut e = vec![0.0; 10];
    e[0] = 1.0;
    let f = GridFunction::from_vector(&e).unwrap();
    assert!((f.norm() - 0.1f64.sqrt()).abs() < 1e-15);
    assert_eq!(GridFunction::from_vector(&[5.0]).unwrap().eval(0.3).unwrap(), 5.0);
}
