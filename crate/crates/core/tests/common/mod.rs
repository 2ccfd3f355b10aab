//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use graphon_core::graphon::{Basis, SpectralGraphon, StepGraphon};
use graphon_core::GridFunction;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// Symmetric `n x n` values uniform in `[-1, 1]`.
pub fn random_symmetric(rng: &mut SplitMix64, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-1.0..=1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

pub fn random_step(rng: &mut SplitMix64, n: usize) -> StepGraphon {
    StepGraphon::new(random_symmetric(rng, n)).unwrap()
}

pub fn random_function(rng: &mut SplitMix64, m: usize) -> GridFunction {
    GridFunction::new((0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect()).unwrap()
}

/// A rank-2 graphon on two Fourier modes. Eigenvalues lie in `(-0.25, 0.25)`
/// so the kernel stays in `[-1, 1]`.
pub fn random_rank2(rng: &mut SplitMix64, m: usize) -> SpectralGraphon {
    let l1 = rng.gen_range(0.05..0.25) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
    let l2 = rng.gen_range(0.05..0.25) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
    let k = rng.gen_range(1..4u32);
    SpectralGraphon::from_basis(&[(l1, Basis::Cos(k)), (l2, Basis::Sin(k + 1))], m).unwrap()
}

/// A rank-4 graphon on four Fourier modes, eigenvalues in `(-0.12, 0.12)`.
pub fn random_rank4(r: &mut SplitMix64, m: usize) -> SpectralGraphon {
    let mut l = || r.gen_range(0.02..0.12) * if r.gen::<bool>() { 1.0 } else { -1.0 };
    let terms = [
        (l(), Basis::Cos(1)),
        (l(), Basis::Sin(1)),
        (l(), Basis::Cos(2)),
        (l(), Basis::Sin(3)),
    ];
    SpectralGraphon::from_basis(&terms, m).unwrap()
}

/// Cut norm by trying every pair of row and column subsets.
pub fn cut_norm_exhaustive(values: &DMatrix<f64>) -> f64 {
    let n = values.nrows();
    let mut best = 0.0f64;
    for s in 0u32..(1 << n) {
        for t in 0u32..(1 << n) {
            let mut sum = 0.0;
            for i in (0..n).filter(|i| s >> i & 1 == 1) {
                for j in (0..n).filter(|j| t >> j & 1 == 1) {
                    sum += values[(i, j)];
                }
            }
            best = best.max(sum.abs());
        }
    }
    best / (n * n) as f64
}

/// Largest |eigenvalue| of a symmetric matrix by power iteration on its square.
pub fn power_iteration(a: &DMatrix<f64>, iters: usize) -> f64 {
    let n = a.nrows();
    let a2 = a * a;
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i as f64 * 0.37).sin());
    let mut lambda = 0.0;
    for _ in 0..iters {
        let w = &a2 * &v;
        lambda = w.norm() / v.norm();
        v = w / lambda.max(f64::MIN_POSITIVE);
    }
    lambda.sqrt()
}

/// The operator `alpha I + A_M / M` of a step graphon, as a matrix on cell values.
pub fn generator(alpha: f64, a: &DMatrix<f64>) -> DMatrix<f64> {
    let m = a.nrows();
    a / m as f64 + DMatrix::identity(m, m) * alpha
}

/// `int_0^T e^{tG} Q e^{tG^T} dt` by composite Simpson with `intervals` panels.
pub fn simpson_gramian(g: &DMatrix<f64>, q: &DMatrix<f64>, horizon: f64, intervals: usize) -> DMatrix<f64> {
    assert!(intervals % 2 == 0);
    let h = horizon / intervals as f64;
    let mut acc = DMatrix::zeros(g.nrows(), g.ncols());
    for k in 0..=intervals {
        let e = (g * (k as f64 * h)).exp();
        let w = if k == 0 || k == intervals {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += (&e * q * e.transpose()) * w;
    }
    acc * (h / 3.0)
}

pub fn matvec(a: &DMatrix<f64>, x: &GridFunction) -> GridFunction {
    let y = a * DVector::from_column_slice(x.values());
    GridFunction::new(y.as_slice().to_vec()).unwrap()
}

/// Composite Simpson on uniform samples (even number of intervals).
pub fn simpson(values: &[f64], horizon: f64) -> f64 {
    let n = values.len() - 1;
    assert!(n % 2 == 0);
    let h = horizon / n as f64;
    let inner: f64 = (1..n).map(|k| if k % 2 == 1 { 4.0 } else { 2.0 } * values[k]).sum();
    h / 3.0 * (values[0] + values[n] + inner)
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
