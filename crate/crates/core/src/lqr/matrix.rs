//! Dense matrix Riccati equations for networks,
//! `P' = A^T P + P A - P B B^T P + C^T C`, `P(0) = P0`, with `A`, `B` and
//! `C` the operator matrices on node vectors (adjacency scaled by `1/N`).
//!
//! Storing every step would need `steps * N^2` floats, so only every
//! `stride`-th matrix is kept and the steps in between are recomputed from
//! the nearest checkpoint on demand. Recomputation repeats the forward pass
//! operation for operation, so the values are identical.

use std::cell::RefCell;

use nalgebra::DMatrix;

use super::{clamp_time, Feedback, LqrProblem};
use crate::dynamics::NetworkSystem;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::ode::{self, interp_weights, rk4_step, BLOW_UP_THRESHOLD};

/// Largest network accepted by [`solve_matrix_riccati`].
pub const MAX_MATRIX_RICCATI_NODES: usize = 300;

#[derive(Clone, Debug)]
enum InputWeight {
    /// `B B^T = s I`
    Scalar(f64),
    Matrix(DMatrix<f64>),
}

#[derive(Clone, Debug)]
struct Equation {
    a_t: DMatrix<f64>,
    s: InputWeight,
    q: DMatrix<f64>,
}

impl Equation {
    fn rhs(&self, p: &DMatrix<f64>) -> DMatrix<f64> {
        let m = &self.a_t * p;
        let mut out = m.transpose();
        out += &m;
        match &self.s {
            InputWeight::Scalar(s) => out -= (p * p) * *s,
            InputWeight::Matrix(s) => out -= p * (s * p),
        }
        out += &self.q;
        out
    }

    fn step(&self, p: &DMatrix<f64>, h: f64, time: f64) -> Result<DMatrix<f64>> {
        let next = rk4_step(&mut |_, p: &DMatrix<f64>| Ok(self.rhs(p)), 0.0, p, h)?;
        let mut sym = next.transpose();
        sym += &next;
        sym *= 0.5;
        let sup = sym.amax();
        if !(sup <= BLOW_UP_THRESHOLD) {
            return Err(Error::Numeric { time, sup });
        }
        Ok(sym)
    }
}

#[derive(Debug)]
pub struct MatrixRiccati {
    horizon: f64,
    steps: usize,
    stride: usize,
    equation: Equation,
    checkpoints: Vec<DMatrix<f64>>,
    segment: RefCell<Option<(usize, Vec<DMatrix<f64>>)>>,
}

/// Riccati equation of a network system with the cost
/// `q ||(I - eta A_N/N) x||^2 + ||u||^2` and terminal weight `qT`.
pub fn solve_matrix_riccati(net: &NetworkSystem, prob: &LqrProblem, steps: usize) -> Result<MatrixRiccati> {
    let n = net.size();
    if n > MAX_MATRIX_RICCATI_NODES {
        return Err(Error::argument(format!(
            "dense Riccati solves are limited to {MAX_MATRIX_RICCATI_NODES} nodes, got {n}"
        )));
    }
    let scale = 1.0 / n as f64;
    let eye = DMatrix::<f64>::identity(n, n);
    let a_t = (net.a.values() * scale + &eye * net.alpha).transpose();
    let s = match &net.b {
        None => InputWeight::Scalar(net.beta * net.beta),
        Some(b) => {
            let b = b.values() * scale + &eye * net.beta;
            InputWeight::Matrix(&b * b.transpose())
        }
    };
    let c = &eye - net.a.values() * (prob.eta * scale);
    let ctc = c.transpose() * &c;
    let equation = Equation {
        a_t,
        s,
        q: &ctc * prob.q,
    };
    MatrixRiccati::solve(equation, ctc * prob.q_t, prob.horizon, steps)
}

/// `P' = A^T P + P A - P B B^T P + C^T C` for arbitrary square `a`, `b`,
/// `c` and a symmetric `p0`.
pub fn solve_matrix_riccati_general(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    p0: &DMatrix<f64>,
    horizon: f64,
    steps: usize,
) -> Result<MatrixRiccati> {
    let n = a.nrows();
    for (name, m) in [("A", a), ("B", b), ("C", c), ("P0", p0)] {
        if m.shape() != (n, n) {
            return Err(Error::invalid(format!("{name} must be {n} x {n}, got {:?}", m.shape())));
        }
    }
    let asym = (p0 - p0.transpose()).amax();
    if asym > 1e-12 * p0.amax().max(1.0) {
        return Err(Error::invalid(format!("P0 is not symmetric (defect {asym})")));
    }
    let equation = Equation {
        a_t: a.transpose(),
        s: InputWeight::Matrix(b * b.transpose()),
        q: c.transpose() * c,
    };
    MatrixRiccati::solve(equation, p0.clone(), horizon, steps)
}

impl MatrixRiccati {
    fn solve(equation: Equation, p0: DMatrix<f64>, horizon: f64, steps: usize) -> Result<Self> {
        ode::check_horizon(horizon, steps)?;
        let stride = ((steps as f64).sqrt().ceil() as usize).max(1);
        let h = horizon / steps as f64;
        let mut checkpoints = vec![p0.clone()];
        let mut p = p0;
        for k in 0..steps {
            p = equation.step(&p, h, horizon * (k + 1) as f64 / steps as f64)?;
            if (k + 1) % stride == 0 {
                checkpoints.push(p.clone());
            }
        }
        Ok(MatrixRiccati {
            horizon,
            steps,
            stride,
            equation,
            checkpoints,
            segment: RefCell::new(None),
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn size(&self) -> usize {
        self.checkpoints[0].nrows()
    }

    /// Matrices `k * stride ..= min((k + 1) * stride, steps)`.
    fn recompute(&self, k: usize) -> Result<Vec<DMatrix<f64>>> {
        let h = self.horizon / self.steps as f64;
        let start = k * self.stride;
        let end = ((k + 1) * self.stride).min(self.steps);
        let mut out = Vec::with_capacity(end - start + 1);
        out.push(self.checkpoints[k].clone());
        for j in start..end {
            let t = self.horizon * (j + 1) as f64 / self.steps as f64;
            let next = self.equation.step(&out[out.len() - 1], h, t)?;
            out.push(next);
        }
        Ok(out)
    }

    fn with_matrix<R>(&self, j: usize, f: impl FnOnce(&DMatrix<f64>) -> R) -> Result<R> {
        if j % self.stride == 0 {
            return Ok(f(&self.checkpoints[j / self.stride]));
        }
        let k = j / self.stride;
        let mut cache = self.segment.borrow_mut();
        if cache.as_ref().map(|(c, _)| *c) != Some(k) {
            *cache = Some((k, self.recompute(k)?));
        }
        let (_, seg) = cache.as_ref().expect("segment was just filled");
        Ok(f(&seg[j - k * self.stride]))
    }

    /// `P_t`, linearly interpolated between steps.
    pub fn at(&self, t: f64) -> Result<DMatrix<f64>> {
        let t = clamp_time(t, self.horizon)?;
        let (k, w) = interp_weights(self.steps, self.horizon, t);
        let p = self.with_matrix(k, DMatrix::clone)?;
        if w == 0.0 {
            return Ok(p);
        }
        let q = self.with_matrix(k + 1, DMatrix::clone)?;
        Ok(p * (1.0 - w) + q * w)
    }

    pub fn terminal(&self) -> Result<DMatrix<f64>> {
        self.at(self.horizon)
    }
}

impl Feedback for MatrixRiccati {
    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn apply(&self, s: f64, x: &GridFunction) -> Result<GridFunction> {
        let n = self.size();
        if x.resolution() != n {
            return Err(Error::resolution(format!(
                "Riccati matrix of size {n} given a state of length {}",
                x.resolution()
            )));
        }
        let s = clamp_time(s, self.horizon)?;
        let (k, w) = interp_weights(self.steps, self.horizon, s);
        let v = nalgebra::DVector::from_column_slice(x.values());
        let mut y = self.with_matrix(k, |p| p * &v)?;
        if w != 0.0 {
            let z = self.with_matrix(k + 1, |p| p * &v)?;
            y = y * (1.0 - w) + z * w;
        }
        Ok(GridFunction::from_raw(y.as_slice().to_vec()))
    }
}
