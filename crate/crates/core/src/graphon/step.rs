use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{cell_index, check_unit, common_resolution, midpoint, GridFunction};

use super::spectral::{Eigenfunction, SpectralGraphon};

/// Largest partition for which [`StepKernel::cut_norm_exact`] enumerates subsets.
pub const CUT_NORM_EXACT_MAX_CELLS: usize = 20;

/// Eigenvalues with magnitude at or below this are treated as zero by
/// spectral decompositions.
pub const ZERO_EIGENVALUE: f64 = 1e-13;

/// A kernel that is constant on the cells of a uniform partition.
///
/// Unlike [`StepGraphon`] the values are not restricted to `[-1, 1]` and
/// need not be symmetric: this is the representation for differences of
/// graphons, operator products, and cell-averaged Riccati kernels.
/// Spectral methods require a symmetric kernel.
#[derive(Clone, PartialEq)]
pub struct StepKernel {
    values: DMatrix<f64>,
    symmetric: bool,
}

impl fmt::Debug for StepKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StepKernel")
            .field("n", &self.n())
            .finish_non_exhaustive()
    }
}

/// `(1/n) * A x` on cell values: the averaging operator shared by step
/// graphons and network systems so that both produce identical floats.
pub(crate) fn averaged_matvec(a: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let n = a.nrows();
    let scale = 1.0 / n as f64;
    let xv = DVector::from_column_slice(x);
    let y = a * xv;
    y.iter().map(|v| v * scale).collect()
}

fn check_square_finite(values: &DMatrix<f64>) -> Result<()> {
    let n = values.nrows();
    if n == 0 || values.ncols() != n {
        return Err(Error::invalid(format!(
            "kernel matrix must be square and non-empty, got {}x{}",
            values.nrows(),
            values.ncols()
        )));
    }
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite entry at ({}, {})", k % n, k / n)));
    }
    Ok(())
}

fn first_asymmetry(values: &DMatrix<f64>) -> Option<(usize, usize)> {
    let n = values.nrows();
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .find(|&(i, j)| values[(i, j)] != values[(j, i)])
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if let Some(i) = rows.iter().position(|r| r.len() != n) {
        return Err(Error::invalid(format!(
            "row {i} has {} entries, expected {n}",
            rows[i].len()
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Orders eigenpair indices by descending |lambda|; ties (equal to 1e-12)
/// by descending signed value, then ascending index.
pub(crate) fn eigen_order(eigenvalues: &[f64]) -> Vec<usize> {
    let key = |l: f64| (l.abs() * 1e12).round();
    let mut idx: Vec<usize> = (0..eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| {
        let (la, lb) = (eigenvalues[a], eigenvalues[b]);
        key(lb).total_cmp(&key(la)).then(lb.total_cmp(&la)).then(a.cmp(&b))
    });
    idx
}

/// Sign convention for eigenvectors: the first entry of largest magnitude is positive.
fn normalize_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

impl StepKernel {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        check_square_finite(&values)?;
        let symmetric = first_asymmetry(&values).is_none();
        Ok(StepKernel { values, symmetric })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows_to_matrix(rows)?)
    }

    /// Caller guarantees a square, finite, exactly symmetric matrix.
    pub(crate) fn symmetric_unchecked(values: DMatrix<f64>) -> Self {
        debug_assert!(first_asymmetry(&values).is_none());
        StepKernel {
            values,
            symmetric: true,
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        assert!(n > 0);
        Self::symmetric_unchecked(DMatrix::from_element(n, n, c))
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    fn require_symmetric(&self) -> Result<()> {
        if self.symmetric {
            Ok(())
        } else {
            Err(Error::Representation("spectral methods need a symmetric kernel".into()))
        }
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        (0..n).map(|i| (0..n).map(|j| self.values[(i, j)]).collect()).collect()
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        check_unit("x", x)?;
        check_unit("y", y)?;
        let n = self.n();
        Ok(self.values[(cell_index(x, n), cell_index(y, n))])
    }

    /// Same kernel on the `m`-cell partition (`n` must divide `m`).
    pub fn refine(&self, m: usize) -> Result<StepKernel> {
        let n = self.n();
        if m == n {
            return Ok(self.clone());
        }
        if m == 0 || m % n != 0 {
            return Err(Error::resolution(format!("cannot refine {n} cells to {m}")));
        }
        let r = m / n;
        Ok(StepKernel {
            values: DMatrix::from_fn(m, m, |i, j| self.values[(i / r, j / r)]),
            symmetric: self.symmetric,
        })
    }

    /// `[Wf](x) = int W(x,y) f(y) dy`, returned at the finer of the two resolutions.
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        let n = self.n();
        let m = f.resolution();
        if m == n {
            return Ok(GridFunction::from_raw(averaged_matvec(&self.values, f.values())));
        }
        let common = common_resolution(n, m)?;
        if common == m {
            // kernel constant on coarse cells: only cell means of f matter
            let coarse = f.project(n)?;
            let y = GridFunction::from_raw(averaged_matvec(&self.values, coarse.values()));
            y.refine(m)
        } else {
            self.apply(&f.refine(n)?)
        }
    }

    /// Operator product `[UW](x,y) = int U(x,z) W(z,y) dz` on a common partition.
    pub fn compose(&self, other: &StepKernel) -> Result<StepKernel> {
        let n = common_resolution(self.n(), other.n())?;
        let u = self.refine(n)?;
        let w = other.refine(n)?;
        let mut p = &u.values * &w.values;
        p /= n as f64;
        // symmetric only when the factors commute
        StepKernel::new(p)
    }

    fn mean_abs_pow(&self, p: i32) -> f64 {
        let n = self.n() as f64;
        self.values.iter().map(|v| v.abs().powi(p)).sum::<f64>() / (n * n)
    }

    pub fn l1_norm(&self) -> f64 {
        self.mean_abs_pow(1)
    }

    pub fn l2_norm(&self) -> f64 {
        self.mean_abs_pow(2).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.amax()
    }

    /// Eigenvalues of the induced integral operator (matrix eigenvalues / n),
    /// in decomposition order.
    pub fn operator_eigenvalues(&self) -> Result<Vec<f64>> {
        self.require_symmetric()?;
        let n = self.n() as f64;
        let ev: Vec<f64> = self
            .values
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .map(|l| l / n)
            .collect();
        Ok(eigen_order(&ev).into_iter().map(|i| ev[i]).collect())
    }

    /// Largest |eigenvalue| for symmetric kernels, largest singular value otherwise.
    pub fn operator_norm(&self) -> f64 {
        match self.operator_eigenvalues() {
            Ok(ev) => ev.first().map_or(0.0, |l| l.abs()),
            Err(_) => {
                let s = self.values.clone().singular_values();
                s.max() / self.n() as f64
            }
        }
    }

    /// `sup_{S,T} |int_{S x T} W|`, attained on unions of cells.
    ///
    /// For a fixed row set `S` the best column set takes every column with a
    /// positive partial sum (or every negative one), so the search is over
    /// `2^n` row sets only, visited in Gray-code order.
    pub fn cut_norm_exact(&self) -> Result<f64> {
        let n = self.n();
        if n > CUT_NORM_EXACT_MAX_CELLS {
            return Err(Error::Size {
                n,
                max: CUT_NORM_EXACT_MAX_CELLS,
            });
        }
        let mut col_sums = vec![0.0; n];
        let mut in_set = vec![false; n];
        let mut best = 0.0f64;
        for k in 1u64..(1u64 << n) {
            let flip = k.trailing_zeros() as usize;
            let sign = if in_set[flip] { -1.0 } else { 1.0 };
            in_set[flip] = !in_set[flip];
            for (j, c) in col_sums.iter_mut().enumerate() {
                *c += sign * self.values[(flip, j)];
            }
            let (pos, neg) = col_sums
                .iter()
                .fold((0.0, 0.0), |(p, q), &c| if c > 0.0 { (p + c, q) } else { (p, q - c) });
            best = best.max(pos).max(neg);
        }
        Ok(best / (n * n) as f64)
    }

    /// Cut norm: exact for small partitions, otherwise the interval
    /// `[op^2 / 8, op]` from the cut/operator norm sandwich (lower end `0`
    /// for non-symmetric kernels, where the sandwich is not available).
    pub fn cut_norm(&self) -> CutNorm {
        match self.cut_norm_exact() {
            Ok(c) => CutNorm { lower: c, upper: c },
            Err(_) if self.symmetric => CutNorm::from_operator_norm(self.operator_norm()),
            Err(_) => CutNorm {
                lower: 0.0,
                upper: self.operator_norm(),
            },
        }
    }

    /// The `k` largest-|lambda| eigenpairs of the induced operator.
    ///
    /// Eigenfunctions are `sqrt(n) v` for unit eigenvectors `v`, so they
    /// have unit L2 norm. Numerically zero eigenvalues are dropped, so the
    /// result can have rank below `k`.
    pub fn spectral_decomposition(&self, k: usize) -> Result<SpectralGraphon> {
        self.require_symmetric()?;
        let n = self.n();
        if k == 0 || k > n {
            return Err(Error::argument(format!("rank {k} must lie in 1..={n}")));
        }
        let eig = SymmetricEigen::new(self.values.clone());
        let ev: Vec<f64> = eig.eigenvalues.iter().map(|l| l / n as f64).collect();
        let order = eigen_order(&ev);
        let root_n = (n as f64).sqrt();
        let mut eigenvalues = Vec::new();
        let mut eigenfunctions = Vec::new();
        for &i in order.iter().take(k) {
            if ev[i].abs() <= ZERO_EIGENVALUE {
                continue;
            }
            let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().map(|x| x * root_n).collect();
            normalize_sign(&mut v);
            eigenvalues.push(ev[i]);
            eigenfunctions.push(Eigenfunction::tabulated(GridFunction::from_raw(v)));
        }
        Ok(SpectralGraphon::from_parts_unchecked(n, eigenvalues, eigenfunctions))
    }

    pub(crate) fn sample(m: usize, kernel: impl Fn(f64, f64) -> f64) -> DMatrix<f64> {
        let mut values = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = kernel(midpoint(i, m), midpoint(j, m));
                values[(i, j)] = v;
                values[(j, i)] = v;
            }
        }
        values
    }
}

/// Bracket for the cut norm; `lower == upper` when computed exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutNorm {
    pub lower: f64,
    pub upper: f64,
}

impl CutNorm {
    pub fn from_operator_norm(op: f64) -> Self {
        CutNorm {
            lower: op * op / 8.0,
            upper: op,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }
}

/// A step kernel with values in `[-1, 1]`: the graphon of a weighted graph
/// on the uniform partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepGraphonJson", into = "StepGraphonJson")]
pub struct StepGraphon(StepKernel);

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepGraphonJson {
    n: usize,
    values: Vec<Vec<f64>>,
}

impl TryFrom<StepGraphonJson> for StepGraphon {
    type Error = Error;

    fn try_from(raw: StepGraphonJson) -> Result<Self> {
        if raw.n != raw.values.len() {
            return Err(Error::invalid(format!(
                "n = {} but {} rows given",
                raw.n,
                raw.values.len()
            )));
        }
        StepGraphon::from_rows(&raw.values)
    }
}

impl From<StepGraphon> for StepGraphonJson {
    fn from(g: StepGraphon) -> Self {
        StepGraphonJson {
            n: g.n(),
            values: g.0.rows(),
        }
    }
}

impl std::ops::Deref for StepGraphon {
    type Target = StepKernel;

    fn deref(&self) -> &StepKernel {
        &self.0
    }
}

impl StepGraphon {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        let kernel = StepKernel::new(values)?;
        Self::from_kernel(kernel)
    }

    pub fn from_kernel(kernel: StepKernel) -> Result<Self> {
        if let Some((i, j)) = first_asymmetry(&kernel.values) {
            return Err(Error::invalid(format!("entry ({i}, {j}) breaks symmetry")));
        }
        if let Some((k, v)) = kernel.values.iter().enumerate().find(|(_, v)| v.abs() > 1.0) {
            let n = kernel.n();
            return Err(Error::invalid(format!(
                "graphon value {v} at ({}, {}) is outside [-1, 1]",
                k % n,
                k / n
            )));
        }
        Ok(StepGraphon(kernel))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows_to_matrix(rows)?)
    }

    pub fn zero(n: usize) -> Self {
        Self::constant(n, 0.0)
    }

    pub fn constant(n: usize, c: f64) -> Self {
        assert!(c.abs() <= 1.0, "graphon values lie in [-1, 1]");
        StepGraphon(StepKernel::constant(n, c))
    }

    /// Wraps sampled kernel values; values within 1e-12 of the `[-1, 1]`
    /// bounds are clamped.
    pub(crate) fn from_sampled(mut values: DMatrix<f64>) -> Result<Self> {
        for v in values.iter_mut() {
            if v.abs() > 1.0 && v.abs() <= 1.0 + 1e-12 {
                *v = v.signum();
            }
        }
        Self::new(values)
    }

    pub fn kernel(&self) -> &StepKernel {
        &self.0
    }

    pub fn into_kernel(self) -> StepKernel {
        self.0
    }

    pub fn refine(&self, m: usize) -> Result<StepGraphon> {
        Ok(StepGraphon(self.0.refine(m)?))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
