//! Piecewise-constant functions on uniform partitions of `[0, 1]`.
//!
//! A [`GridFunction`] with resolution `M` stores one value per cell
//! `P_i = [i/M, (i+1)/M)` and represents `sum_i values[i] * 1_{P_i}`. All
//! quadrature is exact cell arithmetic, so `<f, h> = (1/M) sum_i f_i h_i`.
//! Grids of different resolution are combined only when one resolution
//! divides the other; the coarser function is refined by replication.
//!
//! The vector <-> function correspondence used for network systems is the
//! identity on cell values: node `i` of an `N`-node network owns cell `P_i`
//! of the uniform `N`-partition.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridFunctionJson", into = "GridFunctionJson")]
pub struct GridFunction {
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFunctionJson {
    resolution: usize,
    values: Vec<f64>,
}

impl TryFrom<GridFunctionJson> for GridFunction {
    type Error = Error;

    fn try_from(raw: GridFunctionJson) -> Result<Self> {
        if raw.resolution != raw.values.len() {
            return Err(Error::invalid(format!(
                "resolution {} does not match {} values",
                raw.resolution,
                raw.values.len()
            )));
        }
        GridFunction::new(raw.values)
    }
}

impl From<GridFunction> for GridFunctionJson {
    fn from(f: GridFunction) -> Self {
        GridFunctionJson {
            resolution: f.values.len(),
            values: f.values,
        }
    }
}

/// Cell index containing `x`: right-open cells, the last cell closed at 1.
pub(crate) fn cell_index(x: f64, cells: usize) -> usize {
    ((x * cells as f64).floor() as usize).min(cells - 1)
}

pub(crate) fn midpoint(i: usize, cells: usize) -> f64 {
    (i as f64 + 0.5) / cells as f64
}

pub(crate) fn check_unit(what: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain { what, value })
    }
}

/// Finest of two resolutions when one divides the other.
pub(crate) fn common_resolution(a: usize, b: usize) -> Result<usize> {
    if a % b == 0 {
        Ok(a)
    } else if b % a == 0 {
        Ok(b)
    } else {
        Err(Error::resolution(format!("neither of {a} and {b} divides the other")))
    }
}

impl GridFunction {
    /// Wraps cell values; rejects an empty grid and non-finite entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("a grid function needs at least one cell"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at cell {i}")));
        }
        Ok(GridFunction { values })
    }

    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        debug_assert!(!values.is_empty());
        GridFunction { values }
    }

    /// The M_G vector-to-function map: cell `i` takes `v[i]`.
    pub fn from_vector(v: &[f64]) -> Result<Self> {
        Self::new(v.to_vec())
    }

    pub fn zeros(resolution: usize) -> Self {
        Self::constant(resolution, 0.0)
    }

    pub fn constant(resolution: usize, c: f64) -> Self {
        assert!(resolution > 0, "resolution must be positive");
        GridFunction {
            values: vec![c; resolution],
        }
    }

    /// Tabulates `f` by midpoint sampling.
    pub fn from_fn(resolution: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::argument("resolution must be positive"));
        }
        Self::new((0..resolution).map(|i| f(midpoint(i, resolution))).collect())
    }

    pub fn resolution(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The inverse of [`GridFunction::from_vector`].
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at `x` (right-open cells, last cell closed).
    pub fn eval(&self, x: f64) -> Result<f64> {
        check_unit("x", x)?;
        Ok(self.values[cell_index(x, self.resolution())])
    }

    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        if self.resolution() == other.resolution() {
            return Ok(self.dot_same(other));
        }
        let m = common_resolution(self.resolution(), other.resolution())?;
        let a = self.refine(m)?;
        let b = other.refine(m)?;
        Ok(a.dot_same(&b))
    }

    pub(crate) fn dot_same(&self, other: &GridFunction) -> f64 {
        debug_assert_eq!(self.resolution(), other.resolution());
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        s / self.resolution() as f64
    }

    pub fn norm(&self) -> f64 {
        self.dot_same(self).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Replicates each cell value `m / M` times.
    pub fn refine(&self, m: usize) -> Result<GridFunction> {
        let n = self.resolution();
        if m == n {
            return Ok(self.clone());
        }
        if m == 0 || m % n != 0 {
            return Err(Error::resolution(format!("cannot refine resolution {n} to {m}")));
        }
        let r = m / n;
        let values = self.values.iter().flat_map(|&v| std::iter::repeat(v).take(r)).collect();
        Ok(GridFunction { values })
    }

    /// Cell-average projection onto the uniform `n`-partition.
    pub fn project(&self, n: usize) -> Result<GridFunction> {
        let m = self.resolution();
        if n == 0 || m % n != 0 {
            return Err(Error::resolution(format!("{n} cells do not divide resolution {m}")));
        }
        if n == m {
            return Ok(self.clone());
        }
        let r = m / n;
        let values = self
            .values
            .chunks_exact(r)
            .map(|c| c.iter().sum::<f64>() / r as f64)
            .collect();
        Ok(GridFunction { values })
    }

    /// `self += a * x`; both grids must share a resolution.
    pub fn axpy(&mut self, a: f64, x: &GridFunction) {
        assert_eq!(self.resolution(), x.resolution(), "axpy: resolution mismatch");
        for (s, v) in self.values.iter_mut().zip(&x.values) {
            *s += a * v;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for v in &mut self.values {
            *v *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> GridFunction {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// `self - other` at the finer of the two resolutions.
    pub fn difference(&self, other: &GridFunction) -> Result<GridFunction> {
        let m = common_resolution(self.resolution(), other.resolution())?;
        let mut out = self.refine(m)?;
        out.axpy(-1.0, &other.refine(m)?);
        Ok(out)
    }

    /// Two-column CSV (`cell,value`) for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cell,value\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{i},{v}");
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
