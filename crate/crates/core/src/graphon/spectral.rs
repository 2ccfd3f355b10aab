use std::f64::consts::{SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{check_unit, common_resolution, midpoint, GridFunction};

use super::step::StepGraphon;

/// Orthonormality tolerance for tabulated eigenfunctions (midpoint quadrature).
pub const ORTHONORMALITY_TOL: f64 = 1e-8;

/// Closed forms for the Fourier eigenfunctions used by the analytic graphons.
///
/// Text form: `const`, `cos:k`, `sin:k` for `1`, `sqrt2 cos(2 pi k x)` and
/// `sqrt2 sin(2 pi k x)` with `k >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    Constant,
    Cos(u32),
    Sin(u32),
}

impl Basis {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Basis::Constant => 1.0,
            Basis::Cos(k) => SQRT_2 * (TAU * k as f64 * x).cos(),
            Basis::Sin(k) => SQRT_2 * (TAU * k as f64 * x).sin(),
        }
    }

    pub fn tabulate(&self, resolution: usize) -> Result<GridFunction> {
        GridFunction::from_fn(resolution, |x| self.eval(x))
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Constant => f.write_str("const"),
            Basis::Cos(k) => write!(f, "cos:{k}"),
            Basis::Sin(k) => write!(f, "sin:{k}"),
        }
    }
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "const" {
            return Ok(Basis::Constant);
        }
        let bad = || Error::invalid(format!("unknown eigenfunction tag {s:?}"));
        let (kind, k) = s.split_once(':').ok_or_else(bad)?;
        let k: u32 = k.parse().map_err(|_| bad())?;
        if k == 0 {
            return Err(bad());
        }
        match kind {
            "cos" => Ok(Basis::Cos(k)),
            "sin" => Ok(Basis::Sin(k)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for Basis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Basis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A tabulated eigenfunction, optionally with a closed form used for
/// pointwise evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigenfunction {
    values: GridFunction,
    basis: Option<Basis>,
}

impl Eigenfunction {
    pub fn tabulated(values: GridFunction) -> Self {
        Eigenfunction { values, basis: None }
    }

    pub fn from_basis(basis: Basis, resolution: usize) -> Result<Self> {
        Ok(Eigenfunction {
            values: basis.tabulate(resolution)?,
            basis: Some(basis),
        })
    }

    pub fn values(&self) -> &GridFunction {
        &self.values
    }

    pub fn basis(&self) -> Option<Basis> {
        self.basis
    }

    /// Closed form when tagged, otherwise the tabulated cell value.
    pub fn eval(&self, x: f64) -> f64 {
        match self.basis {
            Some(b) => b.eval(x),
            None => self.values.values()[crate::grid::cell_index(x, self.values.resolution())],
        }
    }
}

/// A finite-rank graphon `W(x,y) = sum_l lambda_l f_l(x) f_l(y)` with
/// orthonormal eigenfunctions tabulated on a shared uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectralJson", into = "SpectralJson")]
pub struct SpectralGraphon {
    resolution: usize,
    eigenvalues: Vec<f64>,
    eigenfunctions: Vec<Eigenfunction>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectralJson {
    rank: usize,
    eigenvalues: Vec<f64>,
    grid_resolution: usize,
    eigenfunctions: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tags: Option<Vec<Option<String>>>,
}

impl TryFrom<SpectralJson> for SpectralGraphon {
    type Error = Error;

    fn try_from(raw: SpectralJson) -> Result<Self> {
        let d = raw.rank;
        if raw.eigenvalues.len() != d || raw.eigenfunctions.len() != d {
            return Err(Error::invalid(format!(
                "rank {d} needs {d} eigenvalues and eigenfunctions, got {} and {}",
                raw.eigenvalues.len(),
                raw.eigenfunctions.len()
            )));
        }
        let tags = match raw.tags {
            Some(t) if t.len() != d => return Err(Error::invalid(format!("{} tags for rank {d}", t.len()))),
            Some(t) => t,
            None => vec![None; d],
        };
        let mut fs = Vec::with_capacity(d);
        for (values, tag) in raw.eigenfunctions.into_iter().zip(tags) {
            if values.len() != raw.grid_resolution {
                return Err(Error::invalid(format!(
                    "eigenfunction has {} cells, grid_resolution is {}",
                    values.len(),
                    raw.grid_resolution
                )));
            }
            let basis = tag.map(|t| t.parse::<Basis>()).transpose()?;
            fs.push(Eigenfunction {
                values: GridFunction::new(values)?,
                basis,
            });
        }
        SpectralGraphon::new(raw.grid_resolution, raw.eigenvalues, fs)
    }
}

impl From<SpectralGraphon> for SpectralJson {
    fn from(g: SpectralGraphon) -> Self {
        let tagged = g.eigenfunctions.iter().any(|f| f.basis.is_some());
        SpectralJson {
            rank: g.rank(),
            grid_resolution: g.resolution,
            tags: tagged.then(|| {
                g.eigenfunctions
                    .iter()
                    .map(|f| f.basis.map(|b| b.to_string()))
                    .collect()
            }),
            eigenvalues: g.eigenvalues,
            eigenfunctions: g.eigenfunctions.into_iter().map(|f| f.values.into_values()).collect(),
        }
    }
}

impl SpectralGraphon {
    /// Validates nonzero finite eigenvalues, a shared grid, orthonormality to
    /// [`ORTHONORMALITY_TOL`], and kernel values in `[-1, 1]` on the grid.
    pub fn new(resolution: usize, eigenvalues: Vec<f64>, eigenfunctions: Vec<Eigenfunction>) -> Result<Self> {
        let g = Self::checked_parts(resolution, eigenvalues, eigenfunctions)?;
        g.check_kernel_bound()?;
        Ok(g)
    }

    fn checked_parts(resolution: usize, eigenvalues: Vec<f64>, eigenfunctions: Vec<Eigenfunction>) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::invalid("grid resolution must be positive"));
        }
        if eigenvalues.len() != eigenfunctions.len() {
            return Err(Error::invalid("eigenvalue and eigenfunction counts differ"));
        }
        if let Some(l) = eigenvalues.iter().find(|l| !l.is_finite() || **l == 0.0) {
            return Err(Error::invalid(format!("eigenvalue {l} must be finite and nonzero")));
        }
        if let Some(f) = eigenfunctions.iter().find(|f| f.values.resolution() != resolution) {
            return Err(Error::invalid(format!(
                "eigenfunction at resolution {} on a grid of {resolution}",
                f.values.resolution()
            )));
        }
        for (k, fk) in eigenfunctions.iter().enumerate() {
            for (l, fl) in eigenfunctions.iter().enumerate().skip(k) {
                let ip = fk.values.dot_same(&fl.values);
                let target = if k == l { 1.0 } else { 0.0 };
                if (ip - target).abs() > ORTHONORMALITY_TOL {
                    return Err(Error::invalid(format!(
                        "eigenfunctions {k} and {l} have inner product {ip}"
                    )));
                }
            }
        }
        Ok(SpectralGraphon {
            resolution,
            eigenvalues,
            eigenfunctions,
        })
    }

    fn check_kernel_bound(&self) -> Result<()> {
        let worst: f64 = self
            .eigenvalues
            .iter()
            .zip(&self.eigenfunctions)
            .map(|(l, f)| l.abs() * f.values.sup_norm().powi(2))
            .sum();
        if worst <= 1.0 + 1e-12 {
            return Ok(());
        }
        let m = self.resolution;
        for i in 0..m {
            for j in i..m {
                let v = self.kernel_on_grid(i, j);
                if v.abs() > 1.0 + 1e-9 {
                    return Err(Error::invalid(format!(
                        "kernel value {v} at cells ({i}, {j}) is outside [-1, 1]"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Skips the orthonormality and range checks; used for truncated
    /// decompositions, which need not stay inside `[-1, 1]`.
    pub(crate) fn from_parts_unchecked(
        resolution: usize,
        eigenvalues: Vec<f64>,
        eigenfunctions: Vec<Eigenfunction>,
    ) -> Self {
        SpectralGraphon {
            resolution,
            eigenvalues,
            eigenfunctions,
        }
    }

    pub fn from_basis(terms: &[(f64, Basis)], resolution: usize) -> Result<Self> {
        let mut eigenvalues = Vec::with_capacity(terms.len());
        let mut fs = Vec::with_capacity(terms.len());
        for &(l, b) in terms {
            eigenvalues.push(l);
            fs.push(Eigenfunction::from_basis(b, resolution)?);
        }
        Self::new(resolution, eigenvalues, fs)
    }

    /// `0.5 cos(2 pi (x-y)) + 0.25 cos(4 pi (x-y))`: eigenvalues 1/4 on
    /// `sqrt2 cos 2 pi x`, `sqrt2 sin 2 pi x` and 1/8 on the `4 pi` pair.
    pub fn sinusoidal(resolution: usize) -> Result<Self> {
        Self::from_basis(
            &[
                (0.25, Basis::Cos(1)),
                (0.125, Basis::Cos(2)),
                (0.25, Basis::Sin(1)),
                (0.125, Basis::Sin(2)),
            ],
            resolution,
        )
    }

    pub fn constant(c: f64, resolution: usize) -> Result<Self> {
        if c == 0.0 {
            return Ok(Self::zero(resolution));
        }
        Self::from_basis(&[(c, Basis::Constant)], resolution)
    }

    pub fn zero(resolution: usize) -> Self {
        assert!(resolution > 0);
        SpectralGraphon {
            resolution,
            eigenvalues: Vec::new(),
            eigenfunctions: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenfunctions(&self) -> &[Eigenfunction] {
        &self.eigenfunctions
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        check_unit("x", x)?;
        check_unit("y", y)?;
        Ok(self.kernel_at(x, y))
    }

    pub(crate) fn kernel_at(&self, x: f64, y: f64) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.eigenfunctions)
            .map(|(l, f)| l * f.eval(x) * f.eval(y))
            .sum()
    }

    fn kernel_on_grid(&self, i: usize, j: usize) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.eigenfunctions)
            .map(|(l, f)| l * f.values.values()[i] * f.values.values()[j])
            .sum()
    }

    /// `sum_l lambda_l <f, f_l> f_l` at the finer of the two grids.
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        let m = common_resolution(self.resolution, f.resolution())?;
        let f = f.refine(m)?;
        let mut out = GridFunction::zeros(m);
        for (l, ef) in self.eigenvalues.iter().zip(&self.eigenfunctions) {
            let e = ef.values.refine(m)?;
            out.axpy(l * f.dot_same(&e), &e);
        }
        Ok(out)
    }

    /// `base h + sum_l coeffs[l] <h, f_l> f_l`, the action of any operator
    /// diagonal in this eigenbasis with value `base` on the complement.
    pub(crate) fn modal_map(&self, base: f64, coeffs: &[f64], h: &GridFunction) -> Result<GridFunction> {
        debug_assert_eq!(coeffs.len(), self.rank());
        if self.rank() == 0 {
            return Ok(h.scaled(base));
        }
        let m = common_resolution(self.resolution, h.resolution())?;
        let h = h.refine(m)?;
        let mut out = h.scaled(base);
        for (c, ef) in coeffs.iter().zip(&self.eigenfunctions) {
            let e = ef.values.refine(m)?;
            out.axpy(c * h.dot_same(&e), &e);
        }
        Ok(out)
    }

    /// Product of two graphons sharing an eigenfunction list: eigenvalues multiply.
    pub fn compose(&self, other: &SpectralGraphon) -> Result<SpectralGraphon> {
        if self.resolution != other.resolution || self.eigenfunctions != other.eigenfunctions {
            return Err(Error::Representation(
                "spectral composition needs identical eigenfunction lists".into(),
            ));
        }
        let eigenvalues = self
            .eigenvalues
            .iter()
            .zip(&other.eigenvalues)
            .map(|(a, b)| a * b)
            .collect();
        Ok(SpectralGraphon::from_parts_unchecked(
            self.resolution,
            eigenvalues,
            self.eigenfunctions.clone(),
        ))
    }

    /// Parseval: `sqrt(sum lambda^2)`.
    pub fn l2_norm(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l * l).sum::<f64>().sqrt()
    }

    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, l| m.max(l.abs()))
    }

    /// Midpoint sampling of the kernel on the uniform `m`-partition.
    pub fn discretize(&self, m: usize) -> Result<StepGraphon> {
        if m == 0 {
            return Err(Error::argument("resolution must be positive"));
        }
        let tables = self.midpoint_tables(m);
        let mut values = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v: f64 = self.eigenvalues.iter().zip(&tables).map(|(l, t)| l * t[i] * t[j]).sum();
                values[(i, j)] = v;
                values[(j, i)] = v;
            }
        }
        StepGraphon::from_sampled(values)
    }

    /// Eigenfunction values at the midpoints of the `m`-partition.
    pub(crate) fn midpoint_tables(&self, m: usize) -> Vec<Vec<f64>> {
        self.eigenfunctions
            .iter()
            .map(|f| (0..m).map(|i| f.eval(midpoint(i, m))).collect())
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
