//! Graphons as kernels on `[0,1]^2` and as integral operators on `L2[0,1]`.
//!
//! Two representations are supported: step graphons on a uniform partition
//! (the kernel of a weighted graph) and finite-rank spectral graphons with
//! tabulated orthonormal eigenfunctions.

mod norms;
mod spectral;
mod step;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;

pub use norms::{graphon_distance, graphon_norms_at, KernelDistance};
pub(crate) use norms::{sampled, KernelSum};
pub use spectral::{Basis, Eigenfunction, SpectralGraphon, ORTHONORMALITY_TOL};
pub use step::{CutNorm, StepGraphon, StepKernel, CUT_NORM_EXACT_MAX_CELLS, ZERO_EIGENVALUE};

/// Either representation. JSON is untagged: the field names tell them apart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Graphon {
    Step(StepGraphon),
    Spectral(SpectralGraphon),
}

/// Result of an operator product. Products of step graphons need not be
/// symmetric, so they come back as general step kernels.
#[derive(Clone, Debug, PartialEq)]
pub enum Product {
    Step(StepKernel),
    Spectral(SpectralGraphon),
}

impl From<StepGraphon> for Graphon {
    fn from(g: StepGraphon) -> Self {
        Graphon::Step(g)
    }
}

impl From<SpectralGraphon> for Graphon {
    fn from(g: SpectralGraphon) -> Self {
        Graphon::Spectral(g)
    }
}

impl Graphon {
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        match self {
            Graphon::Step(g) => g.eval(x, y),
            Graphon::Spectral(g) => g.eval(x, y),
        }
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        match self {
            Graphon::Step(g) => g.apply(f),
            Graphon::Spectral(g) => g.apply(f),
        }
    }

    pub fn compose(&self, other: &Graphon) -> Result<Product> {
        match (self, other) {
            (Graphon::Step(u), Graphon::Step(w)) => Ok(Product::Step(u.compose(w)?)),
            (Graphon::Spectral(u), Graphon::Spectral(w)) => Ok(Product::Spectral(u.compose(w)?)),
            _ => Err(Error::Representation(
                "cannot compose a step graphon with a spectral graphon".into(),
            )),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        match self {
            Graphon::Step(g) => g.l2_norm(),
            Graphon::Spectral(g) => g.l2_norm(),
        }
    }

    pub fn operator_norm(&self) -> f64 {
        match self {
            Graphon::Step(g) => g.operator_norm(),
            Graphon::Spectral(g) => g.operator_norm(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Graphon::Step(g) => g.values().iter().all(|v| *v == 0.0),
            Graphon::Spectral(g) => g.rank() == 0,
        }
    }

    /// Cell count of a step graphon, tabulation grid of a spectral one.
    pub fn resolution(&self) -> usize {
        match self {
            Graphon::Step(g) => g.n(),
            Graphon::Spectral(g) => g.resolution(),
        }
    }

    /// Step graphon on the uniform `m`-partition. Step graphons whose cells
    /// divide `m` are refined exactly; everything else is sampled at cell
    /// midpoints.
    pub fn discretize(&self, m: usize) -> Result<StepGraphon> {
        match self {
            Graphon::Spectral(g) => g.discretize(m),
            Graphon::Step(g) if m > 0 && m % g.n() == 0 => g.refine(m),
            Graphon::Step(g) => {
                if m == 0 {
                    return Err(Error::argument("resolution must be positive"));
                }
                StepGraphon::from_sampled(StepKernel::sample(m, |x, y| {
                    g.eval(x, y).expect("midpoints lie in the unit square")
                }))
            }
        }
    }

    /// Nonzero spectrum with eigenfunctions. Step graphons go through a full
    /// symmetric eigendecomposition.
    pub fn finite_spectrum(&self) -> Result<SpectralGraphon> {
        match self {
            Graphon::Spectral(g) => Ok(g.clone()),
            Graphon::Step(g) => g.spectral_decomposition(g.n()),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
