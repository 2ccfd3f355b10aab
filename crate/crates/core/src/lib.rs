//! Graphon-based control of large networks of scalar linear systems.
//!
//! * [`graphon`]: step and finite-rank kernels, their norms and spectra.
//! * [`grid`]: piecewise-constant functions on uniform partitions.
//! * [`sampling`]: weighted networks drawn from a graphon limit.
//! * [`dynamics`]: network and graphon system simulation, closed-form semigroups.
//! * [`min_energy`]: spectral controllability Gramians and state-to-state control.
//! * [`lqr`]: scalar Riccati decomposition and graphon LQR.
//! * [`config`]: experiment descriptions shared with the command-line runner.
//!
//! Numerical conventions: one node per cell of the uniform partition, fixed
//! step RK4 everywhere ([`ode`]), and seeded SplitMix64 for every random draw.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod graphon;
pub mod grid;
pub mod lqr;
pub mod min_energy;
pub mod ode;
pub mod sampling;

pub use error::{Error, Result};
pub use graphon::{Graphon, SpectralGraphon, StepGraphon, StepKernel};
pub use grid::GridFunction;
