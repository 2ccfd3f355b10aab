//! JSON experiment descriptions. Every object rejects unknown keys, and
//! [`Validate::validate`] checks ranges before any computation runs.

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphon::{Basis, Graphon, SpectralGraphon, StepGraphon};
use crate::grid::GridFunction;

/// Tabulation grid for analytic graphons when a config gives none.
pub const DEFAULT_GRID: usize = 1000;

fn default_grid() -> usize {
    DEFAULT_GRID
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphonSpec {
    Zero {
        #[serde(default = "default_grid")]
        resolution: usize,
    },
    Constant {
        value: f64,
        #[serde(default = "default_grid")]
        resolution: usize,
    },
    /// `0.5 cos(2 pi (x - y)) + 0.25 cos(4 pi (x - y))`
    Sinusoidal {
        #[serde(default = "default_grid")]
        resolution: usize,
    },
    Fourier {
        terms: Vec<FourierTerm>,
        #[serde(default = "default_grid")]
        resolution: usize,
    },
    Step {
        n: usize,
        values: Vec<Vec<f64>>,
    },
    Spectral {
        rank: usize,
        eigenvalues: Vec<f64>,
        grid_resolution: usize,
        eigenfunctions: Vec<Vec<f64>>,
        #[serde(default)]
        tags: Option<Vec<Option<String>>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    pub eigenvalue: f64,
    pub basis: Basis,
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl GraphonSpec {
    pub fn build(&self) -> Result<Graphon> {
        let g = match self {
            GraphonSpec::Zero { resolution } => {
                check_grid(*resolution)?;
                Graphon::Spectral(SpectralGraphon::zero(*resolution))
            }
            GraphonSpec::Constant { value, resolution } => {
                check_grid(*resolution)?;
                Graphon::Spectral(SpectralGraphon::constant(*value, *resolution)?)
            }
            GraphonSpec::Sinusoidal { resolution } => {
                check_grid(*resolution)?;
                Graphon::Spectral(SpectralGraphon::sinusoidal(*resolution)?)
            }
            GraphonSpec::Fourier { terms, resolution } => {
                check_grid(*resolution)?;
                let terms: Vec<_> = terms.iter().map(|t| (t.eigenvalue, t.basis)).collect();
                Graphon::Spectral(SpectralGraphon::from_basis(&terms, *resolution)?)
            }
            GraphonSpec::Step { n, values } => {
                if *n != values.len() {
                    return Err(Error::Config(format!("n = {n} but {} rows", values.len())));
                }
                Graphon::Step(StepGraphon::from_rows(values)?)
            }
            GraphonSpec::Spectral {
                rank,
                eigenvalues,
                grid_resolution,
                eigenfunctions,
                tags,
            } => {
                let json = serde_json::json!({
                    "rank": rank,
                    "eigenvalues": eigenvalues,
                    "grid_resolution": grid_resolution,
                    "eigenfunctions": eigenfunctions,
                    "tags": tags,
                });
                Graphon::Spectral(serde_json::from_value(json)?)
            }
        };
        Ok(g)
    }
}

fn check_grid(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::Config("resolution must be positive".into()));
    }
    Ok(())
}

/// Either a number or the literal `"1/sqrt(2pi)"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Value(f64),
    Named(String),
}

impl Amplitude {
    pub fn value(&self) -> Result<f64> {
        match self {
            Amplitude::Value(v) => Ok(*v),
            Amplitude::Named(s) if s == "1/sqrt(2pi)" => Ok(1.0 / (2.0 * std::f64::consts::PI).sqrt()),
            Amplitude::Named(s) => Err(Error::Config(format!("unknown amplitude {s:?}"))),
        }
    }
}

impl Default for Amplitude {
    fn default() -> Self {
        Amplitude::Named("1/sqrt(2pi)".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    /// `amplitude * exp(-scale (x - center)^2)`, sampled at cell midpoints.
    Gaussian {
        center: f64,
        scale: f64,
        #[serde(default)]
        amplitude: Amplitude,
    },
    Tabulated {
        values: Vec<f64>,
    },
}

impl TargetSpec {
    /// The target on an `m`-cell grid. A tabulated target must have a
    /// resolution dividing `m`.
    pub fn build(&self, m: usize) -> Result<GridFunction> {
        match self {
            TargetSpec::Gaussian {
                center,
                scale,
                amplitude,
            } => {
                let a = amplitude.value()?;
                GridFunction::from_fn(m, |x| a * (-scale * (x - center).powi(2)).exp())
            }
            TargetSpec::Tabulated { values } => GridFunction::new(values.clone())?.refine(m),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum X0Spec {
    Zero,
    Constant {
        value: f64,
    },
    /// Independent uniform draws per node. The generator is SplitMix64
    /// seeded with `seed ^ rotl(case_seed, 32)`, so each (N, seed) case gets
    /// its own stream.
    UniformRandom {
        low: f64,
        high: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    Tabulated {
        values: Vec<f64>,
    },
}

impl Default for X0Spec {
    fn default() -> Self {
        X0Spec::UniformRandom {
            low: 0.0,
            high: 1.0,
            seed: None,
        }
    }
}

impl X0Spec {
    pub fn build(&self, n: usize, case_seed: u64) -> Result<GridFunction> {
        match self {
            X0Spec::Zero => Ok(GridFunction::zeros(n)),
            X0Spec::Constant { value } => GridFunction::new(vec![*value; n]),
            X0Spec::UniformRandom { low, high, seed } => {
                let mut rng = SplitMix64::seed_from_u64(seed.unwrap_or(0) ^ case_seed.rotate_left(32));
                GridFunction::new((0..n).map(|_| low + (high - low) * rng.gen::<f64>()).collect())
            }
            X0Spec::Tabulated { values } => {
                let f = GridFunction::new(values.clone())?;
                if f.resolution() == n {
                    Ok(f)
                } else {
                    f.project(n).or_else(|_| f.refine(n))
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkKind {
    /// Deterministic midpoint positions; seeds are ignored.
    #[default]
    Grid,
    /// Uniformly drawn positions, one network per seed.
    Sampled,
}

/// One network of a sweep. Grid networks carry no seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Case {
    pub n: usize,
    pub seed: Option<u64>,
}

/// Every (N, seed) pair of a sweep, sorted, without repeats.
pub fn cases(network: NetworkKind, ns: &[usize], seeds: &[u64]) -> Vec<Case> {
    let mut out: Vec<Case> = match network {
        NetworkKind::Grid => ns.iter().map(|&n| Case { n, seed: None }).collect(),
        NetworkKind::Sampled => ns
            .iter()
            .flat_map(|&n| seeds.iter().map(move |&s| Case { n, seed: Some(s) }))
            .collect(),
    };
    out.sort();
    out.dedup();
    out
}

fn sampled() -> NetworkKind {
    NetworkKind::Sampled
}

pub trait Validate {
    fn validate(&self) -> Result<()>;
}

fn check_ns(ns: &[usize]) -> Result<()> {
    if ns.contains(&0) {
        return Err(Error::Config("network sizes must be positive".into()));
    }
    Ok(())
}

fn check_seeds(network: NetworkKind, ns: &[usize], seeds: &[u64]) -> Result<()> {
    if network == NetworkKind::Sampled && seeds.is_empty() && !ns.is_empty() {
        return Err(Error::Config("sampled networks need at least one seed".into()));
    }
    Ok(())
}

fn check_horizon(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Config(format!("T must be positive, got {t}")));
    }
    Ok(())
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::Config(format!("{name} must be finite")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectraConfig {
    pub graphon: GraphonSpec,
    /// Cells of the discretization to decompose; defaults to the graphon grid.
    #[serde(default)]
    pub n: Option<usize>,
    pub k: usize,
}

impl Validate for SpectraConfig {
    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n == Some(0) {
            return Err(Error::Config("n and k must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub graphon: GraphonSpec,
    #[serde(rename = "Ns")]
    pub ns: Vec<usize>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default = "sampled")]
    pub network: NetworkKind,
    /// Distance resolution; defaults to the capped lcm rule.
    #[serde(default)]
    pub resolution: Option<usize>,
}

impl Validate for SampleConfig {
    fn validate(&self) -> Result<()> {
        check_ns(&self.ns)?;
        check_seeds(self.network, &self.ns, &self.seeds)?;
        if self.resolution == Some(0) {
            return Err(Error::Config("resolution must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GsscConfig {
    pub graphon: GraphonSpec,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "one")]
    pub beta: f64,
    pub target: TargetSpec,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "Ns")]
    pub ns: Vec<usize>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    /// RK4 steps over `[0, T]`; defaults to 1000 per unit time.
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub network: NetworkKind,
    /// State grid of the limit system; defaults to the graphon grid.
    #[serde(default)]
    pub resolution: Option<usize>,
}

fn one() -> f64 {
    1.0
}

impl Validate for GsscConfig {
    fn validate(&self) -> Result<()> {
        check_horizon(self.horizon)?;
        check_ns(&self.ns)?;
        check_seeds(self.network, &self.ns, &self.seeds)?;
        check_finite("alpha", self.alpha)?;
        check_finite("beta", self.beta)?;
        if self.steps == Some(0) || self.resolution == Some(0) {
            return Err(Error::Config("steps and resolution must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlqrConfig {
    pub graphon: GraphonSpec,
    pub alpha: f64,
    pub beta: f64,
    pub q: f64,
    #[serde(rename = "qT")]
    pub q_t: f64,
    pub eta: f64,
    #[serde(rename = "T", default = "default_glqr_horizon")]
    pub horizon: f64,
    #[serde(rename = "Ns")]
    pub ns: Vec<usize>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub x0: X0Spec,
    /// Closed-loop RK4 steps over `[0, T]`; defaults to 1000 per unit time.
    /// Riccati equations are solved with twice as many.
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default = "sampled")]
    pub network: NetworkKind,
    /// Distance resolution; defaults to the capped lcm rule.
    #[serde(default)]
    pub resolution: Option<usize>,
}

/// Horizon of the LQR experiment when the config gives none.
pub const DEFAULT_GLQR_HORIZON: f64 = 2.0;

fn default_glqr_horizon() -> f64 {
    DEFAULT_GLQR_HORIZON
}

impl Validate for GlqrConfig {
    fn validate(&self) -> Result<()> {
        check_horizon(self.horizon)?;
        check_ns(&self.ns)?;
        check_seeds(self.network, &self.ns, &self.seeds)?;
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("eta", self.eta)] {
            check_finite(name, v)?;
        }
        if !(self.q >= 0.0 && self.q_t >= 0.0) || !self.q.is_finite() || !self.q_t.is_finite() {
            return Err(Error::Config("q and qT must be finite and nonnegative".into()));
        }
        if self.steps == Some(0) || self.resolution == Some(0) {
            return Err(Error::Config("steps and resolution must be positive".into()));
        }
        if let X0Spec::UniformRandom { low, high, .. } = self.x0 {
            if !(low <= high) || !low.is_finite() || !high.is_finite() {
                return Err(Error::Config("x0 needs finite low <= high".into()));
            }
        }
        Ok(())
    }
}

/// A sample, GSSC or GLQR run, tagged by `"experiment"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum SweepConfig {
    Sample(SampleConfig),
    Gssc(GsscConfig),
    Glqr(GlqrConfig),
}

impl Validate for SweepConfig {
    fn validate(&self) -> Result<()> {
        match self {
            SweepConfig::Sample(c) => c.validate(),
            SweepConfig::Gssc(c) => c.validate(),
            SweepConfig::Glqr(c) => c.validate(),
        }
    }
}

/// Parses and validates; every failure is reported as a config error.
pub fn parse<T>(json: &str) -> Result<T>
where
    T: for<'de> Deserialize<'de> + Validate,
{
    let cfg: T = serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Builds the graphon of a spec, reporting failures as config errors.
pub fn build_graphon(spec: &GraphonSpec) -> Result<Graphon> {
    spec.build().map_err(config_err)
}
