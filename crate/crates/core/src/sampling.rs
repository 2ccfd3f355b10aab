//! Weighted networks drawn from a graphon limit, and their distance to it.
//!
//! Node positions come from SplitMix64 (`rand_xoshiro::SplitMix64`, 64-bit
//! state) seeded with the caller's seed; each uniform draw is
//! `(next_u64 >> 11) * 2^-53`. Positions are sorted in decreasing order, so
//! node 1 carries the largest sample, and exact ties are redrawn. Under the
//! step-function mapping node `i` owns cell `i` of the uniform partition.
//!
//! Because of the decreasing labelling, a sampled network approximates the
//! reflected kernel `W(1-x, 1-y)`; kernels that depend on `x - y` only (the
//! Fourier families used in the experiments) are unchanged by it.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphon::{sampled, CutNorm, Graphon, KernelSum, StepGraphon, StepKernel};
use crate::grid::{check_unit, midpoint};

/// Cap on the default resolution used by [`network_distance`].
pub const MAX_DISTANCE_RESOLUTION: usize = 2000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkJson", into = "NetworkJson")]
pub struct WeightedNetwork {
    positions: Vec<f64>,
    adjacency: StepGraphon,
    seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkJson {
    n: usize,
    seed: Option<u64>,
    positions: Vec<f64>,
    adjacency: Vec<Vec<f64>>,
}

impl TryFrom<NetworkJson> for WeightedNetwork {
    type Error = Error;

    fn try_from(raw: NetworkJson) -> Result<Self> {
        if raw.n != raw.positions.len() || raw.n != raw.adjacency.len() {
            return Err(Error::invalid(format!(
                "n = {} but {} positions and {} adjacency rows",
                raw.n,
                raw.positions.len(),
                raw.adjacency.len()
            )));
        }
        check_positions(&raw.positions)?;
        Ok(WeightedNetwork {
            positions: raw.positions,
            adjacency: StepGraphon::from_rows(&raw.adjacency)?,
            seed: raw.seed,
        })
    }
}

impl From<WeightedNetwork> for NetworkJson {
    fn from(net: WeightedNetwork) -> Self {
        NetworkJson {
            n: net.size(),
            seed: net.seed,
            positions: net.positions,
            adjacency: net.adjacency.rows(),
        }
    }
}

fn check_positions(positions: &[f64]) -> Result<()> {
    if positions.is_empty() {
        return Err(Error::invalid("a network needs at least one node"));
    }
    for &p in positions {
        check_unit("position", p)?;
    }
    if positions.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::invalid("positions must be sorted in decreasing order"));
    }
    Ok(())
}

impl WeightedNetwork {
    /// Evaluates `g` at the given positions. Ties are allowed here, so
    /// degenerate configurations can be built by hand.
    pub fn from_positions(g: &Graphon, positions: Vec<f64>, seed: Option<u64>) -> Result<Self> {
        check_positions(&positions)?;
        let n = positions.len();
        let mut values = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = g.eval(positions[i], positions[j])?;
                values[(i, j)] = v;
                values[(j, i)] = v;
            }
        }
        Ok(WeightedNetwork {
            positions,
            adjacency: StepGraphon::new(values)?,
            seed,
        })
    }

    pub fn size(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn adjacency(&self) -> &StepGraphon {
        &self.adjacency
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// The step graphon `W_G` of the network on the uniform partition.
    pub fn step_graphon(&self) -> Graphon {
        Graphon::Step(self.adjacency.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `n` positions from the seeded generator, sorted decreasing, all distinct.
pub fn sample_positions(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut positions: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    loop {
        positions.sort_by(|a, b| b.total_cmp(a));
        let mut tied = false;
        for i in 1..positions.len() {
            if positions[i] == positions[i - 1] {
                positions[i] = rng.gen::<f64>();
                tied = true;
            }
        }
        if !tied {
            return positions;
        }
    }
}

/// Network with edge weights `g(v_i, v_j)` at uniformly drawn positions.
pub fn sample_network(g: &Graphon, n: usize, seed: u64) -> Result<WeightedNetwork> {
    if n == 0 {
        return Err(Error::argument("network size must be positive"));
    }
    WeightedNetwork::from_positions(g, sample_positions(n, seed), Some(seed))
}

/// Deterministic variant: positions at the cell midpoints, decreasing.
pub fn grid_network(g: &Graphon, n: usize) -> Result<WeightedNetwork> {
    if n == 0 {
        return Err(Error::argument("network size must be positive"));
    }
    let positions = (0..n).rev().map(|i| midpoint(i, n)).collect();
    WeightedNetwork::from_positions(g, positions, None)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistanceReport {
    pub op: f64,
    pub l2: f64,
    pub cut_lower: f64,
    pub cut_upper: f64,
}

/// Default comparison resolution: `lcm(n, grid)` when at most
/// [`MAX_DISTANCE_RESOLUTION`], otherwise the largest multiple of `n` under
/// the cap (or `n` itself when `n` exceeds it).
pub fn default_distance_resolution(n: usize, grid: usize) -> usize {
    let l = lcm(n, grid);
    if l <= MAX_DISTANCE_RESOLUTION {
        l
    } else {
        n * (MAX_DISTANCE_RESOLUTION / n).max(1)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// Norms of `W_G - discretize(g, m)` on the `m`-cell grid.
///
/// `m` must be a multiple of the network size; a step limit must also have
/// its cell count dividing `m`. With `None` the default resolution is used.
pub fn network_distance(net: &WeightedNetwork, g: &Graphon, m: Option<usize>) -> Result<DistanceReport> {
    let n = net.size();
    let m = m.unwrap_or_else(|| default_distance_resolution(n, g.resolution()));
    let sum = KernelSum::new(m)?.step(1.0, net.adjacency.kernel())?;
    let d = sampled(sum, -1.0, g)?.distance();
    let cut = if m <= crate::graphon::CUT_NORM_EXACT_MAX_CELLS {
        let diff = net.adjacency.kernel().refine(m)?.values() - g.discretize(m)?.values();
        let exact = StepKernel::new(diff)?.cut_norm_exact()?;
        CutNorm {
            lower: exact,
            upper: exact,
        }
    } else {
        CutNorm::from_operator_norm(d.operator)
    };
    Ok(DistanceReport {
        op: d.operator,
        l2: d.l2,
        cut_lower: cut.lower,
        cut_upper: cut.upper,
    })
}

/// CSV rows `N,seed,op,l2,cut_lo,cut_hi`; `seed` is empty for grid networks.
pub fn distance_table(rows: &[(usize, Option<u64>, DistanceReport)]) -> String {
    let mut out = String::from("N,seed,op,l2,cut_lo,cut_hi\n");
    for (n, seed, d) in rows {
        let seed = seed.map(|s| s.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{n},{seed},{},{},{},{}", d.op, d.l2, d.cut_lower, d.cut_upper);
    }
    out
}
