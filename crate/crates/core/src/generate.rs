//! Network generators. Every generator produces rows that sum to one by
//! construction rather than by rescaling.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io::EdgeList;
use crate::network::InfluenceNetwork;

/// Default weight each star leaf places on the hub.
pub const STAR_HUB_WEIGHT: f64 = 0.625;

/// Random rows are integer partitions of this many units.
const RANDOM_UNITS: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    Complete,
    Star,
    ReciprocalPair,
    UniformNeighbor,
    RandomRowStochastic,
}

impl GeneratorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorKind::Complete => "complete",
            GeneratorKind::Star => "star",
            GeneratorKind::ReciprocalPair => "reciprocal-pair",
            GeneratorKind::UniformNeighbor => "uniform-neighbor",
            GeneratorKind::RandomRowStochastic => "random-row-stochastic",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "complete" => GeneratorKind::Complete,
            "star" => GeneratorKind::Star,
            "reciprocal-pair" => GeneratorKind::ReciprocalPair,
            "uniform-neighbor" | "uniform-neighbor-from-edgelist" => GeneratorKind::UniformNeighbor,
            "random-row-stochastic" | "random" => GeneratorKind::RandomRowStochastic,
            other => return Err(Error::input(format!("unknown generator '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorParams {
    /// `w_ij = 1/n` for all pairs.
    Complete { n: usize },
    /// Agent 1 is the hub and listens to everyone equally; every other agent
    /// puts `hub_weight` on the hub and the rest on itself.
    Star { n: usize, hub_weight: f64 },
    /// The last two agents listen only to each other; everyone else listens
    /// only to itself.
    ReciprocalPair { n: usize },
    /// Undirected adjacency; each agent spreads its weight evenly over its
    /// neighbours (and itself when `self_loops`).
    UniformNeighbor {
        n: usize,
        edges: Vec<(usize, usize)>,
        self_loops: bool,
    },
    /// Each agent keeps a self-loop and each other agent with probability
    /// `density`, then splits `2^20` units of weight at random cut points.
    RandomRowStochastic { n: usize, density: f64 },
}

impl GeneratorParams {
    /// Builds adjacency for the uniform-neighbour generator from an edge-list
    /// file. Weights in the file are ignored and every pair is undirected.
    pub fn uniform_neighbor_from_file(path: &Path, self_loops: bool) -> Result<Self> {
        let el = EdgeList::read(path)?;
        Ok(GeneratorParams::UniformNeighbor {
            n: el.n,
            edges: el.edges.iter().map(|&(i, j, _)| (i, j)).collect(),
            self_loops,
        })
    }

    pub fn kind(&self) -> GeneratorKind {
        match self {
            GeneratorParams::Complete { .. } => GeneratorKind::Complete,
            GeneratorParams::Star { .. } => GeneratorKind::Star,
            GeneratorParams::ReciprocalPair { .. } => GeneratorKind::ReciprocalPair,
            GeneratorParams::UniformNeighbor { .. } => GeneratorKind::UniformNeighbor,
            GeneratorParams::RandomRowStochastic { .. } => GeneratorKind::RandomRowStochastic,
        }
    }
}

/// Generates a network; deterministic for a given `seed`.
pub fn generate(params: &GeneratorParams, seed: u64) -> Result<InfluenceNetwork> {
    match *params {
        GeneratorParams::Complete { n } => {
            require_n(n, 1)?;
            InfluenceNetwork::new(n, vec![1.0 / n as f64; n * n])
        }
        GeneratorParams::Star { n, hub_weight } => {
            require_n(n, 2)?;
            if !(hub_weight > 0.0 && hub_weight <= 1.0) {
                return Err(Error::input("hub weight must lie in (0, 1]"));
            }
            let mut w = vec![0.0; n * n];
            w[..n].fill(1.0 / n as f64);
            for i in 1..n {
                w[i * n] = hub_weight;
                w[i * n + i] = 1.0 - hub_weight;
            }
            InfluenceNetwork::new(n, w)
        }
        GeneratorParams::ReciprocalPair { n } => {
            require_n(n, 2)?;
            let mut w = vec![0.0; n * n];
            for i in 0..n - 2 {
                w[i * n + i] = 1.0;
            }
            w[(n - 2) * n + (n - 1)] = 1.0;
            w[(n - 1) * n + (n - 2)] = 1.0;
            InfluenceNetwork::new(n, w)
        }
        GeneratorParams::UniformNeighbor {
            n,
            ref edges,
            self_loops,
        } => uniform_neighbor(n, edges, self_loops),
        GeneratorParams::RandomRowStochastic { n, density } => {
            require_n(n, 1)?;
            if !(0.0..=1.0).contains(&density) {
                return Err(Error::input("density must lie in [0, 1]"));
            }
            Ok(random_row_stochastic(n, density, &mut ChaCha8Rng::seed_from_u64(seed)))
        }
    }
}

fn require_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::input(format!("generator needs n >= {min}, got {n}")));
    }
    Ok(())
}

fn uniform_neighbor(n: usize, edges: &[(usize, usize)], self_loops: bool) -> Result<InfluenceNetwork> {
    require_n(n, 1)?;
    let mut adj = vec![false; n * n];
    for &(i, j) in edges {
        if i >= n || j >= n {
            return Err(Error::input(format!("edge ({}, {}) outside {n} agents", i + 1, j + 1)));
        }
        adj[i * n + j] = true;
        adj[j * n + i] = true;
    }
    if self_loops {
        for i in 0..n {
            adj[i * n + i] = true;
        }
    }
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        let row = &adj[i * n..(i + 1) * n];
        let deg = row.iter().filter(|&&a| a).count();
        if deg == 0 {
            return Err(Error::input(format!("agent {} has no neighbours", i + 1)));
        }
        for j in 0..n {
            if row[j] {
                w[i * n + j] = 1.0 / deg as f64;
            }
        }
    }
    InfluenceNetwork::new(n, w)
}

/// Rows are dyadic: weights are integer multiples of `2^-20` summing to
/// exactly one.
pub(crate) fn random_row_stochastic<R: Rng>(n: usize, density: f64, rng: &mut R) -> InfluenceNetwork {
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        let support: Vec<usize> = (0..n)
            .filter(|&j| j == i || rng.random_bool(density))
            .collect();
        let mut cuts: Vec<u64> = (0..support.len() - 1)
            .map(|_| rng.random_range(0..=RANDOM_UNITS))
            .collect();
        cuts.push(0);
        cuts.push(RANDOM_UNITS);
        cuts.sort_unstable();
        for (&j, pair) in support.iter().zip(cuts.windows(2)) {
            w[i * n + j] = (pair[1] - pair[0]) as f64 / RANDOM_UNITS as f64;
        }
    }
    InfluenceNetwork::new(n, w).expect("dyadic rows sum to one exactly")
}
