#![allow(dead_code)]

use medop_core::{InfluenceNetwork, PrejudiceConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A probability vector. With `dyadic_bits = Some(b)` every weight is a
/// multiple of `2^-b`, which makes exact half-mass splits common.
pub fn random_weights<R: Rng>(rng: &mut R, n: usize, dyadic_bits: Option<u32>) -> Vec<f64> {
    match dyadic_bits {
        Some(bits) => {
            let units = 1u64 << bits;
            let mut cuts: Vec<u64> = (0..n - 1).map(|_| rng.random_range(0..=units)).collect();
            cuts.push(0);
            cuts.push(units);
            cuts.sort_unstable();
            let mut w: Vec<f64> = cuts.windows(2).map(|p| (p[1] - p[0]) as f64 / units as f64).collect();
            w.shuffle(rng);
            w
        }
        None => {
            // sparse-ish continuous weights, never all zero
            let mut raw: Vec<f64> = (0..n)
                .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>() })
                .collect();
            if raw.iter().all(|&v| v == 0.0) {
                let k = rng.random_range(0..n);
                raw[k] = 1.0;
            }
            let s: f64 = raw.iter().sum();
            raw.iter().map(|v| v / s).collect()
        }
    }
}

pub fn random_network<R: Rng>(rng: &mut R, n: usize) -> InfluenceNetwork {
    let dyadic = rng.random_bool(0.5).then(|| rng.random_range(2..=6));
    let rows: Vec<Vec<f64>> = (0..n).map(|_| random_weights(rng, n, dyadic)).collect();
    InfluenceNetwork::from_rows(&rows).unwrap()
}

/// Opinions drawn either continuously or from a coarse grid (to create
/// repeated values).
pub fn random_opinions<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    if rng.random_bool(0.5) {
        (0..n).map(|_| rng.random_range(-5.0..5.0)).collect()
    } else {
        (0..n).map(|_| rng.random_range(-4i32..=4) as f64 / 2.0).collect()
    }
}

pub fn random_lambda<R: Rng>(rng: &mut R, n: usize, lo: f64) -> Vec<f64> {
    (0..n)
        .map(|_| if rng.random_bool(0.1) { 1.0 } else { rng.random_range(lo..=1.0) })
        .collect()
}

pub fn all_prejudiced<R: Rng>(rng: &mut R, n: usize, lo: f64) -> PrejudiceConfig {
    let lambda = random_lambda(rng, n, lo);
    let u = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    PrejudiceConfig::new(lambda, u).unwrap()
}

pub fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// All non-empty subsets of `set`, as index lists.
pub fn subsets(set: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    (1u32..(1 << set.len())).map(move |mask| {
        set.iter()
            .enumerate()
            .filter(|(b, _)| mask & (1 << b) != 0)
            .map(|(_, &i)| i)
            .collect()
    })
}

/// Definition-level cohesion check, independent of the library.
pub fn cohesive_by_definition(subset: &[usize], net: &InfluenceNetwork) -> bool {
    subset
        .iter()
        .all(|&i| subset.iter().map(|&j| net.weight(i, j)).sum::<f64>() >= 0.5 - 1e-12)
}

/// Whether any non-empty subset of `set` is cohesive, by enumeration.
pub fn has_cohesive_subset(set: &[usize], net: &InfluenceNetwork) -> bool {
    subsets(set).any(|s| cohesive_by_definition(&s, net))
}
