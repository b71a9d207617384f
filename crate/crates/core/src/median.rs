//! Weighted medians with the closest-to-self tie-break.
//!
//! A value `z` taken from `x` is a weighted median when the weight strictly
//! below `z` and the weight strictly above `z` are each at most half of the
//! total. When several values qualify, the updating agent keeps the one
//! nearest to its own opinion; exact distance ties go to the smaller value.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::network::{InfluenceNetwork, ROW_SUM_TOL};
use crate::opinion::{self, OpinionVector};

/// Absolute tolerance on the half-mass comparisons.
pub const HALF_MASS_TOL: f64 = 1e-12;

/// A probability vector over agents.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::input("weight vector is empty"));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::input(format!(
                "weight {} = {w} is negative or not finite",
                i + 1
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::input(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Outcome of a weighted-median query.
#[derive(Debug, Clone, PartialEq)]
pub struct MedianResult {
    /// The selected median, always an entry of the input.
    pub value: f64,
    /// Whether `candidates` has exactly one element.
    pub unique: bool,
    /// Every weighted median, ascending and without duplicates.
    pub candidates: Vec<f64>,
}

/// Weighted median of `x` under `w`, tie-broken towards `self_opinion`.
pub fn weighted_median(x: &[f64], w: &WeightVector, self_opinion: f64) -> Result<MedianResult> {
    check_query(x, w.as_slice(), self_opinion)?;
    let sorted = SortedOpinions::new(x);
    let mut candidates = Vec::new();
    let value = sorted.median(w.as_slice(), self_opinion, Some(&mut candidates));
    Ok(MedianResult {
        value,
        unique: candidates.len() == 1,
        candidates,
    })
}

/// Applies the per-agent weighted median to every row of the network. Agent
/// `i` breaks ties towards its own current opinion `x[i]`.
pub fn median_map(x: &[f64], net: &InfluenceNetwork) -> Result<OpinionVector> {
    if x.len() != net.n() {
        return Err(Error::input(format!(
            "opinion vector has {} entries, network has {} agents",
            x.len(),
            net.n()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("opinion vector has non-finite entries"));
    }
    Ok(opinion::from_vec_unchecked(median_map_unchecked(x, net)))
}

/// `median_map` without validation. `x` must have `net.n()` finite entries.
pub(crate) fn median_map_unchecked(x: &[f64], net: &InfluenceNetwork) -> Vec<f64> {
    // The sort order of x is shared by every row.
    let sorted = SortedOpinions::new(x);
    net.rows()
        .zip(x)
        .map(|(row, &own)| sorted.median(row, own, None))
        .collect()
}

/// Exhaustive check of every entry of `x` against the definition. Meant as a
/// test oracle for `n <= 32`.
///
/// Masses are accumulated exactly in fixed point when every weight is a
/// multiple of `2^-100` (any weight above about `2^-48`), otherwise with
/// Neumaier-compensated summation.
pub fn brute_force_median(
    x: &[f64],
    w: &WeightVector,
    self_opinion: f64,
) -> Result<MedianResult> {
    check_query(x, w.as_slice(), self_opinion)?;
    if x.len() > 32 {
        return Err(Error::input("brute-force oracle is limited to 32 entries"));
    }
    let w = w.as_slice();
    let exact = w.iter().map(|&v| to_fixed(v)).collect::<Option<Vec<u128>>>();

    let mut candidates: Vec<f64> = Vec::new();
    for &z in x {
        if candidates.contains(&z) {
            continue;
        }
        let is_median = match &exact {
            Some(q) => {
                let below: u128 = (0..x.len()).filter(|&i| x[i] < z).map(|i| q[i]).sum();
                let above: u128 = (0..x.len()).filter(|&i| x[i] > z).map(|i| q[i]).sum();
                let total: u128 = q.iter().sum();
                let half = total as f64 / 2.0 / FIXED_ONE;
                below as f64 / FIXED_ONE <= half + HALF_MASS_TOL
                    && above as f64 / FIXED_ONE <= half + HALF_MASS_TOL
            }
            None => {
                let below = neumaier((0..x.len()).filter(|&i| x[i] < z).map(|i| w[i]));
                let above = neumaier((0..x.len()).filter(|&i| x[i] > z).map(|i| w[i]));
                let half = neumaier(w.iter().copied()) / 2.0;
                below <= half + HALF_MASS_TOL && above <= half + HALF_MASS_TOL
            }
        };
        if is_median {
            candidates.push(z);
        }
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let value = *candidates
        .iter()
        .min_by(|a, b| {
            let da = (*a - self_opinion).abs();
            let db = (*b - self_opinion).abs();
            da.partial_cmp(&db).unwrap().then(a.partial_cmp(b).unwrap())
        })
        .ok_or_else(|| Error::Consistency("no weighted median found".into()))?;
    Ok(MedianResult {
        value,
        unique: candidates.len() == 1,
        candidates,
    })
}

const FIXED_ONE: f64 = 1267650600228229401496703205376.0; // 2^100

fn to_fixed(w: f64) -> Option<u128> {
    let scaled = w * FIXED_ONE;
    (scaled.fract() == 0.0 && scaled <= FIXED_ONE).then_some(scaled as u128)
}

fn neumaier(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if f64::abs(sum) >= f64::abs(v) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn check_query(x: &[f64], w: &[f64], self_opinion: f64) -> Result<()> {
    if x.is_empty() {
        return Err(Error::input("opinion vector is empty"));
    }
    if x.len() != w.len() {
        return Err(Error::input(format!(
            "{} opinions but {} weights",
            x.len(),
            w.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("opinion vector has non-finite entries"));
    }
    if !x.contains(&self_opinion) {
        return Err(Error::input(format!(
            "self opinion {self_opinion} is not an entry of the opinion vector"
        )));
    }
    Ok(())
}

/// Distinct opinion values in ascending order, with the group each agent
/// falls into.
struct SortedOpinions {
    values: Vec<f64>,
    group_of: Vec<usize>,
}

impl SortedOpinions {
    fn new(x: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| {
            x[a].partial_cmp(&x[b])
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut values: Vec<f64> = Vec::with_capacity(x.len());
        let mut group_of = vec![0; x.len()];
        for i in order {
            if values.last() != Some(&x[i]) {
                values.push(x[i]);
            }
            group_of[i] = values.len() - 1;
        }
        Self { values, group_of }
    }

    fn median(&self, weights: &[f64], own: f64, mut candidates: Option<&mut Vec<f64>>) -> f64 {
        let m = self.values.len();
        let mut mass = vec![0.0; m];
        for (g, w) in self.group_of.iter().zip(weights) {
            mass[*g] += w;
        }
        let mut above = vec![0.0; m];
        for g in (0..m.saturating_sub(1)).rev() {
            above[g] = above[g + 1] + mass[g + 1];
        }
        let total = above[0] + mass[0];
        let limit = total / 2.0 + HALF_MASS_TOL;

        let mut best: Option<(f64, f64)> = None;
        let mut below = 0.0;
        for g in 0..m {
            if below <= limit && above[g] <= limit {
                let v = self.values[g];
                if let Some(c) = candidates.as_deref_mut() {
                    c.push(v);
                }
                let d = (v - own).abs();
                // ascending scan: strict improvement keeps the smaller value on ties
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((v, d));
                }
            } else if below > limit {
                break;
            }
            below += mass[g];
        }
        match best {
            Some((v, _)) => v,
            // Unreachable for probability vectors; fall back to the group
            // where the cumulative mass crosses one half.
            None => {
                let mut acc = 0.0;
                for g in 0..m {
                    acc += mass[g];
                    if acc >= total / 2.0 {
                        return self.values[g];
                    }
                }
                self.values[m - 1]
            }
        }
    }
}
