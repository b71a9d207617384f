//! Row-stochastic influence networks.

use crate::error::{Error, Result};

/// Tolerance on row sums when validating a weight matrix.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// An `n x n` row-stochastic influence matrix. Entry `(i, j)` is how much
/// agent `i` is influenced by agent `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceNetwork {
    n: usize,
    weights: Vec<f64>,
}

impl InfluenceNetwork {
    /// Builds a network from a row-major weight buffer of length `n * n`.
    pub fn new(n: usize, weights: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("network must have at least one agent"));
        }
        if weights.len() != n * n {
            return Err(Error::input(format!(
                "expected {} weights for {n} agents, got {}",
                n * n,
                weights.len()
            )));
        }
        for (i, row) in weights.chunks_exact(n).enumerate() {
            check_row(i, row)?;
        }
        Ok(Self { n, weights })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::input(format!(
                "row {} has {} entries, expected {n}",
                i + 1,
                r.len()
            )));
        }
        Self::new(n, rows.concat())
    }

    /// Divides every row by its sum. Rows summing to zero are rejected.
    pub fn normalized(n: usize, mut weights: Vec<f64>) -> Result<Self> {
        if weights.len() != n * n {
            return Err(Error::input(format!(
                "expected {} weights for {n} agents, got {}",
                n * n,
                weights.len()
            )));
        }
        for (i, row) in weights.chunks_exact_mut(n).enumerate() {
            if let Some(w) = row.iter().find(|w| !w.is_finite() || **w < 0.0) {
                return Err(Error::input(format!(
                    "row {}: weight {w} is negative or not finite",
                    i + 1
                )));
            }
            let sum: f64 = row.iter().sum();
            if sum <= 0.0 {
                return Err(Error::input(format!("row {} has zero total weight", i + 1)));
            }
            row.iter_mut().for_each(|w| *w /= sum);
        }
        Self::new(n, weights)
    }

    pub fn identity(n: usize) -> Self {
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            weights[i * n + i] = 1.0;
        }
        Self { n, weights }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.weights.chunks_exact(self.n)
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    /// Total weight agent `i` places on the agents in `set`.
    pub fn mass_on(&self, i: usize, set: &[usize]) -> f64 {
        let row = self.row(i);
        set.iter().map(|&j| row[j]).sum()
    }
}

fn check_row(i: usize, row: &[f64]) -> Result<()> {
    if let Some(w) = row.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(Error::input(format!(
            "row {}: weight {w} outside [0, 1]",
            i + 1
        )));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(Error::input(format!(
            "row {} sums to {sum}, not 1 (use normalization to rescale)",
            i + 1
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_stochastic_rows() {
        let err = InfluenceNetwork::from_rows(&[vec![0.5, 0.3], vec![0.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
        assert!(InfluenceNetwork::from_rows(&[vec![1.5, -0.5], vec![0.0, 1.0]]).is_err());
        assert!(InfluenceNetwork::from_rows(&[vec![1.0], vec![1.0]]).is_err());
        assert!(InfluenceNetwork::new(0, vec![]).is_err());
    }

    #[test]
    fn normalization_rescales_rows() {
        let net = InfluenceNetwork::normalized(2, vec![0.4, 0.4, 0.0, 2.0]).unwrap();
        assert_eq!(net.row(0), &[0.5, 0.5]);
        assert_eq!(net.row(1), &[0.0, 1.0]);
        assert!(InfluenceNetwork::normalized(2, vec![0.0, 0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn mass_on_subset() {
        let net = InfluenceNetwork::from_rows(&[
            vec![0.2, 0.3, 0.5],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert!((net.mass_on(0, &[1, 2]) - 0.8).abs() < 1e-15);
        assert_eq!(net.mass_on(1, &[]), 0.0);
    }
}
