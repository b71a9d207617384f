use std::ops::Deref;

use crate::error::{Error, Result};

/// The opinions of all agents at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionVector(Vec<f64>);

impl OpinionVector {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::input(format!("opinion {} = {v} is not finite", i + 1)));
        }
        Ok(Self(x))
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self(vec![c; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `max - min` over all agents.
    pub fn spread(&self) -> f64 {
        self.max() - self.min()
    }

    /// Infinity-norm distance.
    pub fn sup_distance(&self, other: &[f64]) -> f64 {
        sup_distance(&self.0, other)
    }
}

impl Deref for OpinionVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<OpinionVector> for Vec<f64> {
    fn from(x: OpinionVector) -> Self {
        x.0
    }
}

pub(crate) fn from_vec_unchecked(x: Vec<f64>) -> OpinionVector {
    OpinionVector(x)
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
