use crate::error::{Error, Result};

/// Per-agent susceptibility to prejudice (`lambda`, each in `[0, 1]`) and the
/// prejudice values themselves (`u`).
///
/// Agents with `lambda > 0` are prejudiced; agents with `lambda == 0` are
/// unprejudiced and update from their neighbours only.
#[derive(Debug, Clone, PartialEq)]
pub struct PrejudiceConfig {
    lambda: Vec<f64>,
    u: Vec<f64>,
}

impl PrejudiceConfig {
    pub fn new(lambda: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if lambda.len() != u.len() {
            return Err(Error::input(format!(
                "lambda has {} entries but u has {}",
                lambda.len(),
                u.len()
            )));
        }
        if let Some((i, l)) = lambda
            .iter()
            .enumerate()
            .find(|(_, l)| !(0.0..=1.0).contains(*l))
        {
            return Err(Error::input(format!(
                "lambda[{}] = {l} outside [0, 1]",
                i + 1
            )));
        }
        if let Some((i, v)) = u.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::input(format!("u[{}] = {v} is not finite", i + 1)));
        }
        Ok(Self { lambda, u })
    }

    /// Every agent anchored with the same susceptibility.
    pub fn uniform(lambda: f64, u: Vec<f64>) -> Result<Self> {
        Self::new(vec![lambda; u.len()], u)
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_prejudiced(&self, i: usize) -> bool {
        self.lambda[i] > 0.0
    }

    /// Indices of prejudiced agents, ascending.
    pub fn prejudiced(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.is_prejudiced(i)).collect()
    }

    /// Indices of unprejudiced agents, ascending.
    pub fn unprejudiced(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.is_prejudiced(i)).collect()
    }

    pub fn all_prejudiced(&self) -> bool {
        self.lambda.iter().all(|&l| l > 0.0)
    }

    /// The common prejudice value when all `u` agree within `tol`.
    pub fn common_prejudice(&self, tol: f64) -> Option<f64> {
        let lo = self.u.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo <= tol).then_some(self.u[0])
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.n() != n {
            return Err(Error::input(format!(
                "prejudice config covers {} agents, network has {n}",
                self.n()
            )));
        }
        Ok(())
    }
}
