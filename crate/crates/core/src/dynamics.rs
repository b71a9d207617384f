//! Synchronous steppers and trajectory recording.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::median::median_map_unchecked;
use crate::network::InfluenceNetwork;
use crate::opinion::{self, sup_distance, OpinionVector};
use crate::prejudice::PrejudiceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Weighted-median update blended with prejudice.
    Wm,
    /// Friedkin-Johnsen: weighted average blended with prejudice.
    Fj,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Wm => "wm",
            Model::Fj => "fj",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wm" => Ok(Model::Wm),
            "fj" => Ok(Model::Fj),
            other => Err(Error::input(format!("unknown model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    ToleranceMet,
    MaxSteps,
    CycleDetected,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::ToleranceMet => "tolerance-met",
            StopReason::MaxSteps => "max-steps",
            StopReason::CycleDetected => "cycle-detected",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub model: Model,
    pub tol: f64,
    pub max_steps: usize,
    pub cycle_window: usize,
    /// Record every `stride`-th state (the first and last are always kept).
    pub stride: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            model: Model::Wm,
            tol: 1e-12,
            max_steps: 1_000_000,
            cycle_window: 64,
            stride: 1,
        }
    }
}

impl SimOptions {
    pub fn model(model: Model) -> Self {
        Self {
            model,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::input("tolerance must be positive"));
        }
        if self.max_steps == 0 {
            return Err(Error::input("max_steps must be at least 1"));
        }
        if self.cycle_window < 2 {
            return Err(Error::input("cycle_window must be at least 2"));
        }
        if self.stride == 0 {
            return Err(Error::input("stride must be at least 1"));
        }
        Ok(())
    }
}

/// A recorded trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// Time index of each recorded state.
    pub times: Vec<usize>,
    pub states: Vec<OpinionVector>,
    pub converged: bool,
    pub limit: Option<OpinionVector>,
    /// Number of update steps performed.
    pub steps: usize,
    pub stop_reason: StopReason,
    /// Shortest period found when a cycle was detected.
    pub period: Option<usize>,
}

impl Trace {
    pub fn last(&self) -> &OpinionVector {
        self.states.last().expect("trace holds at least the initial state")
    }

    pub fn n(&self) -> usize {
        self.states.first().map_or(0, |s| s.len())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Recorded `(t, state)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &OpinionVector)> {
        self.times.iter().copied().zip(&self.states)
    }
}

fn check_dims(x: &[f64], net: &InfluenceNetwork, cfg: &PrejudiceConfig) -> Result<()> {
    if x.len() != net.n() {
        return Err(Error::input(format!(
            "state has {} entries, network has {} agents",
            x.len(),
            net.n()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("state has non-finite entries"));
    }
    cfg.check_len(net.n())
}

/// One synchronous weighted-median update:
/// `x_i <- lambda_i u_i + (1 - lambda_i) Med_i(x; W)`.
pub fn step_wm(x: &[f64], net: &InfluenceNetwork, cfg: &PrejudiceConfig) -> Result<OpinionVector> {
    check_dims(x, net, cfg)?;
    Ok(opinion::from_vec_unchecked(wm_unchecked(x, net, cfg)))
}

/// One Friedkin-Johnsen update: `x <- Lambda u + (I - Lambda) W x`.
pub fn step_fj(x: &[f64], net: &InfluenceNetwork, cfg: &PrejudiceConfig) -> Result<OpinionVector> {
    check_dims(x, net, cfg)?;
    Ok(opinion::from_vec_unchecked(fj_unchecked(x, net, cfg)))
}

pub(crate) fn wm_unchecked(x: &[f64], net: &InfluenceNetwork, cfg: &PrejudiceConfig) -> Vec<f64> {
    let med = median_map_unchecked(x, net);
    blend(cfg, med)
}

fn fj_unchecked(x: &[f64], net: &InfluenceNetwork, cfg: &PrejudiceConfig) -> Vec<f64> {
    let avg = net
        .rows()
        .map(|row| row.iter().zip(x).map(|(w, v)| w * v).sum())
        .collect();
    blend(cfg, avg)
}

fn blend(cfg: &PrejudiceConfig, mut social: Vec<f64>) -> Vec<f64> {
    for ((s, &l), &u) in social.iter_mut().zip(cfg.lambda()).zip(cfg.u()) {
        // Written as s + l(u - s) so that s == u is reproduced exactly.
        if l == 1.0 {
            *s = u;
        } else if l > 0.0 {
            *s += l * (u - *s);
        }
    }
    social
}

/// A revisited state only counts as a cycle when it matches to within this
/// fraction of the current one-step movement. Damped oscillations towards a
/// fixed point come back close to `x(t-2)` long before successive states are
/// within `tol` of each other; genuine cycles repeat far more tightly.
pub const CYCLE_SHARPNESS: f64 = 1e-6;

/// Iterates the chosen model from `x0`.
///
/// Stops when successive states are within `tol` in the infinity norm, when
/// the new state repeats one of the previous `cycle_window` states (within
/// `tol`, and within `CYCLE_SHARPNESS` times the last one-step movement), or
/// after `max_steps` updates.
pub fn simulate(
    x0: &[f64],
    net: &InfluenceNetwork,
    cfg: &PrejudiceConfig,
    opts: &SimOptions,
) -> Result<Trace> {
    check_dims(x0, net, cfg)?;
    opts.validate()?;

    let step = match opts.model {
        Model::Wm => wm_unchecked,
        Model::Fj => fj_unchecked,
    };

    let mut times = vec![0];
    let mut states = vec![opinion::from_vec_unchecked(x0.to_vec())];
    let mut window: VecDeque<Vec<f64>> = VecDeque::with_capacity(opts.cycle_window);
    let mut current = x0.to_vec();
    let mut stop_reason = StopReason::MaxSteps;
    let mut period = None;
    let mut t = 0;

    while t < opts.max_steps {
        let next = step(&current, net, cfg);
        t += 1;

        let movement = sup_distance(&next, &current);
        let settled = movement < opts.tol;
        if !settled {
            // window holds x(t-1-k) for k = 1..; x(t-1) itself is `current`
            let repeat = opts.tol.min(CYCLE_SHARPNESS * movement);
            period = window
                .iter()
                .rev()
                .position(|s| sup_distance(s, &next) < repeat)
                .map(|k| k + 2);
        }

        window.push_back(std::mem::replace(&mut current, next));
        if window.len() >= opts.cycle_window {
            window.pop_front();
        }

        let done = settled || period.is_some();
        if done || t % opts.stride == 0 || t == opts.max_steps {
            times.push(t);
            states.push(opinion::from_vec_unchecked(current.clone()));
        }
        if settled {
            stop_reason = StopReason::ToleranceMet;
            break;
        }
        if period.is_some() {
            stop_reason = StopReason::CycleDetected;
            break;
        }
    }

    let converged = stop_reason == StopReason::ToleranceMet;
    Ok(Trace {
        times,
        states,
        converged,
        limit: converged.then(|| opinion::from_vec_unchecked(current)),
        steps: t,
        stop_reason,
        period,
    })
}

/// Per recorded state, the largest and smallest opinion.
pub fn max_min_envelope(trace: &Trace) -> Vec<(f64, f64)> {
    trace.states.iter().map(|s| (s.max(), s.min())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn swapping_pair(a: f64, b: f64) -> (InfluenceNetwork, PrejudiceConfig, Vec<f64>) {
        let net = InfluenceNetwork::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap();
        let cfg = PrejudiceConfig::new(vec![1.0, 0.0, 0.0], vec![0.25, 0.25, 0.25]).unwrap();
        (net, cfg, vec![0.25, a, b])
    }

    #[test]
    fn reciprocal_pair_swaps() {
        let (net, cfg, x) = swapping_pair(1.0, 3.0);
        let x1 = step_wm(&x, &net, &cfg).unwrap();
        assert_eq!(x1.as_slice(), &[0.25, 3.0, 1.0]);
    }

    #[test]
    fn full_anchoring_returns_prejudice() {
        let net = InfluenceNetwork::from_rows(&[vec![0.5, 0.5], vec![0.3, 0.7]]).unwrap();
        let cfg = PrejudiceConfig::uniform(1.0, vec![2.0, -1.0]).unwrap();
        assert_eq!(step_wm(&[2.0, -1.0], &net, &cfg).unwrap().as_slice(), &[2.0, -1.0]);
        assert_eq!(step_fj(&[7.0, 9.0], &net, &cfg).unwrap().as_slice(), &[2.0, -1.0]);
    }

    #[test]
    fn constant_state_is_fixed() {
        let net = InfluenceNetwork::from_rows(&[
            vec![0.2, 0.3, 0.5],
            vec![0.6, 0.4, 0.0],
            vec![0.1, 0.1, 0.8],
        ])
        .unwrap();
        let cfg = PrejudiceConfig::new(vec![0.3, 0.0, 0.9], vec![4.0; 3]).unwrap();
        assert_eq!(step_wm(&[4.0; 3], &net, &cfg).unwrap().as_slice(), &[4.0; 3]);
        let cfg0 = PrejudiceConfig::uniform(0.0, vec![0.0; 3]).unwrap();
        let y = step_fj(&[4.0; 3], &net, &cfg0).unwrap();
        assert!(y.iter().all(|v| (v - 4.0).abs() < 1e-15));
    }

    #[test]
    fn fj_two_agents() {
        let net = InfluenceNetwork::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let cfg = PrejudiceConfig::new(vec![0.5, 0.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(step_fj(&[0.0, 0.0], &net, &cfg).unwrap().as_slice(), &[0.5, 0.0]);
    }

    #[test]
    fn dimension_mismatch() {
        let net = InfluenceNetwork::identity(2);
        let cfg = PrejudiceConfig::uniform(0.5, vec![0.0; 3]).unwrap();
        assert!(step_wm(&[0.0, 0.0], &net, &cfg).is_err());
        assert!(step_fj(&[0.0], &net, &PrejudiceConfig::uniform(0.5, vec![0.0; 2]).unwrap()).is_err());
    }

    #[test]
    fn reciprocal_pair_cycles_with_period_two() {
        let (net, cfg, x) = swapping_pair(1.0, 3.0);
        let trace = simulate(&x, &net, &cfg, &SimOptions::default()).unwrap();
        assert_eq!(trace.stop_reason, StopReason::CycleDetected);
        assert_eq!(trace.period, Some(2));
        assert!(!trace.converged);
        assert!(trace.limit.is_none());
        assert_eq!(trace.steps, 2);
        assert_eq!(trace.states[0].as_slice(), &x[..]);
        let env = max_min_envelope(&trace);
        assert_eq!(env, vec![(3.0, 0.25); 3]);
    }

    #[test]
    fn full_anchoring_converges_in_one_step() {
        let net = InfluenceNetwork::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let cfg = PrejudiceConfig::uniform(1.0, vec![1.0, 2.0]).unwrap();
        let trace = simulate(&[5.0, -5.0], &net, &cfg, &SimOptions::default()).unwrap();
        // x(1) = u, and x(2) = u settles the stopping rule
        assert!(trace.converged);
        assert_eq!(trace.states[1].as_slice(), &[1.0, 2.0]);
        assert_eq!(trace.limit.as_ref().unwrap().as_slice(), &[1.0, 2.0]);
        assert_eq!(trace.steps, 2);
    }

    #[test]
    fn equal_prejudice_reaches_consensus() {
        let net = InfluenceNetwork::from_rows(&[
            vec![0.2, 0.3, 0.5],
            vec![0.6, 0.4, 0.0],
            vec![0.1, 0.1, 0.8],
        ])
        .unwrap();
        let cfg = PrejudiceConfig::new(vec![0.3, 0.5, 0.9], vec![1.5; 3]).unwrap();
        let trace = simulate(&[-3.0, 0.0, 8.0], &net, &cfg, &SimOptions::default()).unwrap();
        assert!(trace.converged);
        let lim = trace.limit.unwrap();
        assert!(lim.iter().all(|v| (v - 1.5).abs() < 1e-9), "{lim:?}");
    }

    #[test]
    fn stride_keeps_first_and_last() {
        let net = InfluenceNetwork::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let cfg = PrejudiceConfig::uniform(0.1, vec![0.0, 1.0]).unwrap();
        let opts = SimOptions {
            model: Model::Fj,
            stride: 10,
            ..SimOptions::default()
        };
        let trace = simulate(&[0.0, 0.0], &net, &cfg, &opts).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.times[0], 0);
        assert_eq!(*trace.times.last().unwrap(), trace.steps);
        assert!(trace.times[1..trace.times.len() - 1].iter().all(|t| t % 10 == 0));
    }

    #[test]
    fn damped_oscillation_is_not_a_cycle() {
        let net = InfluenceNetwork::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let cfg = PrejudiceConfig::uniform(0.05, vec![0.0, 1.0]).unwrap();
        for model in [Model::Wm, Model::Fj] {
            let trace = simulate(&[10.0, -10.0], &net, &cfg, &SimOptions::model(model)).unwrap();
            assert_eq!(trace.stop_reason, StopReason::ToleranceMet, "{model}");
        }
    }

    #[test]
    fn max_steps_stop() {
        let (net, cfg, x) = swapping_pair(1.0, 3.0);
        let opts = SimOptions {
            max_steps: 1,
            ..SimOptions::default()
        };
        let trace = simulate(&x, &net, &cfg, &opts).unwrap();
        assert_eq!(trace.stop_reason, StopReason::MaxSteps);
        assert_eq!(trace.states.len(), 2);
    }

    #[test]
    fn rejects_bad_options() {
        let (net, cfg, x) = swapping_pair(1.0, 3.0);
        for opts in [
            SimOptions { tol: 0.0, ..SimOptions::default() },
            SimOptions { max_steps: 0, ..SimOptions::default() },
            SimOptions { cycle_window: 1, ..SimOptions::default() },
        ] {
            assert!(simulate(&x, &net, &cfg, &opts).is_err());
        }
    }
}
