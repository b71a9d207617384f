//! Fixed points, closed-form limits, and cohesive-set analysis.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dynamics::{wm_unchecked, Trace};
use crate::error::{Error, Result};
use crate::median::median_map_unchecked;
use crate::network::InfluenceNetwork;
use crate::opinion::{self, sup_distance, OpinionVector};
use crate::prejudice::PrejudiceConfig;

/// Threshold below which an agent's mass inside a set does not count as
/// cohesive: `1/2 - COHESION_TOL`.
pub const COHESION_TOL: f64 = 1e-12;

/// Tolerance used when matching limit values to agents.
pub const SELECTION_TOL: f64 = 1e-9;

/// Slack allowed by [`verify_rate`].
pub const RATE_SLACK: f64 = 1e-9;

const FIXED_POINT_MAX_ITERS: usize = 10_000_000;

/// For each agent `i`, the agent `k[i]` whose limit opinion agent `i`'s
/// median locks onto. Together with `lambda` this encodes the matrix `A`
/// with `A[i][k[i]] = 1 - lambda[i]` and zeros elsewhere. Indices are
/// 0-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionMatrix {
    pub k: Vec<usize>,
    pub lambda: Vec<f64>,
}

impl SelectionMatrix {
    pub fn n(&self) -> usize {
        self.k.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut row = vec![0.0; n];
                row[self.k[i]] = 1.0 - self.lambda[i];
                row
            })
            .collect()
    }

    /// `I - A` as a dense matrix.
    fn system(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::identity(n, n);
        for (i, (&k, &l)) in self.k.iter().zip(&self.lambda).enumerate() {
            m[(i, k)] -= 1.0 - l;
        }
        m
    }

    /// `|| (I - A) x - Lambda u ||_inf`.
    pub fn residual(&self, x: &[f64], cfg: &PrejudiceConfig) -> f64 {
        (0..self.n())
            .map(|i| {
                let lhs = x[i] - (1.0 - self.lambda[i]) * x[self.k[i]];
                (lhs - cfg.lambda()[i] * cfg.u()[i]).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn require_all_prejudiced(cfg: &PrejudiceConfig) -> Result<()> {
    if !cfg.all_prejudiced() {
        return Err(Error::precondition(format!(
            "every susceptibility must be positive (lambda_min = {})",
            cfg.lambda_min()
        )));
    }
    Ok(())
}

/// Unique fixed point of `F(x) = Lambda u + (I - Lambda) Med(x; W)` by
/// iteration from `x = u`, stopping once `||F(x) - x||_inf < tol`. The
/// returned point is within `tol / lambda_min` of the true fixed point.
pub fn fixed_point(
    net: &InfluenceNetwork,
    cfg: &PrejudiceConfig,
    tol: f64,
) -> Result<(OpinionVector, usize)> {
    fixed_point_from(cfg.u(), net, cfg, tol)
}

/// As [`fixed_point`], starting the iteration from `start`.
pub fn fixed_point_from(
    start: &[f64],
    net: &InfluenceNetwork,
    cfg: &PrejudiceConfig,
    tol: f64,
) -> Result<(OpinionVector, usize)> {
    cfg.check_len(net.n())?;
    require_all_prejudiced(cfg)?;
    if !(tol > 0.0) {
        return Err(Error::input("tolerance must be positive"));
    }
    if start.len() != net.n() || start.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("start state must have one finite entry per agent"));
    }
    let mut x = start.to_vec();
    for iter in 1..=FIXED_POINT_MAX_ITERS {
        let next = wm_unchecked(&x, net, cfg);
        let moved = sup_distance(&next, &x);
        x = next;
        if moved < tol {
            return Ok((opinion::from_vec_unchecked(x), iter));
        }
    }
    Err(Error::Consistency(format!(
        "fixed-point iteration did not settle within {FIXED_POINT_MAX_ITERS} steps"
    )))
}

/// Reads off, for each agent, which agent's limit value its weighted median
/// selects at `xstar`. Ties between agents sharing a value go to the
/// smallest index.
pub fn extract_selection(
    xstar: &[f64],
    net: &InfluenceNetwork,
    cfg: &PrejudiceConfig,
) -> Result<SelectionMatrix> {
    cfg.check_len(net.n())?;
    if xstar.len() != net.n() || xstar.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("limit must have one finite entry per agent"));
    }
    let med = median_map_unchecked(xstar, net);
    let mut k = Vec::with_capacity(xstar.len());
    for (i, m) in med.iter().enumerate() {
        let l = cfg.lambda()[i];
        let ki = (0..xstar.len())
            .find(|&j| (xstar[j] - m).abs() <= SELECTION_TOL)
            .ok_or_else(|| {
                Error::Consistency(format!("agent {}: median {m} matches no agent", i + 1))
            })?;
        let implied = l * cfg.u()[i] + (1.0 - l) * xstar[ki];
        if (implied - xstar[i]).abs() > SELECTION_TOL {
            return Err(Error::Consistency(format!(
                "agent {}: limit {} differs from the fixed-point update {implied}",
                i + 1,
                xstar[i]
            )));
        }
        k.push(ki);
    }
    Ok(SelectionMatrix {
        k,
        lambda: cfg.lambda().to_vec(),
    })
}

/// Solves `(I - A) x = Lambda u` by LU with partial pivoting.
pub fn limit_from_selection(sel: &SelectionMatrix, cfg: &PrejudiceConfig) -> Result<OpinionVector> {
    cfg.check_len(sel.n())?;
    if sel.lambda.len() != sel.n() || sel.k.iter().any(|&k| k >= sel.n()) {
        return Err(Error::input("selection indices or susceptibilities malformed"));
    }
    require_all_prejudiced(cfg)?;
    if sel.lambda.iter().any(|&l| !(l > 0.0 && l <= 1.0)) {
        return Err(Error::precondition("selection susceptibilities must lie in (0, 1]"));
    }
    let rhs = DVector::from_iterator(
        sel.n(),
        cfg.lambda().iter().zip(cfg.u()).map(|(l, u)| l * u),
    );
    let x = sel
        .system()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Consistency("I - A is singular".into()))?;
    let x: Vec<f64> = x.iter().copied().collect();
    let res = sel.residual(&x, cfg);
    if res > 1e-10 {
        return Err(Error::Consistency(format!("solve residual {res:e} exceeds 1e-10")));
    }
    OpinionVector::new(x)
}

/// Selection for the complete graph with `w_ij = 1/n`, prejudices sorted
/// ascending: everyone locks onto the middle agent (odd `n`), or the lower
/// half onto agent `n/2` and the upper half onto `n/2 + 1` (even `n`, 1-based).
pub fn complete_graph_selection(n: usize, cfg: &PrejudiceConfig) -> Result<SelectionMatrix> {
    if n == 0 {
        return Err(Error::input("n must be positive"));
    }
    cfg.check_len(n)?;
    if cfg.u().windows(2).any(|p| p[0] > p[1]) {
        return Err(Error::precondition(
            "prejudices must be sorted ascending; sort agents and keep the permutation",
        ));
    }
    require_all_prejudiced(cfg)?;
    let k = (1..=n)
        .map(|i| {
            let k1 = if n % 2 == 1 {
                n.div_ceil(2)
            } else {
                n / 2 + (2 * i - 1) / n
            };
            k1 - 1
        })
        .collect();
    Ok(SelectionMatrix {
        k,
        lambda: cfg.lambda().to_vec(),
    })
}

fn check_agents(set: &[usize], n: usize) -> Result<()> {
    if let Some(i) = set.iter().find(|&&i| i >= n) {
        return Err(Error::input(format!("agent index {i} out of range for {n} agents")));
    }
    Ok(())
}

fn dedup_sorted(set: &[usize]) -> Vec<usize> {
    let mut v = set.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Whether every member of `subset` places at least half of its weight
/// inside `subset`.
pub fn is_cohesive(subset: &[usize], net: &InfluenceNetwork) -> Result<bool> {
    if subset.is_empty() {
        return Err(Error::input("a cohesive set must be non-empty"));
    }
    check_agents(subset, net.n())?;
    let set = dedup_sorted(subset);
    Ok(set
        .iter()
        .all(|&i| net.mass_on(i, &set) >= 0.5 - COHESION_TOL))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohesiveReport {
    /// Largest cohesive subset of the candidates, ascending; empty if none.
    pub maximal_subset: Vec<usize>,
    /// Agents in removal order with their inside-mass when removed.
    pub peel_order: Vec<(usize, f64)>,
}

/// Peels away, one at a time and lowest index first, agents whose mass inside
/// the remaining set is below one half. What survives is the unique maximal
/// cohesive subset of `candidates`.
pub fn max_cohesive_subset(candidates: &[usize], net: &InfluenceNetwork) -> Result<CohesiveReport> {
    check_agents(candidates, net.n())?;
    let mut remaining = dedup_sorted(candidates);
    let mut peel_order = Vec::new();
    loop {
        let weak = remaining.iter().enumerate().find_map(|(pos, &i)| {
            let mass = net.mass_on(i, &remaining);
            (mass < 0.5 - COHESION_TOL).then_some((pos, i, mass))
        });
        match weak {
            Some((pos, i, mass)) => {
                remaining.remove(pos);
                peel_order.push((i, mass));
            }
            None => break,
        }
    }
    Ok(CohesiveReport {
        maximal_subset: remaining,
        peel_order,
    })
}

/// Whether consensus on the common prejudice is reached from every initial
/// state, for a mix of prejudiced and unprejudiced agents sharing one
/// prejudice value. True exactly when the unprejudiced agents contain no
/// cohesive set.
pub fn consensus_predicate(net: &InfluenceNetwork, cfg: &PrejudiceConfig) -> Result<bool> {
    cfg.check_len(net.n())?;
    let prejudiced = cfg.prejudiced();
    let unprejudiced = cfg.unprejudiced();
    if prejudiced.is_empty() || unprejudiced.is_empty() {
        return Err(Error::precondition(
            "needs both prejudiced and unprejudiced agents; \
             for all-prejudiced systems consensus holds iff all prejudices are equal",
        ));
    }
    let u0 = cfg.u()[prejudiced[0]];
    if prejudiced
        .iter()
        .any(|&i| (cfg.u()[i] - u0).abs() > COHESION_TOL)
    {
        return Err(Error::precondition(
            "prejudiced agents must share one prejudice value; the unequal case is open",
        ));
    }
    Ok(max_cohesive_subset(&unprejudiced, net)?
        .maximal_subset
        .is_empty())
}

/// Checks `||x(t) - x*|| <= (1 - lambda_min)^t ||x(0) - x*|| + RATE_SLACK` at
/// every recorded `t`.
pub fn verify_rate(trace: &Trace, xstar: &[f64], lambda_min: f64) -> bool {
    let Some(x0) = trace.states.first() else {
        return true;
    };
    let d0 = sup_distance(x0, xstar);
    let rate = 1.0 - lambda_min;
    trace
        .iter()
        .all(|(t, x)| sup_distance(x, xstar) <= rate.powf(t as f64) * d0 + RATE_SLACK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, SimOptions};

    fn complete(n: usize) -> InfluenceNetwork {
        InfluenceNetwork::new(n, vec![1.0 / n as f64; n * n]).unwrap()
    }

    fn swapping_pair() -> (InfluenceNetwork, PrejudiceConfig) {
        let net = InfluenceNetwork::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap();
        let cfg = PrejudiceConfig::new(vec![1.0, 0.0, 0.0], vec![0.0; 3]).unwrap();
        (net, cfg)
    }

    #[test]
    fn fixed_point_of_equal_prejudice_is_constant() {
        let net = InfluenceNetwork::from_rows(&[
            vec![0.2, 0.3, 0.5],
            vec![0.6, 0.4, 0.0],
            vec![0.1, 0.1, 0.8],
        ])
        .unwrap();
        let cfg = PrejudiceConfig::new(vec![0.2, 0.7, 0.4], vec![3.5; 3]).unwrap();
        let (x, iters) = fixed_point(&net, &cfg, 1e-12).unwrap();
        assert_eq!(x.as_slice(), &[3.5; 3]);
        assert_eq!(iters, 1);
    }

    #[test]
    fn fixed_point_complete_three() {
        let cfg = PrejudiceConfig::uniform(0.5, vec![0.0, 1.0, 2.0]).unwrap();
        let (x, _) = fixed_point(&complete(3), &cfg, 1e-12).unwrap();
        assert_eq!(x.as_slice(), &[0.5, 1.0, 1.5]);
    }

    #[test]
    fn fixed_point_single_agent() {
        let net = InfluenceNetwork::identity(1);
        let cfg = PrejudiceConfig::new(vec![0.3], vec![4.0]).unwrap();
        let (x, _) = fixed_point(&net, &cfg, 1e-12).unwrap();
        assert_eq!(x.as_slice(), &[4.0]);
    }

    #[test]
    fn fixed_point_needs_positive_lambda() {
        let (net, cfg) = swapping_pair();
        assert!(matches!(
            fixed_point(&net, &cfg, 1e-12),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn selection_on_complete_graphs() {
        let cfg3 = PrejudiceConfig::uniform(0.5, vec![0.0, 1.0, 2.0]).unwrap();
        let (x, _) = fixed_point(&complete(3), &cfg3, 1e-12).unwrap();
        let sel = extract_selection(&x, &complete(3), &cfg3).unwrap();
        assert_eq!(sel.k, vec![1, 1, 1]);
        assert_eq!(sel, complete_graph_selection(3, &cfg3).unwrap());

        let cfg4 = PrejudiceConfig::uniform(0.5, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let (x, _) = fixed_point(&complete(4), &cfg4, 1e-12).unwrap();
        let sel = extract_selection(&x, &complete(4), &cfg4).unwrap();
        assert_eq!(sel.k, vec![1, 1, 2, 2]);
        assert_eq!(complete_graph_selection(4, &cfg4).unwrap().k, vec![1, 1, 2, 2]);

        let cfg1 = PrejudiceConfig::uniform(0.5, vec![7.0]).unwrap();
        assert_eq!(complete_graph_selection(1, &cfg1).unwrap().k, vec![0]);
    }

    #[test]
    fn selection_identity_network() {
        let cfg = PrejudiceConfig::uniform(0.4, vec![3.0, 1.0, 2.0]).unwrap();
        let net = InfluenceNetwork::identity(3);
        let sel = extract_selection(&[3.0, 1.0, 2.0], &net, &cfg).unwrap();
        assert_eq!(sel.k, vec![0, 1, 2]);
        let x = limit_from_selection(&sel, &cfg).unwrap();
        assert!(sup_distance(&x, &[3.0, 1.0, 2.0]) < 1e-14);
    }

    #[test]
    fn extract_rejects_non_fixed_points() {
        let cfg = PrejudiceConfig::uniform(0.5, vec![0.0, 1.0, 2.0]).unwrap();
        let err = extract_selection(&[0.0, 1.0, 2.0], &complete(3), &cfg).unwrap_err();
        assert!(matches!(err, Error::Consistency(_)));
    }

    #[test]
    fn closed_form_three_by_three() {
        // (I - A) with k = (2,2,2), lambda = 1/2:
        //   x1 - x2/2 = 0, x2/2 = 1/2, x3 - x2/2 = 1  =>  x = (1/2, 1, 3/2)
        let cfg = PrejudiceConfig::uniform(0.5, vec![0.0, 1.0, 2.0]).unwrap();
        let sel = SelectionMatrix {
            k: vec![1, 1, 1],
            lambda: vec![0.5; 3],
        };
        let x = limit_from_selection(&sel, &cfg).unwrap();
        assert!(sup_distance(&x, &[0.5, 1.0, 1.5]) < 1e-15);
    }

    #[test]
    fn closed_form_full_anchoring() {
        let cfg = PrejudiceConfig::uniform(1.0, vec![4.0, -2.0]).unwrap();
        let sel = SelectionMatrix {
            k: vec![1, 0],
            lambda: vec![1.0; 2],
        };
        assert_eq!(limit_from_selection(&sel, &cfg).unwrap().as_slice(), &[4.0, -2.0]);
    }

    #[test]
    fn complete_selection_preconditions() {
        let unsorted = PrejudiceConfig::uniform(0.5, vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            complete_graph_selection(2, &unsorted),
            Err(Error::Precondition(_))
        ));
        let lazy = PrejudiceConfig::new(vec![0.5, 0.0], vec![0.0, 1.0]).unwrap();
        assert!(complete_graph_selection(2, &lazy).is_err());
    }

    #[test]
    fn cohesion() {
        let (net, cfg) = swapping_pair();
        assert!(is_cohesive(&[1, 2], &net).unwrap());
        assert!(is_cohesive(&[0, 1, 2], &net).unwrap());
        assert!(!is_cohesive(&[1], &net).unwrap());
        assert!(is_cohesive(&[], &net).is_err());
        assert!(is_cohesive(&[5], &net).is_err());

        let rep = max_cohesive_subset(&[1, 2], &net).unwrap();
        assert_eq!(rep.maximal_subset, vec![1, 2]);
        assert!(rep.peel_order.is_empty());
        assert!(!consensus_predicate(&net, &cfg).unwrap());

        let empty = max_cohesive_subset(&[], &net).unwrap();
        assert!(empty.maximal_subset.is_empty() && empty.peel_order.is_empty());
    }

    #[test]
    fn exact_half_counts_as_cohesive() {
        let net = InfluenceNetwork::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.5, 0.0, 0.5],
            vec![0.5, 0.5, 0.0],
        ])
        .unwrap();
        assert!(is_cohesive(&[1, 2], &net).unwrap());
    }

    #[test]
    fn star_peels_everything() {
        // agents 2..4 put 0.6 on agent 1 and split the rest among themselves
        let net = InfluenceNetwork::from_rows(&[
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.6, 0.2, 0.1, 0.1],
            vec![0.6, 0.1, 0.2, 0.1],
            vec![0.6, 0.1, 0.1, 0.2],
        ])
        .unwrap();
        let rep = max_cohesive_subset(&[1, 2, 3], &net).unwrap();
        assert!(rep.maximal_subset.is_empty());
        let order: Vec<usize> = rep.peel_order.iter().map(|p| p.0).collect();
        assert_eq!(order, vec![1, 2, 3]);
        assert!(rep.peel_order.iter().all(|&(_, m)| m < 0.5));
        let cfg = PrejudiceConfig::new(vec![0.5, 0.0, 0.0, 0.0], vec![1.0; 4]).unwrap();
        assert!(consensus_predicate(&net, &cfg).unwrap());
    }

    #[test]
    fn self_heavy_unprejudiced_singleton_blocks_consensus() {
        let net = InfluenceNetwork::from_rows(&[vec![0.5, 0.5], vec![0.4, 0.6]]).unwrap();
        let cfg = PrejudiceConfig::new(vec![0.5, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(!consensus_predicate(&net, &cfg).unwrap());
    }

    #[test]
    fn consensus_predicate_preconditions() {
        let net = InfluenceNetwork::identity(2);
        let all = PrejudiceConfig::uniform(0.5, vec![0.0, 0.0]).unwrap();
        assert!(matches!(consensus_predicate(&net, &all), Err(Error::Precondition(_))));
        let none = PrejudiceConfig::uniform(0.0, vec![0.0, 0.0]).unwrap();
        assert!(consensus_predicate(&net, &none).is_err());
        let net3 = InfluenceNetwork::identity(3);
        let unequal = PrejudiceConfig::new(vec![0.5, 0.5, 0.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(consensus_predicate(&net3, &unequal), Err(Error::Precondition(_))));
    }

    #[test]
    fn rate_holds_and_rejects_corruption() {
        let net = InfluenceNetwork::from_rows(&[
            vec![0.1, 0.6, 0.3],
            vec![0.5, 0.2, 0.3],
            vec![0.3, 0.3, 0.4],
        ])
        .unwrap();
        let cfg = PrejudiceConfig::new(vec![0.2, 0.3, 0.25], vec![1.0, -1.0, 2.0]).unwrap();
        let (xstar, _) = fixed_point(&net, &cfg, 1e-13).unwrap();
        let mut trace = simulate(&[5.0, -7.0, 3.0], &net, &cfg, &SimOptions::default()).unwrap();
        assert!(verify_rate(&trace, &xstar, 0.2));

        let t = trace.times[3];
        let bound = 0.8f64.powi(t as i32) * sup_distance(&trace.states[0], &xstar);
        let mut bad = trace.states[3].clone().into_inner();
        bad[0] = xstar[0] + 10.0 * bound + 1e-6;
        trace.states[3] = OpinionVector::new(bad).unwrap();
        assert!(!verify_rate(&trace, &xstar, 0.2));
    }

    #[test]
    fn full_anchoring_hits_limit_after_one_step() {
        let net = complete(3);
        let cfg = PrejudiceConfig::uniform(1.0, vec![0.0, 4.0, 1.0]).unwrap();
        let trace = simulate(&[9.0, 9.0, 9.0], &net, &cfg, &SimOptions::default()).unwrap();
        assert!(trace.states[1..].iter().all(|s| s.as_slice() == cfg.u()));
        assert!(verify_rate(&trace, cfg.u(), 1.0));
    }
}
