//! Run orchestration: resolve a network and configuration, simulate, analyse
//! and write trace/summary files.
//!
//! Configuration files are JSON objects with optional keys
//!
//! ```json
//! {
//!   "lambda": [0.3, 0.5] | {"uniform": [lo, hi]},
//!   "unprejudiced": [7, 8],
//!   "u": [1.0, 2.0] | "copy-x0" | 0.25,
//!   "x0": [0.5, 0.4] | {"range": [lo, hi]}
//! }
//! ```
//!
//! `uniform` draws each susceptibility from `(lo, hi]`; `unprejudiced` lists
//! 1-based agents whose susceptibility is forced to zero; a bare number for
//! `u` gives every agent that prejudice. Missing keys default to
//! `lambda ~ (0, 1]`, `x0_i = (6 - i) / 10` and `u = x0`.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{consensus_predicate, fixed_point, verify_rate};
use crate::dynamics::{simulate, Model, SimOptions, StopReason, Trace};
use crate::error::{Error, Result};
use crate::generate::{generate, GeneratorParams};
use crate::io::{export_trace, load_network};
use crate::network::InfluenceNetwork;
use crate::prejudice::PrejudiceConfig;

/// Gap separating two clusters of limit opinions.
pub const CLUSTER_GAP: f64 = 1e-6;

/// Tolerance when deciding whether prejudices are all equal.
pub const EQUAL_PREJUDICE_TOL: f64 = 1e-12;

const LAMBDA_STREAM: u64 = 1;
const X0_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Values(Vec<f64>),
    Uniform { uniform: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PrejudiceSpec {
    Values(Vec<f64>),
    Common(f64),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialSpec {
    Values(Vec<f64>),
    Range { range: [f64; 2] },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<LambdaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unprejudiced: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<PrejudiceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<InitialSpec>,
}

impl ConfigSpec {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Draws every random quantity from `seed` and returns the prejudice
    /// configuration together with the initial state.
    pub fn resolve(&self, n: usize, seed: u64) -> Result<(PrejudiceConfig, Vec<f64>)> {
        let mut lambda = match &self.lambda {
            Some(LambdaSpec::Values(v)) => v.clone(),
            Some(LambdaSpec::Uniform { uniform: [lo, hi] }) => draw_lambda(n, *lo, *hi, seed)?,
            None => draw_lambda(n, 0.0, 1.0, seed)?,
        };
        if lambda.len() != n {
            return Err(Error::input(format!("lambda has {} entries for {n} agents", lambda.len())));
        }
        for &a in self.unprejudiced.iter().flatten() {
            if a == 0 || a > n {
                return Err(Error::input(format!("unprejudiced agent {a} outside 1..={n}")));
            }
            lambda[a - 1] = 0.0;
        }

        let x0 = match &self.x0 {
            Some(InitialSpec::Values(v)) => v.clone(),
            Some(InitialSpec::Range { range: [lo, hi] }) => {
                if !(lo <= hi) {
                    return Err(Error::input("x0 range must satisfy lo <= hi"));
                }
                let mut rng = stream(seed, X0_STREAM);
                (0..n).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect()
            }
            None => default_x0(n),
        };
        if x0.len() != n {
            return Err(Error::input(format!("x0 has {} entries for {n} agents", x0.len())));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("x0 has non-finite entries"));
        }

        let u = match &self.u {
            Some(PrejudiceSpec::Values(v)) => v.clone(),
            Some(PrejudiceSpec::Common(c)) => vec![*c; n],
            Some(PrejudiceSpec::Keyword(k)) if k == "copy-x0" => x0.clone(),
            Some(PrejudiceSpec::Keyword(k)) => {
                return Err(Error::input(format!("unknown prejudice keyword '{k}'")))
            }
            None => x0.clone(),
        };
        Ok((PrejudiceConfig::new(lambda, u)?, x0))
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn draw_lambda(n: usize, lo: f64, hi: f64, seed: u64) -> Result<Vec<f64>> {
    if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
        return Err(Error::input(format!("lambda range [{lo}, {hi}] not within [0, 1]")));
    }
    let mut rng = stream(seed, LAMBDA_STREAM);
    // hi - (hi - lo) U[0,1) lies in (lo, hi]
    Ok((0..n).map(|_| hi - (hi - lo) * rng.random::<f64>()).collect())
}

/// `x0_i = (6 - i) / 10` for agents `i = 1..n`.
pub fn default_x0(n: usize) -> Vec<f64> {
    (1..=n).map(|i| (6.0 - i as f64) / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum NetworkSource {
    File { path: PathBuf, normalize: bool },
    Generated(GeneratorParams),
}

impl NetworkSource {
    pub fn load(&self, seed: u64) -> Result<InfluenceNetwork> {
        match self {
            NetworkSource::File { path, normalize } => load_network(path, *normalize),
            NetworkSource::Generated(params) => generate(params, seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub network: NetworkSource,
    pub config: ConfigSpec,
    pub models: Vec<Model>,
    pub tol: f64,
    pub max_steps: usize,
    pub cycle_window: usize,
    pub stride: usize,
    pub seed: u64,
    /// Overrides the configured prejudice with the initial state.
    pub u_from_x0: bool,
    /// Directory receiving `trace_<model>.csv` and `summary_<model>.json`.
    pub out_dir: Option<PathBuf>,
}

impl RunSpec {
    pub fn new(network: NetworkSource) -> Self {
        let defaults = SimOptions::default();
        Self {
            network,
            config: ConfigSpec::default(),
            models: vec![Model::Wm],
            tol: defaults.tol,
            max_steps: defaults.max_steps,
            cycle_window: defaults.cycle_window,
            stride: defaults.stride,
            seed: 0,
            u_from_x0: false,
            out_dir: None,
        }
    }

    /// Loads the network and resolves configuration and initial state.
    pub fn materialize(&self) -> Result<(InfluenceNetwork, PrejudiceConfig, Vec<f64>)> {
        let net = self.network.load(self.seed)?;
        let (mut cfg, x0) = self.config.resolve(net.n(), self.seed)?;
        if self.u_from_x0 {
            cfg = PrejudiceConfig::new(cfg.lambda().to_vec(), x0.clone())?;
        }
        Ok((net, cfg, x0))
    }

    fn sim_options(&self, model: Model) -> SimOptions {
        SimOptions {
            model,
            tol: self.tol,
            max_steps: self.max_steps,
            cycle_window: self.cycle_window,
            stride: self.stride,
        }
    }
}

/// Per-model run summary. The key set is fixed; keys that do not apply are
/// `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub model: Model,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub steps: usize,
    pub limit: Option<Vec<f64>>,
    pub clusters: usize,
    pub consensus_guaranteed: Option<bool>,
    pub rate_check: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct ModelRun {
    pub trace: Trace,
    pub summary: Summary,
}

/// Number of groups after sorting `values` and splitting wherever
/// consecutive values differ by more than `gap`.
pub fn count_clusters(values: &[f64], gap: f64) -> usize {
    if values.is_empty() {
        return 0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    1 + v.windows(2).filter(|p| p[1] - p[0] > gap).count()
}

/// What the theory guarantees about consensus of the weighted-median
/// dynamics: with every agent prejudiced, consensus iff all prejudices agree;
/// with a mix and one shared prejudice, iff no unprejudiced cohesive set
/// exists. `None` when neither case applies.
pub fn consensus_guarantee(net: &InfluenceNetwork, cfg: &PrejudiceConfig) -> Result<Option<bool>> {
    if cfg.all_prejudiced() {
        return Ok(Some(cfg.common_prejudice(EQUAL_PREJUDICE_TOL).is_some()));
    }
    match consensus_predicate(net, cfg) {
        Ok(v) => Ok(Some(v)),
        Err(Error::Precondition(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn summarize(
    model: Model,
    trace: &Trace,
    net: &InfluenceNetwork,
    cfg: &PrejudiceConfig,
    tol: f64,
) -> Result<Summary> {
    let end = trace.limit.as_ref().unwrap_or_else(|| trace.last());
    let (consensus_guaranteed, rate_check) = match model {
        Model::Wm => {
            let rate = if cfg.all_prejudiced() {
                let (xstar, _) = fixed_point(net, cfg, tol)?;
                Some(verify_rate(trace, &xstar, cfg.lambda_min()))
            } else {
                None
            };
            (consensus_guarantee(net, cfg)?, rate)
        }
        Model::Fj => (None, None),
    };
    Ok(Summary {
        model,
        converged: trace.converged,
        stop_reason: trace.stop_reason,
        steps: trace.steps,
        limit: trace.limit.as_ref().map(|l| l.to_vec()),
        clusters: count_clusters(end, CLUSTER_GAP),
        consensus_guaranteed,
        rate_check,
    })
}

/// Simulates every requested model and, when `out_dir` is set, writes
/// `trace_<model>.csv` and `summary_<model>.json` there.
pub fn run(spec: &RunSpec) -> Result<Vec<ModelRun>> {
    let (net, cfg, x0) = spec.materialize()?;
    if let Some(dir) = &spec.out_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut runs = Vec::with_capacity(spec.models.len());
    for &model in &spec.models {
        let trace = simulate(&x0, &net, &cfg, &spec.sim_options(model))?;
        let summary = summarize(model, &trace, &net, &cfg, spec.tol)?;
        if let Some(dir) = &spec.out_dir {
            export_trace(&trace, &dir.join(format!("trace_{model}.csv")))?;
            write_summary(&summary, &dir.join(format!("summary_{model}.json")))?;
        }
        runs.push(ModelRun { trace, summary });
    }
    Ok(runs)
}

pub fn write_summary(summary: &Summary, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
