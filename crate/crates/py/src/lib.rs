//! Python bindings. Agent indices are 0-based, as in the Rust library.

use std::path::PathBuf;

use medop_core::generate::{GeneratorKind, GeneratorParams, STAR_HUB_WEIGHT};
use medop_core::{self as core, Error, Model, SimOptions};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Row-stochastic influence matrix; `rows[i][j]` is the weight agent `i`
/// puts on agent `j`.
#[pyclass(frozen, module = "medop")]
struct InfluenceNetwork(core::InfluenceNetwork);

#[pymethods]
impl InfluenceNetwork {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        core::InfluenceNetwork::from_rows(&rows).py().map(Self)
    }

    /// Divides every row by its sum.
    #[staticmethod]
    fn normalized(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(PyValueError::new_err("matrix must be square"));
        }
        core::InfluenceNetwork::normalized(n, rows.concat()).py().map(Self)
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        Self(core::InfluenceNetwork::identity(n))
    }

    /// Reads a 1-based `src dst weight` edge list.
    #[staticmethod]
    #[pyo3(signature = (path, normalize = false))]
    fn load(path: PathBuf, normalize: bool) -> PyResult<Self> {
        core::load_network(&path, normalize).py().map(Self)
    }

    /// One of `complete`, `star`, `reciprocal-pair`, `uniform-neighbor`
    /// (needs `edges`, a 1-based edge-list path) or `random-row-stochastic`.
    #[staticmethod]
    #[pyo3(signature = (kind, n = None, seed = 0, hub_weight = STAR_HUB_WEIGHT, density = 0.5, edges = None, self_loops = true))]
    fn generate(
        kind: &str,
        n: Option<usize>,
        seed: u64,
        hub_weight: f64,
        density: f64,
        edges: Option<PathBuf>,
        self_loops: bool,
    ) -> PyResult<Self> {
        let kind: GeneratorKind = kind.parse().py()?;
        let params = if kind == GeneratorKind::UniformNeighbor {
            let path = edges.ok_or_else(|| PyValueError::new_err("uniform-neighbor needs edges"))?;
            GeneratorParams::uniform_neighbor_from_file(&path, self_loops).py()?
        } else {
            let n = n.ok_or_else(|| PyValueError::new_err(format!("{kind} needs n")))?;
            match kind {
                GeneratorKind::Complete => GeneratorParams::Complete { n },
                GeneratorKind::Star => GeneratorParams::Star { n, hub_weight },
                GeneratorKind::ReciprocalPair => GeneratorParams::ReciprocalPair { n },
                _ => GeneratorParams::RandomRowStochastic { n, density },
            }
        };
        core::generate(&params, seed).py().map(Self)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.0.rows().map(<[f64]>::to_vec).collect()
    }

    fn weight(&self, i: usize, j: usize) -> PyResult<f64> {
        let n = self.0.n();
        if i >= n || j >= n {
            return Err(PyValueError::new_err(format!("index out of range for {n} agents")));
        }
        Ok(self.0.weight(i, j))
    }

    fn to_edge_list(&self) -> String {
        core::io::format_edge_list(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("InfluenceNetwork(n={})", self.0.n())
    }
}

/// Susceptibilities `lam` in [0, 1] and prejudices `u`.
#[pyclass(frozen, module = "medop")]
struct PrejudiceConfig(core::PrejudiceConfig);

#[pymethods]
impl PrejudiceConfig {
    #[new]
    fn new(lam: Vec<f64>, u: Vec<f64>) -> PyResult<Self> {
        core::PrejudiceConfig::new(lam, u).py().map(Self)
    }

    #[getter]
    fn lam(&self) -> Vec<f64> {
        self.0.lambda().to_vec()
    }

    #[getter]
    fn u(&self) -> Vec<f64> {
        self.0.u().to_vec()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn lambda_min(&self) -> f64 {
        self.0.lambda_min()
    }

    fn prejudiced(&self) -> Vec<usize> {
        self.0.prejudiced()
    }

    fn unprejudiced(&self) -> Vec<usize> {
        self.0.unprejudiced()
    }

    fn __repr__(&self) -> String {
        format!("PrejudiceConfig(lam={:?}, u={:?})", self.0.lambda(), self.0.u())
    }
}

#[pyclass(frozen, get_all, module = "medop")]
struct MedianResult {
    value: f64,
    unique: bool,
    candidates: Vec<f64>,
}

impl From<core::MedianResult> for MedianResult {
    fn from(m: core::MedianResult) -> Self {
        Self {
            value: m.value,
            unique: m.unique,
            candidates: m.candidates,
        }
    }
}

#[pymethods]
impl MedianResult {
    fn __repr__(&self) -> String {
        format!(
            "MedianResult(value={}, unique={}, candidates={:?})",
            self.value, self.unique, self.candidates
        )
    }
}

#[pyclass(frozen, module = "medop")]
struct Trace(core::Trace);

#[pymethods]
impl Trace {
    #[getter]
    fn times(&self) -> Vec<usize> {
        self.0.times.clone()
    }

    #[getter]
    fn states(&self) -> Vec<Vec<f64>> {
        self.0.states.iter().map(|s| s.to_vec()).collect()
    }

    #[getter]
    fn converged(&self) -> bool {
        self.0.converged
    }

    #[getter]
    fn limit(&self) -> Option<Vec<f64>> {
        self.0.limit.as_ref().map(|l| l.to_vec())
    }

    #[getter]
    fn steps(&self) -> usize {
        self.0.steps
    }

    #[getter]
    fn stop_reason(&self) -> &'static str {
        self.0.stop_reason.as_str()
    }

    #[getter]
    fn period(&self) -> Option<usize> {
        self.0.period
    }

    fn last(&self) -> Vec<f64> {
        self.0.last().to_vec()
    }

    /// `(max, min)` of every recorded state.
    fn envelope(&self) -> Vec<(f64, f64)> {
        core::max_min_envelope(&self.0)
    }

    fn export(&self, path: PathBuf) -> PyResult<()> {
        core::export_trace(&self.0, &path).py()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Trace(steps={}, stop_reason='{}', recorded={})",
            self.0.steps,
            self.0.stop_reason.as_str(),
            self.0.len()
        )
    }
}

/// Agent `i` follows agent `k[i]` in the limit.
#[pyclass(frozen, module = "medop")]
struct SelectionMatrix(core::SelectionMatrix);

#[pymethods]
impl SelectionMatrix {
    #[getter]
    fn k(&self) -> Vec<usize> {
        self.0.k.clone()
    }

    fn to_dense(&self) -> Vec<Vec<f64>> {
        self.0.to_dense()
    }

    fn residual(&self, x: Vec<f64>, cfg: &PrejudiceConfig) -> f64 {
        self.0.residual(&x, &cfg.0)
    }

    fn __repr__(&self) -> String {
        format!("SelectionMatrix(k={:?})", self.0.k)
    }
}

#[pyclass(frozen, get_all, module = "medop")]
struct CohesiveReport {
    maximal_subset: Vec<usize>,
    peel_order: Vec<(usize, f64)>,
}

#[pymethods]
impl CohesiveReport {
    fn __repr__(&self) -> String {
        format!(
            "CohesiveReport(maximal_subset={:?}, peel_order={:?})",
            self.maximal_subset, self.peel_order
        )
    }
}

fn weights(w: Vec<f64>) -> PyResult<core::WeightVector> {
    core::WeightVector::new(w).py()
}

#[pyfunction]
fn weighted_median(x: Vec<f64>, w: Vec<f64>, self_opinion: f64) -> PyResult<MedianResult> {
    core::weighted_median(&x, &weights(w)?, self_opinion).py().map(Into::into)
}

#[pyfunction]
fn brute_force_median(x: Vec<f64>, w: Vec<f64>, self_opinion: f64) -> PyResult<MedianResult> {
    core::brute_force_median(&x, &weights(w)?, self_opinion).py().map(Into::into)
}

#[pyfunction]
fn median_map(x: Vec<f64>, net: &InfluenceNetwork) -> PyResult<Vec<f64>> {
    core::median_map(&x, &net.0).py().map(|v| v.into_inner())
}

#[pyfunction]
fn step_wm(x: Vec<f64>, net: &InfluenceNetwork, cfg: &PrejudiceConfig) -> PyResult<Vec<f64>> {
    core::step_wm(&x, &net.0, &cfg.0).py().map(|v| v.into_inner())
}

#[pyfunction]
fn step_fj(x: Vec<f64>, net: &InfluenceNetwork, cfg: &PrejudiceConfig) -> PyResult<Vec<f64>> {
    core::step_fj(&x, &net.0, &cfg.0).py().map(|v| v.into_inner())
}

#[pyfunction]
#[pyo3(signature = (x0, net, cfg, model = "wm", tol = 1e-12, max_steps = 1_000_000, cycle_window = 64, stride = 1))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    x0: Vec<f64>,
    net: &InfluenceNetwork,
    cfg: &PrejudiceConfig,
    model: &str,
    tol: f64,
    max_steps: usize,
    cycle_window: usize,
    stride: usize,
) -> PyResult<Trace> {
    let model: Model = model.parse().py()?;
    let opts = SimOptions {
        model,
        tol,
        max_steps,
        cycle_window,
        stride,
    };
    core::simulate(&x0, &net.0, &cfg.0, &opts).py().map(Trace)
}

/// Returns `(x_star, iterations)`.
#[pyfunction]
#[pyo3(signature = (net, cfg, tol = 1e-12, start = None))]
fn fixed_point(
    net: &InfluenceNetwork,
    cfg: &PrejudiceConfig,
    tol: f64,
    start: Option<Vec<f64>>,
) -> PyResult<(Vec<f64>, usize)> {
    let (x, iters) = match start {
        Some(s) => core::fixed_point_from(&s, &net.0, &cfg.0, tol),
        None => core::fixed_point(&net.0, &cfg.0, tol),
    }
    .py()?;
    Ok((x.into_inner(), iters))
}

#[pyfunction]
fn extract_selection(xstar: Vec<f64>, net: &InfluenceNetwork, cfg: &PrejudiceConfig) -> PyResult<SelectionMatrix> {
    core::extract_selection(&xstar, &net.0, &cfg.0).py().map(SelectionMatrix)
}

#[pyfunction]
fn limit_from_selection(sel: &SelectionMatrix, cfg: &PrejudiceConfig) -> PyResult<Vec<f64>> {
    core::limit_from_selection(&sel.0, &cfg.0).py().map(|v| v.into_inner())
}

#[pyfunction]
fn complete_graph_selection(n: usize, cfg: &PrejudiceConfig) -> PyResult<SelectionMatrix> {
    core::complete_graph_selection(n, &cfg.0).py().map(SelectionMatrix)
}

#[pyfunction]
fn is_cohesive(subset: Vec<usize>, net: &InfluenceNetwork) -> PyResult<bool> {
    core::is_cohesive(&subset, &net.0).py()
}

#[pyfunction]
fn max_cohesive_subset(candidates: Vec<usize>, net: &InfluenceNetwork) -> PyResult<CohesiveReport> {
    let r = core::max_cohesive_subset(&candidates, &net.0).py()?;
    Ok(CohesiveReport {
        maximal_subset: r.maximal_subset,
        peel_order: r.peel_order,
    })
}

#[pyfunction]
fn consensus_predicate(net: &InfluenceNetwork, cfg: &PrejudiceConfig) -> PyResult<bool> {
    core::consensus_predicate(&net.0, &cfg.0).py()
}

#[pyfunction]
fn verify_rate(trace: &Trace, xstar: Vec<f64>, lambda_min: f64) -> bool {
    core::verify_rate(&trace.0, &xstar, lambda_min)
}

/// Returns `[(t, state), ...]`.
#[pyfunction]
fn read_trace_csv(path: PathBuf) -> PyResult<Vec<(usize, Vec<f64>)>> {
    let rows = core::read_trace_csv(&path).py()?;
    Ok(rows.into_iter().map(|(t, s)| (t, s.into_inner())).collect())
}

#[pymodule]
fn medop(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<InfluenceNetwork>()?;
    m.add_class::<PrejudiceConfig>()?;
    m.add_class::<MedianResult>()?;
    m.add_class::<Trace>()?;
    m.add_class::<SelectionMatrix>()?;
    m.add_class::<CohesiveReport>()?;
    m.add_function(wrap_pyfunction!(weighted_median, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_median, m)?)?;
    m.add_function(wrap_pyfunction!(median_map, m)?)?;
    m.add_function(wrap_pyfunction!(step_wm, m)?)?;
    m.add_function(wrap_pyfunction!(step_fj, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_point, m)?)?;
    m.add_function(wrap_pyfunction!(extract_selection, m)?)?;
    m.add_function(wrap_pyfunction!(limit_from_selection, m)?)?;
    m.add_function(wrap_pyfunction!(complete_graph_selection, m)?)?;
    m.add_function(wrap_pyfunction!(is_cohesive, m)?)?;
    m.add_function(wrap_pyfunction!(max_cohesive_subset, m)?)?;
    m.add_function(wrap_pyfunction!(consensus_predicate, m)?)?;
    m.add_function(wrap_pyfunction!(verify_rate, m)?)?;
    m.add_function(wrap_pyfunction!(read_trace_csv, m)?)?;
    Ok(())
}
