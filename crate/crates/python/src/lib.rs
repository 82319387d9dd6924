//! Python bindings: formulas, benchmark functions, seeded optimizer runs
//! (on a built-in benchmark or on any Python callable), k-means and the
//! signed-rank test.

use std::sync::{Arc, Mutex};

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hmsos_core::benchmarks::{by_name, NAMES};
use hmsos_core::clustering::{kmeans as core_kmeans, KMeansOptions};
use hmsos_core::config::{defaults_for, resolve, ParamMap, ParamValue, ALGORITHMS};
use hmsos_core::harness::cell_problem;
use hmsos_core::stats::{wilcoxon_signed_rank, wilcoxon_signed_rank_with, WilcoxonMethod};
use hmsos_core::{hms_os, levy, Error, ObjectiveProblem, RngStream, RunTrace, SearchBounds};

fn to_py(err: Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn param_map(params: Option<&Bound<'_, PyDict>>) -> PyResult<ParamMap> {
    let mut map = ParamMap::new();
    let Some(params) = params else {
        return Ok(map);
    };
    for (k, v) in params.iter() {
        let key: String = k.extract()?;
        // bool first: Python's bool is an int subclass
        let value = if let Ok(b) = v.extract::<bool>() {
            ParamValue::Bool(b)
        } else if let Ok(i) = v.extract::<i64>() {
            ParamValue::Int(i)
        } else if let Ok(f) = v.extract::<f64>() {
            ParamValue::Real(f)
        } else {
            return Err(PyValueError::new_err(format!(
                "parameter '{key}' must be bool, int or float"
            )));
        };
        map.insert(key, value);
    }
    Ok(map)
}

fn param_dict<'py>(py: Python<'py>, map: &ParamMap) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for (k, v) in map {
        match *v {
            ParamValue::Bool(b) => d.set_item(k, b)?,
            ParamValue::Int(i) => d.set_item(k, i)?,
            ParamValue::Real(f) => d.set_item(k, f)?,
        }
    }
    Ok(d)
}

/// Outcome of one seeded run.
#[pyclass(frozen, get_all, module = "hmsos")]
struct RunResult {
    algorithm: String,
    problem: String,
    seed: u64,
    nfe: u64,
    best_value: f64,
    best_position: Vec<f64>,
    /// `best_value - optimum` when the optimum is known.
    final_error: Option<f64>,
    /// `(nfe, best_value)` after initialization and every iteration.
    records: Vec<(u64, f64)>,
}

impl RunResult {
    fn new(algorithm: &str, problem: &ObjectiveProblem, seed: u64, trace: RunTrace) -> Self {
        Self {
            algorithm: algorithm.to_string(),
            problem: problem.name().to_string(),
            seed,
            nfe: trace.nfe,
            best_value: trace.best.value,
            final_error: problem.optimum_value().map(|o| trace.best.value - o),
            best_position: trace.best.position,
            records: trace
                .records
                .iter()
                .map(|r| (r.nfe, r.best_value))
                .collect(),
        }
    }
}

#[pymethods]
impl RunResult {
    fn __repr__(&self) -> String {
        format!(
            "RunResult(algorithm={:?}, problem={:?}, seed={}, nfe={}, best_value={:e})",
            self.algorithm, self.problem, self.seed, self.nfe, self.best_value
        )
    }
}

#[pyclass(frozen, get_all, module = "hmsos")]
struct WilcoxonResult {
    n_effective: usize,
    w_statistic: f64,
    p_value: f64,
    method: String,
}

#[pymethods]
impl WilcoxonResult {
    fn __repr__(&self) -> String {
        format!(
            "WilcoxonResult(n_effective={}, w_statistic={}, p_value={:e}, method={:?})",
            self.n_effective, self.w_statistic, self.p_value, self.method
        )
    }
}

#[pyfunction]
fn sigma_u(beta: f64) -> PyResult<f64> {
    levy::sigma_u(beta).map_err(to_py)
}

#[pyfunction]
fn decay_factor(nfe: u64, nfe_max: u64) -> PyResult<f64> {
    levy::decay_factor(nfe, nfe_max).map_err(to_py)
}

#[pyfunction]
fn adaptive_count(rank: usize, n_pop: usize, m_low: usize, m_high: usize) -> PyResult<usize> {
    hms_os::adaptive_count(rank, n_pop, m_low, m_high).map_err(to_py)
}

/// 1-based ranks, lowest value first, ties by position.
#[pyfunction]
fn rank_values(values: Vec<f64>) -> Vec<usize> {
    let bids: Vec<_> = values
        .into_iter()
        .map(|v| hmsos_core::Bid::evaluated(Vec::new(), v))
        .collect();
    hms_os::rank_population(&bids)
}

#[pyfunction]
fn algorithms() -> Vec<&'static str> {
    ALGORITHMS.to_vec()
}

#[pyfunction]
fn benchmarks() -> Vec<&'static str> {
    NAMES.to_vec()
}

#[pyfunction]
fn defaults<'py>(py: Python<'py>, algorithm: &str) -> PyResult<Bound<'py, PyDict>> {
    param_dict(py, &defaults_for(algorithm).map_err(to_py)?)
}

/// Unshifted benchmark value at `x`.
#[pyfunction]
fn evaluate(function: &str, x: Vec<f64>) -> PyResult<f64> {
    let spec = by_name(function, x.len()).map_err(to_py)?;
    Ok(spec.evaluate(&x))
}

/// Runs `algorithm` on a benchmark exactly as the experiment harness does
/// for the same seed, so results line up with persisted traces.
#[pyfunction]
#[pyo3(signature = (algorithm, function, dimension, seed=0, nfe_max=None, params=None, shift=true))]
#[allow(clippy::too_many_arguments)]
fn run(
    py: Python<'_>,
    algorithm: &str,
    function: &str,
    dimension: usize,
    seed: u64,
    nfe_max: Option<u64>,
    params: Option<&Bound<'_, PyDict>>,
    shift: bool,
) -> PyResult<RunResult> {
    let mut settings = resolve(algorithm, &param_map(params)?).map_err(to_py)?;
    settings.set_nfe_max(nfe_max.unwrap_or(3000 * dimension as u64));
    let problem = cell_problem(function, dimension, seed, shift)
        .map_err(to_py)?
        .to_problem();
    let trace = py.detach(|| settings.run(&problem, seed)).map_err(to_py)?;
    Ok(RunResult::new(algorithm, &problem, seed, trace))
}

/// Minimizes a Python callable `f(list[float]) -> float` over the box
/// `[lower, upper]`.
#[pyfunction]
#[pyo3(signature = (f, lower, upper, algorithm="hms-os", seed=0, nfe_max=None, params=None))]
fn minimize(
    f: Py<PyAny>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    algorithm: &str,
    seed: u64,
    nfe_max: Option<u64>,
    params: Option<&Bound<'_, PyDict>>,
) -> PyResult<RunResult> {
    let bounds = SearchBounds::new(lower, upper).map_err(to_py)?;
    let mut settings = resolve(algorithm, &param_map(params)?).map_err(to_py)?;
    settings.set_nfe_max(nfe_max.unwrap_or(3000 * bounds.dimension() as u64));

    // A raised exception is parked here and the evaluation reports NaN,
    // which stops the run; the exception is re-raised afterwards.
    let raised: Arc<Mutex<Option<PyErr>>> = Arc::new(Mutex::new(None));
    let slot = raised.clone();
    let problem = ObjectiveProblem::new("callable", bounds, move |x: &[f64]| {
        Python::attach(|py| {
            let value = f
                .call1(py, (x.to_vec(),))
                .and_then(|v| v.extract::<f64>(py));
            value.unwrap_or_else(|e| {
                slot.lock().unwrap().get_or_insert(e);
                f64::NAN
            })
        })
    });
    let outcome = settings.run(&problem, seed);
    if let Some(e) = raised.lock().unwrap().take() {
        return Err(e);
    }
    Ok(RunResult::new(
        algorithm,
        &problem,
        seed,
        outcome.map_err(to_py)?,
    ))
}

/// Returns `(assignments, centroids, inertia)`.
#[pyfunction]
#[pyo3(signature = (points, k, restarts=10, seed=0))]
fn kmeans(
    points: Vec<Vec<f64>>,
    k: usize,
    restarts: usize,
    seed: u64,
) -> PyResult<(Vec<usize>, Vec<Vec<f64>>, f64)> {
    let p = core_kmeans(
        &points,
        k,
        &KMeansOptions::with_restarts(restarts),
        &mut RngStream::new(seed),
    )
    .map_err(to_py)?;
    Ok((p.assignments, p.centroids, p.inertia))
}

/// Paired two-sided signed-rank test; `method` is "exact", "normal" or
/// automatic when omitted.
#[pyfunction]
#[pyo3(signature = (x, y, method=None))]
fn wilcoxon(x: Vec<f64>, y: Vec<f64>, method: Option<&str>) -> PyResult<WilcoxonResult> {
    let r = match method {
        None => wilcoxon_signed_rank(&x, &y),
        Some("exact") => wilcoxon_signed_rank_with(&x, &y, WilcoxonMethod::Exact),
        Some("normal") => wilcoxon_signed_rank_with(&x, &y, WilcoxonMethod::NormalApproximation),
        Some(other) => return Err(PyValueError::new_err(format!("unknown method '{other}'"))),
    }
    .map_err(to_py)?;
    Ok(WilcoxonResult {
        n_effective: r.n_effective,
        w_statistic: r.w_statistic,
        p_value: r.p_value,
        method: r.method.as_str().to_string(),
    })
}

#[pymodule]
fn hmsos(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<RunResult>()?;
    m.add_class::<WilcoxonResult>()?;
    m.add_function(wrap_pyfunction!(sigma_u, m)?)?;
    m.add_function(wrap_pyfunction!(decay_factor, m)?)?;
    m.add_function(wrap_pyfunction!(adaptive_count, m)?)?;
    m.add_function(wrap_pyfunction!(rank_values, m)?)?;
    m.add_function(wrap_pyfunction!(algorithms, m)?)?;
    m.add_function(wrap_pyfunction!(benchmarks, m)?)?;
    m.add_function(wrap_pyfunction!(defaults, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon, m)?)?;
    Ok(())
}
