//! Python bindings. Plans, reports and results cross the boundary as plain dicts.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;
use spatiocv_core::clustering::{self, KMeansConfig};
use spatiocv_core::eval::{self, Learner, Measure};
use spatiocv_core::io;
use spatiocv_core::synth::{self, SyntheticField};
use spatiocv_core::task::ResponseKind;
use spatiocv_core::variogram;
use spatiocv_core::{repeat_plan, validate_plan, MethodSpec, Params, ResamplingPlan, TaskSchema};

fn err(e: spatiocv_core::Error) -> PyErr {
    match e {
        spatiocv_core::Error::Io(e) => PyOSError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn json_text(obj: &Bound<'_, PyAny>) -> PyResult<String> {
    obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()
}

fn params_of(obj: Option<&Bound<'_, PyDict>>) -> PyResult<Params> {
    match obj {
        None => Ok(Params::new()),
        Some(d) => serde_json::from_str(&json_text(d.as_any())?).map_err(|e| PyValueError::new_err(e.to_string())),
    }
}

fn plan_of(obj: &Bound<'_, PyAny>) -> PyResult<ResamplingPlan> {
    ResamplingPlan::from_json(&json_text(obj)?).map_err(err)
}

/// A dataset with coordinates, a response and optional space/time/group roles.
#[pyclass(name = "Task", module = "spatiocv", frozen)]
struct PyTask(spatiocv_core::Task);

#[allow(clippy::too_many_arguments)]
fn schema(
    response: &str,
    x: &str,
    y: &str,
    time: Option<String>,
    location: Option<String>,
    group: Option<String>,
    positive: Option<String>,
    features: Option<Vec<String>>,
    coords_as_features: bool,
    response_kind: &str,
) -> PyResult<TaskSchema> {
    let mut s = TaskSchema::new(response);
    s.coords = (x.into(), y.into());
    s.time = time;
    s.location = location;
    s.group = group;
    s.positive_label = positive;
    s.features = features;
    s.coords_as_features = coords_as_features;
    s.response_kind = match response_kind {
        "auto" => ResponseKind::Auto,
        "categorical" => ResponseKind::Categorical,
        "numeric" => ResponseKind::Numeric,
        o => return Err(PyValueError::new_err(format!("unknown response kind `{o}`"))),
    };
    Ok(s)
}

#[pymethods]
impl PyTask {
    #[staticmethod]
    #[pyo3(signature = (path, response="label", x="x", y="y", time=None, location=None, group=None,
                        positive=None, features=None, coords_as_features=false, response_kind="auto"))]
    #[allow(clippy::too_many_arguments)]
    fn from_csv(
        path: &str,
        response: &str,
        x: &str,
        y: &str,
        time: Option<String>,
        location: Option<String>,
        group: Option<String>,
        positive: Option<String>,
        features: Option<Vec<String>>,
        coords_as_features: bool,
        response_kind: &str,
    ) -> PyResult<Self> {
        let s = schema(response, x, y, time, location, group, positive, features, coords_as_features, response_kind)?;
        io::load_task_csv(path, &s).map(PyTask).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (path, response="label", x="x", y="y", time=None, location=None, group=None,
                        positive=None, features=None, coords_as_features=false, response_kind="auto"))]
    #[allow(clippy::too_many_arguments)]
    fn from_geojson(
        path: &str,
        response: &str,
        x: &str,
        y: &str,
        time: Option<String>,
        location: Option<String>,
        group: Option<String>,
        positive: Option<String>,
        features: Option<Vec<String>>,
        coords_as_features: bool,
        response_kind: &str,
    ) -> PyResult<Self> {
        let s = schema(response, x, y, time, location, group, positive, features, coords_as_features, response_kind)?;
        io::load_task_geojson(path, &s).map(PyTask).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn id(&self) -> String {
        self.0.id().to_string()
    }

    #[getter]
    fn response_name(&self) -> String {
        self.0.response_name().to_string()
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.0.feature_names().to_vec()
    }

    #[getter]
    fn coords(&self) -> Vec<(f64, f64)> {
        self.0.coords().iter().map(|c| (c[0], c[1])).collect()
    }

    fn feature(&self, name: &str) -> PyResult<Vec<f64>> {
        self.0
            .feature(name)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| PyValueError::new_err(format!("no feature `{name}`")))
    }

    fn to_csv(&self) -> PyResult<String> {
        io::task_to_csv(&self.0).map_err(err)
    }

    fn write_csv(&self, path: &str) -> PyResult<()> {
        io::write_task_csv(&self.0, path).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.n()
    }

    fn __repr__(&self) -> String {
        format!(
            "Task(id={:?}, n={}, response={:?}, features={:?})",
            self.0.id(),
            self.0.n(),
            self.0.response_name(),
            self.0.feature_names()
        )
    }
}

/// A sampled Gaussian random field.
#[pyclass(name = "Field", module = "spatiocv", frozen)]
struct PyField(SyntheticField);

#[pymethods]
impl PyField {
    #[getter]
    fn coords(&self) -> Vec<(f64, f64)> {
        self.0.coords.iter().map(|c| (c[0], c[1])).collect()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values.clone()
    }

    fn __len__(&self) -> usize {
        self.0.values.len()
    }
}

/// Partition `task` with `method` and return the plan as a dict (1-based indices).
#[pyfunction]
#[pyo3(signature = (task, method, params=None, seed=1, repeats=1))]
fn partition<'py>(
    py: Python<'py>,
    task: &PyTask,
    method: &str,
    params: Option<&Bound<'py, PyDict>>,
    seed: u64,
    repeats: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = MethodSpec::from_params(method, &params_of(params)?).map_err(err)?;
    let plan = py.detach(|| repeat_plan(&task.0, &spec, repeats, seed)).map_err(err)?;
    to_py(py, &plan)
}

#[pyfunction]
fn validate<'py>(py: Python<'py>, task: &PyTask, plan: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let plan = plan_of(plan)?;
    to_py(py, &validate_plan(&plan, &task.0))
}

#[pyfunction]
#[pyo3(signature = (task, plan, learner="knn", k_neighbors=1, measure="auroc"))]
fn resample<'py>(
    py: Python<'py>,
    task: &PyTask,
    plan: &Bound<'py, PyAny>,
    learner: &str,
    k_neighbors: usize,
    measure: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let plan = plan_of(plan)?;
    let learner = match learner {
        "knn" => Learner::knn(k_neighbors),
        "logistic" => Learner::logistic(),
        "featureless" => Learner::Featureless,
        o => return Err(PyValueError::new_err(format!("unknown learner `{o}`"))),
    };
    let measure: Measure = measure.parse().map_err(err)?;
    let result = py.detach(|| eval::resample(&task.0, &learner, &plan, measure)).map_err(err)?;
    to_py(py, &result)
}

#[pyfunction]
fn auroc(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<f64> {
    eval::auroc(&scores, &labels).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (points, k, seed=1, restarts=10, max_iter=100))]
fn kmeans<'py>(
    py: Python<'py>,
    points: Vec<Vec<f64>>,
    k: usize,
    seed: u64,
    restarts: usize,
    max_iter: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = KMeansConfig {
        restarts,
        max_iter,
        ..KMeansConfig::default()
    };
    to_py(py, &clustering::kmeans(&points, k, seed, &cfg).map_err(err)?)
}

/// Returns `(data, means, sds)`.
#[pyfunction]
fn standardize(rows: Vec<Vec<f64>>) -> PyResult<(Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
    let s = clustering::standardize(&rows).map_err(err)?;
    Ok((s.data, s.means, s.sds))
}

#[pyfunction]
#[pyo3(signature = (n, sigma2=1.0, rho=0.1, nugget=0.0, seed=1))]
fn sample_grf(py: Python<'_>, n: usize, sigma2: f64, rho: f64, nugget: f64, seed: u64) -> PyResult<PyField> {
    py.detach(|| synth::sample_grf(n, sigma2, rho, nugget, seed))
        .map(PyField)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (field, n_noise=2, seed=1))]
fn make_classification_task(field: &PyField, n_noise: usize, seed: u64) -> PyResult<PyTask> {
    synth::make_classification_task(&field.0, n_noise, seed)
        .map(PyTask)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (values, coords, n_lags=12, cutoff=0.6))]
fn estimate_autocorrelation_range<'py>(
    py: Python<'py>,
    values: Vec<f64>,
    coords: Vec<(f64, f64)>,
    n_lags: usize,
    cutoff: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let coords: Vec<[f64; 2]> = coords.into_iter().map(|(x, y)| [x, y]).collect();
    let est = variogram::estimate_autocorrelation_range(&values, &coords, n_lags, cutoff).map_err(err)?;
    to_py(py, &est)
}

#[pymodule]
fn spatiocv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTask>()?;
    m.add_class::<PyField>()?;
    m.add("METHODS", spatiocv_core::METHOD_IDS.to_vec())?;
    m.add_function(wrap_pyfunction!(partition, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(resample, m)?)?;
    m.add_function(wrap_pyfunction!(auroc, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans, m)?)?;
    m.add_function(wrap_pyfunction!(standardize, m)?)?;
    m.add_function(wrap_pyfunction!(sample_grf, m)?)?;
    m.add_function(wrap_pyfunction!(make_classification_task, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_autocorrelation_range, m)?)?;
    Ok(())
}
