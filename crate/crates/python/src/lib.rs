//! Python bindings for `uavplace-core`.
//!
//! Structured values cross the boundary as JSON text decoded with Python's
//! own `json` module, so dicts on the Python side mirror the file formats.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyString;

use uavplace_core::exact::{self, ConnectivityForm};
use uavplace_core::harness::{self, SweepSpec, TrialOptions};
use uavplace_core::plan::{self, AlgorithmTag};
use uavplace_core::scenario::{self, ScenarioConfig};
use uavplace_core::{channel, netgraph, Error};

create_exception!(uavplace, UavplaceError, PyException);
create_exception!(uavplace, InvalidParameterError, UavplaceError);
create_exception!(uavplace, InfeasibleError, UavplaceError);
create_exception!(uavplace, InstanceTooLargeError, UavplaceError);
create_exception!(uavplace, InvariantError, UavplaceError);
create_exception!(uavplace, FormatError, UavplaceError);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e.root() {
        Error::InvalidParameter(_) => InvalidParameterError::new_err(msg),
        Error::InfeasibleLink(_) | Error::InfeasibleCoverage { .. } | Error::InfeasibleBackhaul { .. } => {
            InfeasibleError::new_err(msg)
        }
        Error::InstanceTooLarge { .. } => InstanceTooLargeError::new_err(msg),
        Error::Invariant(_) => InvariantError::new_err(msg),
        Error::VersionMismatch { .. } | Error::Format(_) => FormatError::new_err(msg),
        _ => UavplaceError::new_err(msg),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    to_py(Error::Format(e))
}

/// Accepts either JSON text or any `json.dumps`-able object.
fn json_text(obj: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(s) = obj.cast::<PyString>() {
        return Ok(s.to_string());
    }
    obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()
}

fn to_dict<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(json_err)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn parse_tag(name: &str) -> PyResult<AlgorithmTag> {
    name.parse().map_err(to_py)
}

/// A generated or loaded deployment scenario.
#[pyclass(module = "uavplace", frozen)]
struct Scenario {
    inner: scenario::Scenario,
}

#[pymethods]
impl Scenario {
    /// Generates a scenario from a config (dict or JSON); defaults fill gaps.
    #[staticmethod]
    #[pyo3(signature = (seed=0, config=None, n_users=None, area_side=None, backhaul_snr=None))]
    fn generate(
        seed: u64,
        config: Option<&Bound<'_, PyAny>>,
        n_users: Option<usize>,
        area_side: Option<f64>,
        backhaul_snr: Option<f64>,
    ) -> PyResult<Self> {
        let mut cfg: ScenarioConfig = match config {
            Some(c) => serde_json::from_str(&json_text(c)?).map_err(json_err)?,
            None => ScenarioConfig::default(),
        };
        if let Some(n) = n_users {
            cfg.n_users = n;
        }
        if let Some(side) = area_side {
            cfg.area_width = side;
            cfg.area_height = side;
        }
        if let Some(snr) = backhaul_snr {
            cfg.thresholds.backhaul_snr_min = snr;
        }
        Ok(Self { inner: cfg.generate(seed).map_err(to_py)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: scenario::Scenario::from_json(text).map_err(to_py)? })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self { inner: scenario::load_scenario(path).map_err(to_py)? })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        scenario::save_scenario(&self.inner, path).map_err(to_py)
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_dict(py, &self.inner)
    }

    #[getter]
    fn n_users(&self) -> usize {
        self.inner.n_users()
    }

    #[getter]
    fn n_nodes(&self) -> usize {
        self.inner.nodes.len()
    }

    #[getter]
    fn n_candidates(&self) -> usize {
        self.inner.candidates.len()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.rng_seed
    }

    /// `(altitude, ground_radius, backhaul_radius)` in metres.
    #[getter]
    fn geometry(&self) -> (f64, f64, f64) {
        let g = self.inner.geometry;
        (g.altitude, g.ground_radius, g.backhaul_radius)
    }

    /// `(x, y)` of every ground node, by id.
    #[getter]
    fn nodes(&self) -> Vec<(f64, f64)> {
        self.inner.nodes.iter().map(|n| (n.x, n.y)).collect()
    }

    /// `(x, y, h)` of every candidate location, by id.
    #[getter]
    fn candidates(&self) -> Vec<(f64, f64, f64)> {
        self.inner.candidates.iter().map(|c| (c.x, c.y, c.h)).collect()
    }

    fn fingerprint(&self) -> String {
        harness::fingerprint(&self.inner)
    }

    fn graph(&self) -> Graph {
        Graph { inner: netgraph::build_graph(&self.inner) }
    }

    /// Runs one algorithm and returns a verified plan.
    #[pyo3(signature = (algorithm="proposed", seed=None))]
    fn plan(&self, py: Python<'_>, algorithm: &str, seed: Option<u64>) -> PyResult<Plan> {
        let tag = parse_tag(algorithm)?;
        let mut opts = TrialOptions::for_scenario(&self.inner);
        if let Some(s) = seed {
            opts.random_seed = s;
        }
        let inner = py.detach(|| harness::run_trial_with(&self.inner, tag, &opts)).map_err(to_py)?;
        Ok(Plan { inner })
    }

    /// Checks a plan; returns `{"passed": bool, "checks": [...]}`.
    fn verify(&self, py: Python<'_>, plan: &Plan) -> PyResult<Py<PyAny>> {
        let report = plan::verify_plan(&netgraph::build_graph(&self.inner), &plan.inner);
        let out = to_dict(py, &report)?;
        out.bind(py).set_item("passed", report.passed())?;
        Ok(out)
    }

    /// Integer program in LP format; `form` is "flow" or "subtour".
    #[pyo3(signature = (form="flow"))]
    fn export_ilp(&self, form: &str) -> PyResult<String> {
        let form = match form {
            "flow" => ConnectivityForm::Flow,
            "subtour" => ConnectivityForm::Subtour,
            other => return Err(InvalidParameterError::new_err(format!("unknown form '{other}'"))),
        };
        exact::export_ilp(&netgraph::build_graph(&self.inner), form).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(nodes={}, candidates={}, area={}x{} m, seed={})",
            self.inner.nodes.len(),
            self.inner.candidates.len(),
            self.inner.area_width,
            self.inner.area_height,
            self.inner.rng_seed
        )
    }
}

/// Access and backhaul adjacency of a scenario.
#[pyclass(module = "uavplace", frozen)]
struct Graph {
    inner: netgraph::DeploymentGraph,
}

#[pymethods]
impl Graph {
    #[getter]
    fn n_nodes(&self) -> usize {
        self.inner.n_nodes()
    }

    #[getter]
    fn n_candidates(&self) -> usize {
        self.inner.n_candidates()
    }

    /// Ground nodes within range of candidate `k`.
    fn covered(&self, k: usize) -> PyResult<Vec<usize>> {
        self.check(k)?;
        Ok(self.inner.covered(k).to_vec())
    }

    /// Candidates linked to candidate `k` by backhaul.
    fn neighbors(&self, k: usize) -> PyResult<Vec<usize>> {
        self.check(k)?;
        Ok(self.inner.neighbors(k).to_vec())
    }

    fn access_edges(&self) -> Vec<(usize, usize)> {
        self.inner.access_edges().collect()
    }

    fn backhaul_edges(&self) -> Vec<(usize, usize)> {
        self.inner.backhaul_edges().collect()
    }

    fn is_connected(&self, selection: Vec<usize>) -> PyResult<bool> {
        for &k in &selection {
            self.check(k)?;
        }
        Ok(self.inner.is_connected(&selection))
    }
}

impl Graph {
    fn check(&self, k: usize) -> PyResult<()> {
        if k < self.inner.n_candidates() {
            Ok(())
        } else {
            Err(InvalidParameterError::new_err(format!("candidate {k} out of range")))
        }
    }
}

/// A deployment produced by one of the algorithms.
#[pyclass(module = "uavplace", frozen)]
struct Plan {
    inner: plan::Plan,
}

#[pymethods]
impl Plan {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: plan::Plan::from_json(text).map_err(to_py)? })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self { inner: plan::load_plan(path).map_err(to_py)? })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        plan::save_plan(&self.inner, path).map_err(to_py)
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_dict(py, &self.inner)
    }

    #[getter]
    fn algorithm(&self) -> &'static str {
        self.inner.algorithm_tag.as_str()
    }

    #[getter]
    fn selected(&self) -> Vec<usize> {
        self.inner.selected.clone()
    }

    #[getter]
    fn fixed(&self) -> Vec<usize> {
        self.inner.fixed.clone()
    }

    #[getter]
    fn assignment(&self) -> Vec<(usize, usize)> {
        self.inner.assignment.clone()
    }

    #[getter]
    fn backhaul_topology(&self) -> Vec<(usize, usize)> {
        self.inner.backhaul_topology.clone()
    }

    #[getter]
    fn connected(&self) -> bool {
        self.inner.connected
    }

    #[getter]
    fn runtime(&self) -> f64 {
        self.inner.runtime
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Plan({}, uavs={}, connected={})", self.inner.algorithm_tag, self.inner.len(), self.inner.connected)
    }
}

fn thresholds(access_snr: f64, backhaul_snr: f64) -> channel::LinkThresholds {
    channel::LinkThresholds::new(access_snr, backhaul_snr)
}

fn channel_params(params: Option<&Bound<'_, PyAny>>) -> PyResult<channel::ChannelParams> {
    match params {
        Some(p) => serde_json::from_str(&json_text(p)?).map_err(json_err),
        None => Ok(channel::ChannelParams::suburban()),
    }
}

/// Ground and backhaul radii at a fixed altitude.
#[pyfunction]
#[pyo3(signature = (altitude, access_snr=4.0, backhaul_snr=15.0, params=None))]
fn coverage_radii(
    py: Python<'_>,
    altitude: f64,
    access_snr: f64,
    backhaul_snr: f64,
    params: Option<&Bound<'_, PyAny>>,
) -> PyResult<Py<PyAny>> {
    let g = channel::coverage_radii(&channel_params(params)?, &thresholds(access_snr, backhaul_snr), altitude)
        .map_err(to_py)?;
    to_dict(py, &g)
}

/// Altitude in `[h_min, h_max]` with the widest ground coverage.
#[pyfunction]
#[pyo3(signature = (access_snr=4.0, backhaul_snr=15.0, h_min=100.0, h_max=20_000.0, params=None))]
fn optimal_altitude(
    py: Python<'_>,
    access_snr: f64,
    backhaul_snr: f64,
    h_min: f64,
    h_max: f64,
    params: Option<&Bound<'_, PyAny>>,
) -> PyResult<Py<PyAny>> {
    let g = channel::optimal_altitude(&channel_params(params)?, &thresholds(access_snr, backhaul_snr), h_min, h_max)
        .map_err(to_py)?;
    to_dict(py, &g)
}

/// Runs a sweep and returns `{"summaries": [...], "trials": [...]}`.
/// With `out_dir`, the CSV files and manifest are written there too.
#[pyfunction]
#[pyo3(signature = (spec, workers=0, out_dir=None))]
fn run_sweep(py: Python<'_>, spec: &Bound<'_, PyAny>, workers: usize, out_dir: Option<&str>) -> PyResult<Py<PyAny>> {
    let spec = SweepSpec::from_json(&json_text(spec)?).map_err(to_py)?;
    let result = py.detach(|| harness::run_sweep(&spec, workers)).map_err(to_py)?;
    if let Some(dir) = out_dir {
        harness::emit_results(&result, dir).map_err(to_py)?;
    }
    to_dict(py, &result)
}

#[pymodule]
fn uavplace(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("__version__", uavplace_core::VERSION)?;
    m.add("UavplaceError", py.get_type::<UavplaceError>())?;
    m.add("InvalidParameterError", py.get_type::<InvalidParameterError>())?;
    m.add("InfeasibleError", py.get_type::<InfeasibleError>())?;
    m.add("InstanceTooLargeError", py.get_type::<InstanceTooLargeError>())?;
    m.add("InvariantError", py.get_type::<InvariantError>())?;
    m.add("FormatError", py.get_type::<FormatError>())?;
    m.add_class::<Scenario>()?;
    m.add_class::<Graph>()?;
    m.add_class::<Plan>()?;
    m.add_function(wrap_pyfunction!(coverage_radii, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_altitude, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    Ok(())
}
