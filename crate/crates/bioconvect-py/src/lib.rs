//! Python bindings. Structured results cross the boundary as JSON and come
//! back as plain dicts and lists.

use bioconvect::estimates::{global_smallness_check, SampledConstants};
use bioconvect::evolution::{integrate, GalerkinState, GalerkinSystem, SimConfig, Trajectory, Variant};
use bioconvect::experiments::{run_experiment, ExperimentSpec};
use bioconvect::stationary::{solve_malpha, solve_stationary, verify_malpha_bounds};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;
use std::path::PathBuf;

fn err(e: bioconvect::Error) -> PyErr {
    match e {
        bioconvect::Error::Config(_) | bioconvect::Error::InvalidDomain(_) | bioconvect::Error::Toml(_) | bioconvect::Error::Shape(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

/// Simulation configuration.
#[pyclass(name = "SimConfig", module = "bioconvect_py", skip_from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: SimConfig,
}

#[pymethods]
impl PyConfig {
    /// Small default configuration; `variant` is "weak" or "strong".
    #[new]
    #[pyo3(signature = (variant = "weak"))]
    fn new(variant: &str) -> PyResult<Self> {
        let v = match variant {
            "weak" => Variant::Weak,
            "strong" => Variant::Strong,
            _ => return Err(PyValueError::new_err(format!("unknown variant '{variant}'"))),
        };
        Ok(PyConfig { inner: SimConfig::small(v) })
    }

    #[staticmethod]
    fn from_toml(s: &str) -> PyResult<Self> {
        SimConfig::from_toml_str(s).map(|inner| PyConfig { inner }).map_err(err)
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        SimConfig::from_json_str(s).map(|inner| PyConfig { inner }).map_err(err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        SimConfig::load(&path).map(|inner| PyConfig { inner }).map_err(err)
    }

    fn to_toml(&self) -> PyResult<String> {
        self.inner.to_toml_string().map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    #[getter]
    fn n_modes(&self) -> usize {
        self.inner.discretization.n_modes
    }

    #[setter]
    fn set_n_modes(&mut self, n: usize) {
        self.inner.discretization.n_modes = n;
    }

    #[getter]
    fn t_end(&self) -> f64 {
        self.inner.discretization.t_end
    }

    #[setter]
    fn set_t_end(&mut self, t: f64) {
        self.inner.discretization.t_end = t;
    }

    #[getter]
    fn u_swim(&self) -> f64 {
        self.inner.model.u_swim
    }

    #[setter]
    fn set_u_swim(&mut self, u: f64) {
        self.inner.model.u_swim = u;
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.model.alpha
    }

    #[setter]
    fn set_alpha(&mut self, a: f64) {
        self.inner.model.alpha = a;
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "SimConfig(variant={:?}, n_modes={}, U={}, alpha={}, t_end={})",
            c.model.variant, c.discretization.n_modes, c.model.u_swim, c.model.alpha, c.discretization.t_end
        )
    }
}

/// Galerkin state: velocity coefficients `c`, concentration coefficients `d`
/// and, in the strong variant, the frozen datum `e0`.
#[pyclass(name = "State", module = "bioconvect_py", get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyState {
    c: Vec<f64>,
    d: Vec<f64>,
    e0: Vec<f64>,
}

impl From<&GalerkinState> for PyState {
    fn from(s: &GalerkinState) -> Self {
        PyState { c: s.c.clone(), d: s.d.clone(), e0: s.e0.clone() }
    }
}

#[pyclass(name = "Trajectory", module = "bioconvect_py")]
struct PyTrajectory {
    inner: Trajectory,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times()
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt
    }

    #[getter]
    fn blowup(&self) -> Option<f64> {
        self.inner.blowup
    }

    #[getter]
    fn states(&self) -> Vec<PyState> {
        self.inner.states.iter().map(PyState::from).collect()
    }

    /// Per-save norms as a list of dicts.
    fn norms<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.ledger.norms)
    }

    fn diagnostics_csv(&self) -> String {
        self.inner.ledger.to_csv()
    }

    fn max_energy_residual(&self) -> f64 {
        self.inner.ledger.max_abs_residual()
    }

    fn __len__(&self) -> usize {
        self.inner.states.len()
    }
}

#[pyclass(name = "System", module = "bioconvect_py")]
struct PySystem {
    inner: GalerkinSystem,
}

#[pymethods]
impl PySystem {
    #[new]
    fn new(config: &PyConfig) -> PyResult<Self> {
        GalerkinSystem::new(&config.inner).map(|inner| PySystem { inner }).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn velocity_eigenvalues(&self) -> Vec<f64> {
        self.inner.alpha_v.clone()
    }

    #[getter]
    fn concentration_eigenvalues(&self) -> Vec<f64> {
        self.inner.beta.clone()
    }

    fn initial_state(&self) -> PyResult<PyState> {
        self.inner.initial_state().map(|s| PyState::from(&s)).map_err(err)
    }

    fn integrate(&self, py: Python<'_>) -> PyResult<PyTrajectory> {
        let sys = &self.inner;
        let traj = py.detach(|| sys.initial_state().and_then(|s| integrate(sys, s))).map_err(err)?;
        Ok(PyTrajectory { inner: traj })
    }

    fn stationary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let s = solve_stationary(&self.inner).map_err(err)?;
        let d = serde_json::json!({
            "c": s.c,
            "eta": s.eta,
            "residual": s.residual,
            "converged": s.converged,
            "mass": s.mass,
            "iterations": s.trace.len(),
        });
        to_py(py, &d)
    }

    #[pyo3(signature = (samples = 200, seed = 0, beta = None))]
    fn check_smallness<'py>(&self, py: Python<'py>, samples: usize, seed: u64, beta: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
        let sampled = SampledConstants::estimate(&self.inner, samples, seed);
        let r = global_smallness_check(&self.inner, &sampled, beta).map_err(err)?;
        to_py(py, &r)
    }
}

/// Auxiliary profile diagnostics and bound checks for `(theta, U, alpha)`.
#[pyfunction]
#[pyo3(signature = (theta, u_swim, alpha, lx = 2.0 * std::f64::consts::PI, h = 1.0, nx = 64, nz = 64))]
fn malpha<'py>(py: Python<'py>, theta: f64, u_swim: f64, alpha: f64, lx: f64, h: f64, nx: usize, nz: usize) -> PyResult<Bound<'py, PyAny>> {
    let d = bioconvect::Domain::new(bioconvect::DomainSpec { lx, h, nx, nz }).map_err(err)?;
    let m = solve_malpha(&d, theta, u_swim, alpha).map_err(err)?;
    to_py(py, &serde_json::json!({"diagnostics": m.diagnostics, "bounds": verify_malpha_bounds(&m)}))
}

/// Runs an experiment spec given as a path (.toml/.json) or TOML text.
#[pyfunction]
#[pyo3(signature = (spec, out = None))]
fn experiment<'py>(py: Python<'py>, spec: &str, out: Option<PathBuf>) -> PyResult<Bound<'py, PyAny>> {
    let p = PathBuf::from(spec);
    let mut s = if p.is_file() { ExperimentSpec::load(&p) } else { ExperimentSpec::from_toml_str(spec) }.map_err(err)?;
    if out.is_some() {
        s.out = out;
    }
    let r = py.detach(|| run_experiment(&s)).map_err(err)?;
    to_py(py, &r)
}

#[pymodule]
pub fn bioconvect_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PySystem>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(malpha, m)?)?;
    m.add_function(wrap_pyfunction!(experiment, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
