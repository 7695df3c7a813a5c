//! Python bindings: meshes, random fields, duality maps and descent runs.
//! Nodal functions cross the boundary as plain lists of floats.

use std::collections::BTreeMap;
use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ssd_core::cli::{run, validate};
use ssd_core::duality::{steepest_direction, DualVector};
use ssd_core::fem::{NodalFunction, SolverSettings, StructuredMesh};
use ssd_core::optimize::{
    check_schedule as core_check_schedule, rate_diagnostic, sgd_run, ssd_run, DescentHistory,
    RunAborted, RunOptions, StepRule, StepSchedule,
};
use ssd_core::problems::{App1 as CoreApp1, App1Config, App2 as CoreApp2, App2Config, StochasticObjective};
use ssd_core::random_field::{FieldDraw, KleSpec};

fn py_err(e: ssd_core::Error) -> PyErr {
    match e {
        ssd_core::Error::InvalidArgument(_) | ssd_core::Error::Config { .. } => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn aborted(e: RunAborted) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

#[pyclass(name = "Mesh", module = "ssd", frozen, from_py_object)]
#[derive(Clone)]
struct Mesh {
    inner: Arc<StructuredMesh>,
}

#[pymethods]
impl Mesh {
    #[new]
    fn new(nx: usize, ny: usize) -> PyResult<Self> {
        Ok(Self {
            inner: StructuredMesh::new(nx, ny).map_err(py_err)?,
        })
    }

    #[getter]
    fn nx(&self) -> usize {
        self.inner.nx()
    }

    #[getter]
    fn ny(&self) -> usize {
        self.inner.ny()
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.inner.num_nodes()
    }

    #[getter]
    fn num_triangles(&self) -> usize {
        self.inner.num_triangles()
    }

    fn nodes(&self) -> Vec<(f64, f64)> {
        self.inner.nodes().iter().map(|x| (x[0], x[1])).collect()
    }

    fn boundary_mask(&self) -> Vec<bool> {
        self.inner.boundary_mask().to_vec()
    }

    fn lumped_mass(&self) -> Vec<f64> {
        self.inner.lumped_mass().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("Mesh({}, {})", self.inner.nx(), self.inner.ny())
    }
}

impl Mesh {
    fn function(&self, values: Vec<f64>) -> PyResult<NodalFunction> {
        NodalFunction::new(self.inner.clone(), values).map_err(py_err)
    }
}

#[pyclass(name = "Kle", module = "ssd", frozen)]
struct Kle {
    inner: KleSpec,
}

#[pymethods]
impl Kle {
    #[new]
    #[pyo3(signature = (tau = 1.0, alpha = 2.0, kmax = 10))]
    fn new(tau: f64, alpha: f64, kmax: usize) -> PyResult<Self> {
        Ok(Self {
            inner: KleSpec::new(tau, alpha, kmax).map_err(py_err)?,
        })
    }

    fn eigenvalue(&self, k1: usize, k2: usize) -> f64 {
        self.inner.eigenvalue([k1, k2])
    }

    fn variance_at(&self, x: f64, y: f64) -> f64 {
        self.inner.variance_at([x, y])
    }

    /// Nodal values of the field drawn from `seed`.
    fn sample(&self, mesh: &Mesh, seed: u64) -> Vec<f64> {
        FieldDraw::from_seed(&self.inner, seed).to_nodal(&mesh.inner).into_coeffs()
    }
}

/// Unit steepest-descent direction and dual norm of a functional.
/// `kind="w1p0"` takes assembled load values, `kind="lp"` a nodal density.
#[pyfunction]
#[pyo3(signature = (mesh, values, p, kind = "w1p0"))]
fn steepest(mesh: &Mesh, values: Vec<f64>, p: f64, kind: &str) -> PyResult<(Vec<f64>, f64)> {
    let f = match kind {
        "w1p0" => DualVector::w1p0(&mesh.inner, p, values),
        "lp" => DualVector::lp(mesh.function(values)?, p),
        other => return Err(PyValueError::new_err(format!("unknown space kind {other:?}"))),
    }
    .map_err(py_err)?;
    let d = steepest_direction(&f, &SolverSettings::default()).map_err(py_err)?;
    Ok((d.direction.into_coeffs(), d.dual_norm))
}

#[pyclass(name = "History", module = "ssd", frozen)]
struct History {
    inner: DescentHistory,
    iterate: Vec<f64>,
}

#[pymethods]
impl History {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn steps(&self) -> Vec<f64> {
        self.inner.records().iter().map(|r| r.step).collect()
    }

    #[getter]
    fn dual_norms(&self) -> Vec<f64> {
        self.inner.records().iter().map(|r| r.dual_norm).collect()
    }

    #[getter]
    fn running_min(&self) -> Vec<f64> {
        self.inner.records().iter().map(|r| r.running_min).collect()
    }

    #[getter]
    fn cumulative_step(&self) -> Vec<f64> {
        self.inner.records().iter().map(|r| r.cumulative_step).collect()
    }

    #[getter]
    fn seeds(&self) -> Vec<u64> {
        self.inner.seeds()
    }

    /// Final iterate `u_{N+1}`.
    #[getter]
    fn iterate(&self) -> Vec<f64> {
        self.iterate.clone()
    }

    /// `(j, Σt, running min, product, 1/Σt)` per iteration.
    fn rate_diagnostic(&self) -> Vec<(usize, f64, f64, f64, f64)> {
        rate_diagnostic(&self.inner)
            .into_iter()
            .map(|r| (r.j, r.cumulative_step, r.running_min, r.product, r.reference))
            .collect()
    }
}

fn run_problem<P: StochasticObjective>(
    problem: &P,
    iters: usize,
    seed: u64,
    t0: f64,
    gamma: f64,
    method: &str,
) -> PyResult<History> {
    let schedule = StepSchedule::new(t0, gamma).map_err(py_err)?;
    let u0 = NodalFunction::zeros(problem.mesh());
    let options = RunOptions::default();
    let out = match method {
        "ssd" => ssd_run(problem, &u0, &schedule.into(), iters, seed, &options),
        "sgd" => sgd_run(problem, &u0, &schedule.into(), iters, seed, &options),
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    }
    .map_err(aborted)?;
    Ok(History {
        inner: out.history,
        iterate: out.iterate.into_coeffs(),
    })
}

/// Random p-Laplace energy on `W^{1,p}_0`.
#[pyclass(name = "App1", module = "ssd", frozen)]
struct App1 {
    mesh: Mesh,
    inner: CoreApp1,
}

#[pymethods]
impl App1 {
    #[new]
    #[pyo3(signature = (mesh, p = 4.0, tau = 1.0, alpha = 3.0, kmax = 10))]
    fn new(mesh: Mesh, p: f64, tau: f64, alpha: f64, kmax: usize) -> PyResult<Self> {
        let mut cfg = App1Config::new(mesh.inner.clone());
        cfg.p = p;
        cfg.kle = KleSpec::new(tau, alpha, kmax).map_err(py_err)?;
        Ok(Self {
            inner: CoreApp1::new(cfg).map_err(py_err)?,
            mesh,
        })
    }

    fn value(&self, u: Vec<f64>, seed: u64) -> PyResult<f64> {
        let u = self.mesh.function(u)?;
        self.inner.value(&u, &mut self.inner.draw_seeded(seed)).map_err(py_err)
    }

    /// Assembled derivative values `j_u[φ_i]`.
    fn derivative(&self, u: Vec<f64>, seed: u64) -> PyResult<Vec<f64>> {
        let u = self.mesh.function(u)?;
        let d = self.inner.derivative(&u, &mut self.inner.draw_seeded(seed)).map_err(py_err)?;
        Ok(d.values().to_vec())
    }

    #[pyo3(signature = (iters, seed, t0 = 1.0, gamma = 1.0, method = "ssd"))]
    fn run(&self, iters: usize, seed: u64, t0: f64, gamma: f64, method: &str) -> PyResult<History> {
        run_problem(&self.inner, iters, seed, t0, gamma, method)
    }
}

/// Semilinear optimal control with random diffusion and source, `L^p` controls.
#[pyclass(name = "App2", module = "ssd", frozen)]
struct App2 {
    mesh: Mesh,
    inner: CoreApp2,
}

#[pymethods]
impl App2 {
    #[new]
    #[pyo3(signature = (mesh, p = 4.0, beta = 1e-2, tau = 1.0, alpha = 2.0, kmax = 10))]
    fn new(mesh: Mesh, p: f64, beta: f64, tau: f64, alpha: f64, kmax: usize) -> PyResult<Self> {
        let mut cfg = App2Config::new(mesh.inner.clone());
        cfg.p = p;
        cfg.beta = beta;
        let kle = KleSpec::new(tau, alpha, kmax).map_err(py_err)?;
        cfg.diffusion_kle = kle;
        cfg.source_kle = kle;
        Ok(Self {
            inner: CoreApp2::new(cfg).map_err(py_err)?,
            mesh,
        })
    }

    fn value(&self, u: Vec<f64>, seed: u64) -> PyResult<f64> {
        let u = self.mesh.function(u)?;
        self.inner.value(&u, &mut self.inner.draw_seeded(seed)).map_err(py_err)
    }

    fn state(&self, u: Vec<f64>, seed: u64) -> PyResult<Vec<f64>> {
        let u = self.mesh.function(u)?;
        let y = self.inner.state(&u, &mut self.inner.draw_seeded(seed)).map_err(py_err)?;
        Ok(y.into_coeffs())
    }

    /// Nodal density `r` of the derivative, `j_u[v] = ∫ r v`.
    fn derivative(&self, u: Vec<f64>, seed: u64) -> PyResult<Vec<f64>> {
        let u = self.mesh.function(u)?;
        let d = self.inner.derivative(&u, &mut self.inner.draw_seeded(seed)).map_err(py_err)?;
        Ok(d.density().map(|r| r.coeffs().to_vec()).unwrap_or_default())
    }

    #[pyo3(signature = (iters, seed, t0 = 1.0, gamma = 1.0, method = "ssd"))]
    fn run(&self, iters: usize, seed: u64, t0: f64, gamma: f64, method: &str) -> PyResult<History> {
        run_problem(&self.inner, iters, seed, t0, gamma, method)
    }
}

/// Divergence heuristic for `t_n = t0 n^{-gamma}` over `horizon` steps.
#[pyfunction]
#[pyo3(signature = (t0, gamma, horizon, scaled = false))]
fn check_schedule<'py>(py: Python<'py>, t0: f64, gamma: f64, horizon: usize, scaled: bool) -> PyResult<Bound<'py, PyDict>> {
    let s = StepSchedule::new(t0, gamma).map_err(py_err)?;
    let rule = if scaled { StepRule::DualNormScaled(s) } else { StepRule::Schedule(s) };
    let report = core_check_schedule(&rule, horizon).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("partial_sums", report.partial_sums)?;
    out.set_item("growth_ratio", report.growth_ratio)?;
    out.set_item("divergent", report.divergent)?;
    Ok(out)
}

/// Runs an experiment from a flat config dict, the same keys as the CLI.
/// Returns the written history files and the manifest path.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, config: BTreeMap<String, Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyDict>> {
    let mut raw = BTreeMap::new();
    for (k, v) in config {
        raw.insert(k, v.str()?.to_string());
    }
    let cfg = validate(&raw).into_result().map_err(py_err)?;
    let summary = run(&cfg).map_err(py_err)?;
    let out = PyDict::new(py);
    let files = PyDict::new(py);
    for h in &summary.histories {
        files.set_item(&h.name, cfg.out.join(&h.file).to_string_lossy().into_owned())?;
    }
    out.set_item("histories", files)?;
    out.set_item("manifest", summary.manifest.to_string_lossy().into_owned())?;
    out.set_item("identity_max_abs_diff", summary.identity_max_abs_diff)?;
    Ok(out)
}

#[pymodule]
fn ssd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Mesh>()?;
    m.add_class::<Kle>()?;
    m.add_class::<History>()?;
    m.add_class::<App1>()?;
    m.add_class::<App2>()?;
    m.add_function(wrap_pyfunction!(steepest, m)?)?;
    m.add_function(wrap_pyfunction!(check_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
