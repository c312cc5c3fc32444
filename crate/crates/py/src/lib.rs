use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use acmhd::diagnostics::{energy, DiagRecord};
use acmhd::harness::fit_rate as core_fit_rate;
use acmhd::io::{parse_config as core_parse_config, read_checkpoint, write_checkpoint};
use acmhd::solver::{make_initial_data, AcSolver, AcState, DataKind, InitialData};
use acmhd::{Error, Field, Grid3, VectorField};

fn py_err(e: Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn samples(f: &Field) -> PyResult<Vec<f64>> {
    Ok(f.to_physical().map_err(py_err)?.physical().map_err(py_err)?.to_vec())
}

fn vector_samples(v: &VectorField) -> PyResult<Vec<Vec<f64>>> {
    v.components().iter().map(samples).collect()
}

fn record_dict<'py>(py: Python<'py>, r: &DiagRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("time", r.time)?;
    d.set_item("energy", r.energy)?;
    d.set_item("enstrophy_u", r.enstrophy_u)?;
    d.set_item("enstrophy_B", r.enstrophy_b)?;
    d.set_item("div_u", r.div_u)?;
    d.set_item("div_B", r.div_b)?;
    d.set_item("q_u_L4", r.q_u_l4)?;
    d.set_item("q_B_L4", r.q_b_l4)?;
    Ok(d)
}

/// Periodic cube with `n` samples per side.
#[pyclass(name = "Grid", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrid(Grid3);

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (n, length = 2.0 * std::f64::consts::PI))]
    fn new(n: usize, length: f64) -> PyResult<Self> {
        Grid3::new(n, length).map(PyGrid).map_err(py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn length(&self) -> f64 {
        self.0.length()
    }

    fn __repr__(&self) -> String {
        format!("Grid(n={}, length={})", self.0.n(), self.0.length())
    }
}

/// Velocity, magnetic field, pressure and potential at one instant.
#[pyclass(name = "State", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyState(AcState);

#[pymethods]
impl PyState {
    /// Built-in initial data: `"well_prepared"` or `"ill_prepared"`.
    #[staticmethod]
    #[pyo3(signature = (grid, kind, epsilon, mu = 1.0, seed = 0))]
    fn initial(grid: &PyGrid, kind: &str, epsilon: f64, mu: f64, seed: u64) -> PyResult<Self> {
        let data = match kind.parse::<DataKind>().map_err(py_err)? {
            DataKind::WellPrepared => InitialData::WellPrepared,
            DataKind::IllPrepared => InitialData::IllPrepared,
            DataKind::Custom => return Err(PyValueError::new_err("use State.from_samples for custom data")),
        };
        make_initial_data(&data, epsilon, mu, &grid.0, seed).map(PyState).map_err(py_err)
    }

    /// State from physical samples in x-fastest order.
    #[staticmethod]
    #[pyo3(signature = (grid, u, b, p, phi, epsilon, mu = 1.0, time = 0.0))]
    #[allow(clippy::too_many_arguments)]
    fn from_samples(
        grid: &PyGrid,
        u: [Vec<f64>; 3],
        b: [Vec<f64>; 3],
        p: Vec<f64>,
        phi: Vec<f64>,
        epsilon: f64,
        mu: f64,
        time: f64,
    ) -> PyResult<Self> {
        let g = &grid.0;
        let field = |v: Vec<f64>| Field::from_physical(g, v).map_err(py_err);
        let vector = |c: [Vec<f64>; 3]| -> PyResult<VectorField> {
            let [x, y, z] = c;
            VectorField::new([field(x)?, field(y)?, field(z)?]).map_err(py_err)
        };
        AcState::new(vector(u)?, vector(b)?, field(p)?, field(phi)?, epsilon, mu, time)
            .map(PyState)
            .map_err(py_err)
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.epsilon()
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu()
    }

    #[getter]
    fn time(&self) -> f64 {
        self.0.time()
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(self.0.grid().clone())
    }

    fn velocity(&self) -> PyResult<Vec<Vec<f64>>> {
        vector_samples(self.0.u())
    }

    fn magnetic(&self) -> PyResult<Vec<Vec<f64>>> {
        vector_samples(self.0.b())
    }

    fn pressure(&self) -> PyResult<Vec<f64>> {
        samples(self.0.p())
    }

    fn potential(&self) -> PyResult<Vec<f64>> {
        samples(self.0.phi())
    }

    /// `½∫(|u|² + |B|² + ε|p|² + ε|φ|²)`
    fn energy(&self) -> f64 {
        energy(&self.0)
    }

    fn diagnostics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        record_dict(py, &DiagRecord::of_ac(&self.0).map_err(py_err)?)
    }

    fn __repr__(&self) -> String {
        format!(
            "State(n={}, epsilon={}, mu={}, time={})",
            self.0.grid().n(),
            self.0.epsilon(),
            self.0.mu(),
            self.0.time()
        )
    }
}

/// Strang-split integrator for the artificial-compressibility system.
#[pyclass(name = "Solver", frozen)]
struct PySolver(AcSolver);

#[pymethods]
impl PySolver {
    #[new]
    #[pyo3(signature = (nonlinear = true, resistivity = 1.0, cfl = 0.5))]
    fn new(nonlinear: bool, resistivity: f64, cfl: f64) -> Self {
        PySolver(AcSolver {
            nonlinear,
            resistivity,
            cfl,
        })
    }

    fn step(&self, py: Python<'_>, state: &PyState, dt: f64) -> PyResult<PyState> {
        py.detach(|| self.0.strang_step(&state.0, dt)).map(PyState).map_err(py_err)
    }

    /// Advances `steps` steps; returns the final state and one diagnostic
    /// record per step, including the initial one.
    fn run<'py>(
        &self,
        py: Python<'py>,
        state: &PyState,
        dt: f64,
        steps: usize,
    ) -> PyResult<(PyState, Vec<Bound<'py, PyDict>>)> {
        let mut records = Vec::with_capacity(steps + 1);
        let end = py
            .detach(|| {
                self.0.integrate(&state.0, dt, steps, |_, s| {
                    records.push(DiagRecord::of_ac(s)?);
                    Ok(())
                })
            })
            .map_err(py_err)?;
        let dicts = records.iter().map(|r| record_dict(py, r)).collect::<PyResult<Vec<_>>>()?;
        Ok((PyState(end), dicts))
    }
}

/// Least-squares power law `y = c·x^e`; returns `(e, c, r²)`.
#[pyfunction]
fn fit_rate(pairs: Vec<(f64, f64)>) -> PyResult<(f64, f64, f64)> {
    let f = core_fit_rate(&pairs).map_err(py_err)?;
    Ok((f.exponent, f.prefactor, f.r_squared))
}

/// Parses a run configuration and returns its canonical text.
#[pyfunction]
fn parse_config(text: &str) -> PyResult<String> {
    core_parse_config(text).map(|c| c.to_string()).map_err(py_err)
}

#[pyfunction]
fn save_checkpoint(state: &PyState, path: PathBuf) -> PyResult<()> {
    write_checkpoint(&state.0, &path).map_err(py_err)
}

#[pyfunction]
fn load_checkpoint(path: PathBuf) -> PyResult<PyState> {
    read_checkpoint(&path, None)
        .and_then(|c| c.to_state())
        .map(PyState)
        .map_err(py_err)
}

#[pymodule]
fn pyacmhd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PySolver>()?;
    m.add_function(wrap_pyfunction!(fit_rate, m)?)?;
    m.add_function(wrap_pyfunction!(parse_config, m)?)?;
    m.add_function(wrap_pyfunction!(save_checkpoint, m)?)?;
    m.add_function(wrap_pyfunction!(load_checkpoint, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
