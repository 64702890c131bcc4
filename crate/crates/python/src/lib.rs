//! Python bindings for the `hivopt` model, analysis and optimal-control solver.

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hivopt::cli::{sweep_rows, sweep_values};
use hivopt::{analysis, integrate, model, optctrl};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Model parameters. Keyword arguments override the disease-free reference set (`table1`).
#[pyclass(name = "ModelParams", module = "hivopt_py", from_py_object)]
#[derive(Clone)]
pub struct PyModelParams {
    inner: model::ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut inner = model::ModelParams::table1();
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                let key: String = k.extract()?;
                if !inner.set(&key, v.extract()?) {
                    return Err(PyKeyError::new_err(format!("unknown parameter `{key}`")));
                }
            }
        }
        inner.validate().map_err(value_err)?;
        Ok(Self { inner })
    }

    /// Parameter set with `R0 < 1`.
    #[staticmethod]
    fn table1() -> Self {
        Self { inner: model::ModelParams::table1() }
    }

    /// Parameter set with `R0 > 1`.
    #[staticmethod]
    fn table2() -> Self {
        Self { inner: model::ModelParams::table2() }
    }

    #[staticmethod]
    fn keys() -> Vec<&'static str> {
        model::ModelParams::KEYS.to_vec()
    }

    fn __getitem__(&self, key: &str) -> PyResult<f64> {
        self.inner.get(key).ok_or_else(|| PyKeyError::new_err(key.to_string()))
    }

    /// Copy with `key` replaced by `value`.
    fn with_value(&self, key: &str, value: f64) -> PyResult<Self> {
        let mut inner = self.inner;
        if !inner.set(key, value) {
            return Err(PyKeyError::new_err(key.to_string()));
        }
        inner.validate().map_err(value_err)?;
        Ok(Self { inner })
    }

    fn as_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for key in model::ModelParams::KEYS {
            d.set_item(key, self.inner.get(key))?;
        }
        Ok(d)
    }

    fn carrying_population(&self) -> f64 {
        self.inner.carrying_population()
    }

    fn __repr__(&self) -> String {
        let parts: Vec<String> =
            model::ModelParams::KEYS.iter().map(|k| format!("{k}={}", self.inner.get(k).unwrap_or(f64::NAN))).collect();
        format!("ModelParams({})", parts.join(", "))
    }
}

/// Compartment sizes `(S, I1, I2, A)`.
#[pyclass(name = "State", module = "hivopt_py", from_py_object)]
#[derive(Clone, Copy)]
pub struct PyState {
    #[pyo3(get, set)]
    s: f64,
    #[pyo3(get, set)]
    i1: f64,
    #[pyo3(get, set)]
    i2: f64,
    #[pyo3(get, set)]
    a: f64,
}

impl From<model::State> for PyState {
    fn from(x: model::State) -> Self {
        Self { s: x.s, i1: x.i1, i2: x.i2, a: x.a }
    }
}

impl From<PyState> for model::State {
    fn from(x: PyState) -> Self {
        model::State::new(x.s, x.i1, x.i2, x.a)
    }
}

#[pymethods]
impl PyState {
    #[new]
    fn new(s: f64, i1: f64, i2: f64, a: f64) -> Self {
        Self { s, i1, i2, a }
    }

    fn total(&self) -> f64 {
        model::State::from(*self).total()
    }

    fn as_tuple(&self) -> (f64, f64, f64, f64) {
        (self.s, self.i1, self.i2, self.a)
    }

    fn __repr__(&self) -> String {
        format!("State(s={}, i1={}, i2={}, a={})", self.s, self.i1, self.i2, self.a)
    }
}

/// Right-hand side of the model with condom use `u1` and full screening/treatment.
#[pyfunction]
#[pyo3(signature = (params, state, u1 = 0.0))]
fn rhs(params: &PyModelParams, state: PyState, u1: f64) -> PyState {
    model::rhs_uncontrolled(&state.into(), &params.inner, u1).into()
}

/// `R0` and its four contributions.
#[pyfunction]
#[pyo3(signature = (params, u1 = 0.0))]
fn basic_reproduction_number<'py>(py: Python<'py>, params: &PyModelParams, u1: f64) -> PyResult<Bound<'py, PyDict>> {
    let r = analysis::basic_reproduction_number(&params.inner, u1);
    let d = PyDict::new(py);
    d.set_item("r0", r.r0)?;
    d.set_item("zeta", (r.zeta1, r.zeta2, r.zeta3, r.zeta4))?;
    Ok(d)
}

#[pyfunction]
fn disease_free_equilibrium(params: &PyModelParams) -> PyState {
    analysis::disease_free_equilibrium(&params.inner).state.into()
}

/// Endemic equilibrium, or `None` when `R0 <= 1`.
#[pyfunction]
#[pyo3(signature = (params, u1 = 0.0))]
fn endemic_equilibrium(params: &PyModelParams, u1: f64) -> Option<PyState> {
    analysis::endemic_equilibrium(&params.inner, u1).map(|e| e.state.into())
}

fn stability_dict<'py>(py: Python<'py>, r: &analysis::StabilityReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("state", PyState::from(r.equilibrium.state))?;
    d.set_item("coefficients", r.poly_coeffs.clone())?;
    d.set_item("criterion", r.criterion_verdict.as_str())?;
    d.set_item("eigen", r.eigen_verdict.as_str())?;
    d.set_item("eigenvalues", r.eigenvalues.iter().map(|z| (z.re, z.im)).collect::<Vec<_>>())?;
    d.set_item("sign_changes", r.sign_changes)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (params, u1 = 0.0))]
fn dfe_stability<'py>(py: Python<'py>, params: &PyModelParams, u1: f64) -> PyResult<Bound<'py, PyDict>> {
    stability_dict(py, &analysis::dfe_stability(&params.inner, u1))
}

#[pyfunction]
#[pyo3(signature = (params, u1 = 0.0))]
fn endemic_stability<'py>(py: Python<'py>, params: &PyModelParams, u1: f64) -> PyResult<Option<Bound<'py, PyDict>>> {
    analysis::endemic_stability(&params.inner, u1).map(|r| stability_dict(py, &r)).transpose()
}

fn trajectory_dict<'py>(py: Python<'py>, tr: &integrate::Trajectory) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("t", tr.grid.times().collect::<Vec<_>>())?;
    for (i, name) in ["S", "I1", "I2", "A"].into_iter().enumerate() {
        d.set_item(name, tr.states.iter().map(|x| x.to_array()[i]).collect::<Vec<_>>())?;
    }
    if let Some(us) = &tr.controls {
        for (i, name) in ["u1", "u2", "u3"].into_iter().enumerate() {
            d.set_item(name, us.iter().map(|u| u.to_array()[i]).collect::<Vec<_>>())?;
        }
    }
    if let Some(ls) = &tr.adjoints {
        for (i, name) in ["lam_S", "lam_I1", "lam_I2", "lam_A"].into_iter().enumerate() {
            d.set_item(name, ls.iter().map(|l| l.to_array()[i]).collect::<Vec<_>>())?;
        }
    }
    d.set_item("clamped_mass", tr.clamped_mass)?;
    Ok(d)
}

/// Integrates the model with constant condom use. Returns columns as lists.
#[pyfunction]
#[pyo3(signature = (params, initial, t_final, h = 0.1, u1 = 0.0, t0 = 0.0))]
fn simulate<'py>(
    py: Python<'py>,
    params: &PyModelParams,
    initial: PyState,
    t_final: f64,
    h: f64,
    u1: f64,
    t0: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = integrate::TimeGrid::with_step(t0, t_final, h).map_err(value_err)?;
    let tr = integrate::simulate(&params.inner, initial.into(), &grid, u1).map_err(value_err)?;
    trajectory_dict(py, &tr)
}

/// Forward-backward sweep for the optimal controls. `weights` is `(a, b1, b2, b3)`;
/// `fixed` pins any of the three controls to a constant.
#[pyfunction]
#[pyo3(signature = (params, initial, t_final, weights, h = 0.1, fixed = (None, None, None), relaxation = 0.5, tolerance = 1e-3, max_iterations = 200))]
#[allow(clippy::too_many_arguments)]
fn optimize<'py>(
    py: Python<'py>,
    params: &PyModelParams,
    initial: PyState,
    t_final: f64,
    weights: (f64, f64, f64, f64),
    h: f64,
    fixed: (Option<f64>, Option<f64>, Option<f64>),
    relaxation: f64,
    tolerance: f64,
    max_iterations: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = integrate::TimeGrid::with_step(0.0, t_final, h).map_err(value_err)?;
    let w = optctrl::ObjectiveWeights::new(weights.0, weights.1, weights.2, weights.3);
    let opts =
        optctrl::SweepOptions { relaxation, tolerance, max_iterations, fixed_controls: [fixed.0, fixed.1, fixed.2] };
    let sol = py
        .detach(|| optctrl::forward_backward_sweep(&params.inner, &w, initial.into(), &grid, &opts))
        .map_err(value_err)?;
    let d = trajectory_dict(py, &sol.trajectory)?;
    d.set_item("objective", sol.objective)?;
    d.set_item("iterations", sol.iterations)?;
    d.set_item("converged", sol.converged)?;
    d.set_item("residuals", sol.residuals.clone())?;
    Ok(d)
}

/// Threshold analysis along one axis (a parameter key or `u1`).
#[pyfunction]
#[pyo3(signature = (params, axis, lo, hi, count, u1 = 0.0))]
fn sweep<'py>(
    py: Python<'py>,
    params: &PyModelParams,
    axis: &str,
    lo: f64,
    hi: f64,
    count: usize,
    u1: f64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let values = sweep_values(lo, hi, count);
    let rows = py.detach(|| sweep_rows(&params.inner, u1, axis, &values)).map_err(value_err)?;
    rows.iter()
        .map(|row| {
            let d = PyDict::new(py);
            let r = &row.report;
            d.set_item("value", row.value)?;
            d.set_item("r0", r.r0.r0)?;
            d.set_item("dfe", r.dfe.criterion_verdict.as_str())?;
            match &r.endemic {
                Some(e) => {
                    d.set_item("endemic", PyState::from(e.equilibrium.state))?;
                    d.set_item("endemic_stability", e.criterion_verdict.as_str())?;
                }
                None => {
                    d.set_item("endemic", py.None())?;
                    d.set_item("endemic_stability", py.None())?;
                }
            }
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn hivopt_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyState>()?;
    m.add_function(wrap_pyfunction!(rhs, m)?)?;
    m.add_function(wrap_pyfunction!(basic_reproduction_number, m)?)?;
    m.add_function(wrap_pyfunction!(disease_free_equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(endemic_equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(dfe_stability, m)?)?;
    m.add_function(wrap_pyfunction!(endemic_stability, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
