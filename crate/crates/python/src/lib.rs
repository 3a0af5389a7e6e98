//! Python bindings for `suslov_hk`.
//!
//! States cross the boundary as tuples (3D, planar) or lists (n-dimensional).

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use suslov_hk::closedform::{self, Branch, XSign};
use suslov_hk::model3::{self, BodyOmega, PlanarState, StepSize};
use suslov_hk::modeln::{self, NDOmega};

create_exception!(suslov_hk_py, SuslovError, PyValueError);

fn err(e: impl std::fmt::Display) -> PyErr {
    SuslovError::new_err(e.to_string())
}

fn step(eps: f64) -> PyResult<StepSize> {
    StepSize::new(eps).map_err(err)
}

fn body(w: (f64, f64)) -> BodyOmega {
    BodyOmega::new(w.0, w.1)
}

fn pair(w: BodyOmega) -> (f64, f64) {
    (w.omega1, w.omega2)
}

/// Inertia of the 3D body: `I1, I2` and the couplings `I13, I23`.
#[pyclass(name = "Inertia3", module = "suslov_hk_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyInertia3(model3::Inertia3);

#[pymethods]
impl PyInertia3 {
    #[new]
    fn new(i1: f64, i2: f64, i13: f64, i23: f64) -> PyResult<Self> {
        model3::Inertia3::new(i1, i2, i13, i23)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn i1(&self) -> f64 {
        self.0.i1()
    }

    #[getter]
    fn i2(&self) -> f64 {
        self.0.i2()
    }

    #[getter]
    fn i13(&self) -> f64 {
        self.0.i13()
    }

    #[getter]
    fn i23(&self) -> f64 {
        self.0.i23()
    }

    fn product(&self) -> f64 {
        self.0.product()
    }

    fn jac(&self) -> f64 {
        self.0.jac()
    }

    fn is_degenerate(&self) -> bool {
        self.0.is_degenerate()
    }

    fn __repr__(&self) -> String {
        format!(
            "Inertia3(i1={}, i2={}, i13={}, i23={})",
            self.0.i1(),
            self.0.i2(),
            self.0.i13(),
            self.0.i23()
        )
    }
}

/// n-dimensional inertia: the diagonal `I_11..I_nn` and the last column
/// `I_1n..I_{n-1,n}`.
#[pyclass(name = "NDInertia", module = "suslov_hk_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyNDInertia(modeln::NDInertia);

#[pymethods]
impl PyNDInertia {
    #[new]
    fn new(diag: Vec<f64>, off: Vec<f64>) -> PyResult<Self> {
        modeln::NDInertia::new(diag, off).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn diag(&self) -> Vec<f64> {
        self.0.diag().to_vec()
    }

    #[getter]
    fn off(&self) -> Vec<f64> {
        self.0.off().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "NDInertia(diag={:?}, off={:?})",
            self.0.diag(),
            self.0.off()
        )
    }
}

/// Parameters of the explicit orbit through a given state.
#[pyclass(name = "ClosedFormParams", module = "suslov_hk_py", frozen)]
struct PyClosedFormParams(closedform::ClosedFormParams);

#[pymethods]
impl PyClosedFormParams {
    #[getter]
    fn h(&self) -> f64 {
        self.0.h()
    }

    #[getter]
    fn k1(&self) -> f64 {
        self.0.k1()
    }

    #[getter]
    fn k2(&self) -> f64 {
        self.0.k2()
    }

    /// +1 or -1.
    #[getter]
    fn sign_x(&self) -> f64 {
        self.0.sign_x().value()
    }

    #[getter]
    fn c(&self) -> f64 {
        self.0.c()
    }

    fn planar(&self, n: i64) -> (f64, f64) {
        let p = closedform::planar_closed(n, &self.0);
        (p.x, p.y)
    }

    fn omega(&self, n: i64) -> PyResult<(f64, f64)> {
        closedform::omega_closed(n, &self.0).map(pair).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "ClosedFormParams(h={}, k1={}, k2={}, sign_x={})",
            self.0.h(),
            self.0.k1(),
            self.0.k2(),
            self.0.sign_x().value()
        )
    }
}

#[pyfunction]
fn hk_step(omega: (f64, f64), inertia: &PyInertia3, eps: f64) -> PyResult<(f64, f64)> {
    model3::hk_step(body(omega), &inertia.0, step(eps)?)
        .map(pair)
        .map_err(err)
}

#[pyfunction]
fn hk_step_back(omega: (f64, f64), inertia: &PyInertia3, eps: f64) -> PyResult<(f64, f64)> {
    model3::hk_step_back(body(omega), &inertia.0, step(eps)?)
        .map(pair)
        .map_err(err)
}

#[pyfunction]
fn delta(omega: (f64, f64), inertia: &PyInertia3, eps: f64) -> PyResult<f64> {
    Ok(model3::delta(body(omega), &inertia.0, step(eps)?))
}

#[pyfunction]
fn first_integral(omega: (f64, f64), inertia: &PyInertia3, eps: f64) -> PyResult<f64> {
    Ok(model3::first_integral(body(omega), &inertia.0, step(eps)?))
}

#[pyfunction]
fn energy(omega: (f64, f64), inertia: &PyInertia3) -> f64 {
    model3::energy(body(omega), &inertia.0)
}

#[pyfunction]
fn constraint_residual(omega: (f64, f64), inertia: &PyInertia3) -> f64 {
    model3::constraint_residual(body(omega), &inertia.0)
}

#[pyfunction]
fn to_planar(omega: (f64, f64), inertia: &PyInertia3) -> (f64, f64) {
    let p = model3::to_planar(body(omega), &inertia.0);
    (p.x, p.y)
}

#[pyfunction]
fn from_planar(planar: (f64, f64), inertia: &PyInertia3) -> PyResult<(f64, f64)> {
    model3::from_planar(PlanarState::new(planar.0, planar.1), &inertia.0)
        .map(pair)
        .map_err(err)
}

#[pyfunction]
fn planar_step(planar: (f64, f64), inertia: &PyInertia3, eps: f64) -> PyResult<(f64, f64)> {
    model3::planar_step(PlanarState::new(planar.0, planar.1), &inertia.0, step(eps)?)
        .map(|p| (p.x, p.y))
        .map_err(err)
}

#[pyfunction]
fn first_integral_planar(planar: (f64, f64), inertia: &PyInertia3, eps: f64) -> PyResult<f64> {
    Ok(model3::first_integral_planar(
        PlanarState::new(planar.0, planar.1),
        &inertia.0,
        step(eps)?,
    ))
}

/// `steps + 1` states starting with `omega`. Raises on a pole.
#[pyfunction]
fn orbit(
    omega: (f64, f64),
    inertia: &PyInertia3,
    eps: f64,
    steps: usize,
) -> PyResult<Vec<(f64, f64)>> {
    model3::Orbit::new(body(omega), inertia.0, step(eps)?)
        .take(steps + 1)
        .map(|r| r.map(pair).map_err(err))
        .collect()
}

#[pyfunction]
fn c_of_h(h: f64, inertia: &PyInertia3, eps: f64) -> PyResult<f64> {
    closedform::c_of_h(h, &inertia.0, step(eps)?).map_err(err)
}

#[pyfunction]
fn k1_of_h(h: f64, inertia: &PyInertia3, eps: f64) -> PyResult<f64> {
    closedform::k1_of_h(h, &inertia.0, step(eps)?).map_err(err)
}

/// `branch` is 1 or 2.
#[pyfunction]
#[pyo3(signature = (u, c, branch = 1))]
fn u_step(u: f64, c: f64, branch: u8) -> PyResult<f64> {
    let branch = match branch {
        1 => Branch::First,
        2 => Branch::Second,
        other => {
            return Err(PyValueError::new_err(format!(
                "branch must be 1 or 2, got {other}"
            )))
        }
    };
    Ok(closedform::u_step(u, c, branch))
}

#[pyfunction]
fn fit_params(omega: (f64, f64), inertia: &PyInertia3, eps: f64) -> PyResult<PyClosedFormParams> {
    closedform::fit_params(body(omega), &inertia.0, step(eps)?)
        .map(PyClosedFormParams)
        .map_err(err)
}

/// Parameters with an explicit level `h`, phase `k2` and sign of `x`.
#[pyfunction]
#[pyo3(signature = (h, k2, inertia, eps, sign_x = 1.0))]
fn closed_form_params(
    h: f64,
    k2: f64,
    inertia: &PyInertia3,
    eps: f64,
    sign_x: f64,
) -> PyResult<PyClosedFormParams> {
    closedform::ClosedFormParams::new(h, k2, XSign::of(sign_x), inertia.0, step(eps)?)
        .map(PyClosedFormParams)
        .map_err(err)
}

#[pyfunction]
fn hk_step_nd(omega: Vec<f64>, inertia: &PyNDInertia, eps: f64) -> PyResult<Vec<f64>> {
    modeln::hk_step_nd(&NDOmega(omega), &inertia.0, step(eps)?)
        .map(|w| w.0)
        .map_err(err)
}

#[pyfunction]
fn hk_step_nd_back(omega: Vec<f64>, inertia: &PyNDInertia, eps: f64) -> PyResult<Vec<f64>> {
    modeln::hk_step_nd_back(&NDOmega(omega), &inertia.0, step(eps)?)
        .map(|w| w.0)
        .map_err(err)
}

/// The step matrix as a list of rows.
#[pyfunction]
fn build_step_matrix(omega: Vec<f64>, inertia: &PyNDInertia, eps: f64) -> PyResult<Vec<Vec<f64>>> {
    let a = modeln::build_step_matrix(&NDOmega(omega), &inertia.0, step(eps)?).map_err(err)?;
    Ok(a.row_iter().map(|r| r.iter().copied().collect()).collect())
}

#[pyfunction]
fn continuous_rhs_nd(omega: Vec<f64>, inertia: &PyNDInertia) -> PyResult<Vec<f64>> {
    modeln::continuous_rhs_nd(&NDOmega(omega), &inertia.0)
        .map(|w| w.0)
        .map_err(err)
}

#[pyfunction]
fn steady_rotation(inertia: &PyNDInertia, c: f64) -> Vec<f64> {
    modeln::steady_rotation(&inertia.0, c).0
}

/// Figure preset `k` as a dict: epsilon, inertia, omega0, steps.
#[pyfunction]
fn preset<'py>(py: Python<'py>, figure: i64) -> PyResult<Bound<'py, PyDict>> {
    let p = suslov_hk::cli::figure_preset(figure).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("figure", p.id)?;
    d.set_item("epsilon", p.epsilon)?;
    d.set_item(
        "inertia",
        PyInertia3::new(p.i1, p.i2, p.i13, p.i23)?.into_pyobject(py)?,
    )?;
    d.set_item(
        "omega0",
        (
            suslov_hk::cli::PRESET_OMEGA0[0],
            suslov_hk::cli::PRESET_OMEGA0[1],
        ),
    )?;
    d.set_item("steps", suslov_hk::cli::FIGURE_STEPS)?;
    Ok(d)
}

#[pymodule]
pub fn suslov_hk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SuslovError", m.py().get_type::<SuslovError>())?;
    m.add_class::<PyInertia3>()?;
    m.add_class::<PyNDInertia>()?;
    m.add_class::<PyClosedFormParams>()?;
    m.add_function(wrap_pyfunction!(hk_step, m)?)?;
    m.add_function(wrap_pyfunction!(hk_step_back, m)?)?;
    m.add_function(wrap_pyfunction!(delta, m)?)?;
    m.add_function(wrap_pyfunction!(first_integral, m)?)?;
    m.add_function(wrap_pyfunction!(energy, m)?)?;
    m.add_function(wrap_pyfunction!(constraint_residual, m)?)?;
    m.add_function(wrap_pyfunction!(to_planar, m)?)?;
    m.add_function(wrap_pyfunction!(from_planar, m)?)?;
    m.add_function(wrap_pyfunction!(planar_step, m)?)?;
    m.add_function(wrap_pyfunction!(first_integral_planar, m)?)?;
    m.add_function(wrap_pyfunction!(orbit, m)?)?;
    m.add_function(wrap_pyfunction!(c_of_h, m)?)?;
    m.add_function(wrap_pyfunction!(k1_of_h, m)?)?;
    m.add_function(wrap_pyfunction!(u_step, m)?)?;
    m.add_function(wrap_pyfunction!(fit_params, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_params, m)?)?;
    m.add_function(wrap_pyfunction!(hk_step_nd, m)?)?;
    m.add_function(wrap_pyfunction!(hk_step_nd_back, m)?)?;
    m.add_function(wrap_pyfunction!(build_step_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(continuous_rhs_nd, m)?)?;
    m.add_function(wrap_pyfunction!(steady_rotation, m)?)?;
    m.add_function(wrap_pyfunction!(preset, m)?)?;
    Ok(())
}
