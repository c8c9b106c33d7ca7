//! Python bindings: `import peakon`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;

use peakon_core::asympt;
use peakon_core::epsim::{self, Experiment, SimConfig};
use peakon_core::shooter::{self, GridSpec, ShootOptions};
use peakon_core::speeds;
use peakon_core::wavealg;
use peakon_core::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::Domain { .. } | Error::Inconsistent(_) | Error::Grid(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn value_to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any().unbind(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any().unbind(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(a) => {
            let items = a.iter().map(|x| value_to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any().unbind()
        }
        Value::Object(m) => {
            let d = PyDict::new(py);
            for (k, x) in m {
                d.set_item(k, value_to_py(py, x)?)?;
            }
            d.into_any().unbind()
        }
    })
}

/// Serializable result as nested dicts and lists (non-finite floats become `None`).
fn to_py<T: Serialize>(py: Python<'_>, x: &T) -> PyResult<Py<PyAny>> {
    let v = serde_json::to_value(x).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    value_to_py(py, &v)
}

/// Wave parameters at speed `c` (default: the critical speed).
#[pyclass(name = "Params", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: wavealg::Params,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (kappa, c=None))]
    fn new(kappa: f64, c: Option<f64>) -> PyResult<Self> {
        let inner = match c {
            Some(c) => wavealg::Params::with_speed(kappa, c),
            None => wavealg::Params::critical(kappa),
        }
        .map_err(err)?;
        Ok(PyParams { inner })
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c
    }

    /// Peak density; `inf` for the cold peaked wave.
    #[getter]
    fn rho_star(&self) -> f64 {
        self.inner.rho_star_value().unwrap_or(f64::INFINITY)
    }

    #[getter]
    fn v_star(&self) -> f64 {
        self.inner.v_star
    }

    #[getter]
    fn phi_star(&self) -> f64 {
        self.inner.phi_star
    }

    #[getter]
    fn rho_hat(&self) -> f64 {
        self.inner.rho_hat
    }

    #[getter]
    fn critical(&self) -> bool {
        self.inner.critical
    }

    /// `H(rho)`.
    fn potential(&self, rho: f64) -> f64 {
        self.inner.potential(rho)
    }

    /// `h(rho) = H'(rho)`.
    fn slope(&self, rho: f64) -> f64 {
        self.inner.slope(rho)
    }

    /// `g(rho)`.
    fn energy(&self, rho: f64) -> f64 {
        self.inner.energy(rho)
    }

    fn __repr__(&self) -> String {
        format!("Params(kappa={}, c={}, critical={})", self.inner.kappa, self.inner.c, self.inner.critical)
    }
}

/// Symmetric wave profile on a grid centred at the peak.
#[pyclass(name = "WaveProfile", frozen)]
struct PyWaveProfile {
    inner: shooter::WaveProfile,
}

#[pymethods]
impl PyWaveProfile {
    #[getter]
    fn xi(&self) -> Vec<f64> {
        self.inner.xi.clone()
    }

    #[getter]
    fn rho(&self) -> Vec<f64> {
        self.inner.rho.clone()
    }

    #[getter]
    fn v(&self) -> Vec<f64> {
        self.inner.v.clone()
    }

    #[getter]
    fn phi(&self) -> Vec<f64> {
        self.inner.phi.clone()
    }

    /// `E = -phi'`.
    #[getter]
    fn e(&self) -> Vec<f64> {
        self.inner.e.clone()
    }

    #[getter]
    fn params(&self) -> PyParams {
        PyParams { inner: self.inner.params }
    }

    #[getter]
    fn max_drift(&self) -> f64 {
        self.inner.max_drift
    }

    #[getter]
    fn peak_index(&self) -> usize {
        self.inner.peak_index
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Width of the region where `rho > 1 + m sqrt(kappa)`.
    fn transition_thickness(&self, m: f64) -> PyResult<f64> {
        asympt::transition_thickness(&self.inner, m).map_err(err)
    }

    /// Power-law fits at the peak against their closed forms.
    #[pyo3(signature = (window=asympt::DEFAULT_WINDOW))]
    fn verify_peak(&self, py: Python<'_>, window: (f64, f64)) -> PyResult<Py<PyAny>> {
        let rep = if self.inner.params.kappa > 0.0 {
            asympt::verify_peak_isothermal(&self.inner, window)
        } else {
            asympt::verify_peak_cold(&self.inner, window)
        }
        .map_err(err)?;
        to_py(py, &rep)
    }
}

#[pyfunction]
#[pyo3(signature = (kappa, tol=speeds::DEFAULT_TOL))]
fn critical_speed(kappa: f64, tol: f64) -> PyResult<f64> {
    Ok(speeds::critical_speed(kappa, tol).map_err(err)?.c)
}

/// Rows `{kappa, c, residual, gap, gap_over_sqrt_kappa}`.
#[pyfunction]
#[pyo3(signature = (kappas, tol=speeds::DEFAULT_TOL))]
fn speed_gap_scan(py: Python<'_>, kappas: Vec<f64>, tol: f64) -> PyResult<Py<PyAny>> {
    to_py(py, &speeds::speed_gap_scan(&kappas, tol).map_err(err)?)
}

/// Shoots the wave for `kappa` at speed `c` (default: critical).
#[pyfunction]
#[pyo3(signature = (kappa, c=None, delta=1e-8, tol=1e-10, per_side=2000, s_max=None))]
fn wave(kappa: f64, c: Option<f64>, delta: f64, tol: f64, per_side: usize, s_max: Option<f64>) -> PyResult<PyWaveProfile> {
    let p = PyParams::new(kappa, c)?.inner;
    let opts = ShootOptions { delta, tol, ..Default::default() };
    let grid = GridSpec { per_side, s_max, ..Default::default() };
    let (_, prof) = shooter::wave(&p, &opts, &grid).map_err(err)?;
    Ok(PyWaveProfile { inner: prof })
}

/// `[(kappa, thickness)]` for the critical waves.
#[pyfunction]
#[pyo3(signature = (kappas, m=2.0))]
fn thickness_sweep(kappas: Vec<f64>, m: f64) -> PyResult<Vec<(f64, f64)>> {
    asympt::thickness_sweep(&kappas, m, &ShootOptions::default(), &GridSpec::default()).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (kappas, alphas=vec![0.2], betas=vec![0.5], ps=vec![1.2]))]
fn cold_limit_report(py: Python<'_>, kappas: Vec<f64>, alphas: Vec<f64>, betas: Vec<f64>, ps: Vec<f64>) -> PyResult<Py<PyAny>> {
    let rep = asympt::cold_limit_report(&kappas, &alphas, &betas, &ps, &ShootOptions::default(), &GridSpec::default())
        .map_err(err)?;
    to_py(py, &rep)
}

/// Solves `-phi'' = rho - exp(phi)` on the periodic grid of half-length `l`.
#[pyfunction]
#[pyo3(signature = (rho, l, tol=1e-11))]
fn poisson_solve(rho: Vec<f64>, l: f64, tol: f64) -> PyResult<Vec<f64>> {
    if !rho.len().is_power_of_two() {
        return Err(PyValueError::new_err("len(rho) must be a power of two"));
    }
    let sp = epsim::Spectral::new(rho.len(), l);
    let guess: Vec<f64> = rho.iter().map(|r| r.max(1e-300).ln()).collect();
    Ok(epsim::poisson_solve(&sp, &rho, &guess, tol).map_err(err)?.0)
}

/// Runs `gaussian-v` or `sech-rho` and returns `(report, final_state)`.
#[pyfunction]
#[pyo3(signature = (experiment, kappa=0.0, modes=1024, dt=1e-3, tmax=10.0, l=None))]
fn simulate(
    py: Python<'_>,
    experiment: &str,
    kappa: f64,
    modes: usize,
    dt: f64,
    tmax: f64,
    l: Option<f64>,
) -> PyResult<(Py<PyAny>, Py<PyAny>)> {
    let exp = match experiment {
        "gaussian-v" => Experiment::GaussianV,
        "sech-rho" => Experiment::SechRho,
        other => return Err(PyValueError::new_err(format!("unknown experiment {other:?}"))),
    };
    let cfg = SimConfig { n_modes: modes, dt, kappa, t_max: tmax, ..SimConfig::new(l.unwrap_or(exp.default_l())) };
    let (traj, rep) = py.detach(|| epsim::run_experiment(exp, &cfg)).map_err(err)?;
    let last = traj.snapshots.last().ok_or_else(|| PyRuntimeError::new_err("no snapshots"))?;
    let state = PyDict::new(py);
    state.set_item("t", last.t)?;
    state.set_item("x", traj.x.clone())?;
    state.set_item("rho", last.rho.clone())?;
    state.set_item("v", last.v.clone())?;
    state.set_item("phi", last.phi.clone())?;
    Ok((to_py(py, &rep)?, state.into_any().unbind()))
}

#[pyfunction]
#[pyo3(signature = (x, rho, v, l=None))]
fn blowup_profile_analysis(py: Python<'_>, x: Vec<f64>, rho: Vec<f64>, v: Vec<f64>, l: Option<f64>) -> PyResult<Py<PyAny>> {
    let n = x.len();
    if n < 8 || !n.is_power_of_two() || rho.len() != n || v.len() != n {
        return Err(PyValueError::new_err("x, rho, v must share a power-of-two length >= 8"));
    }
    let cfg = SimConfig { n_modes: n, ..SimConfig::new(l.unwrap_or(-x[0])) };
    to_py(py, &epsim::blowup_profile_analysis(&cfg, &x, &rho, &v).map_err(err)?)
}

#[pymodule]
fn peakon(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyWaveProfile>()?;
    m.add_function(wrap_pyfunction!(critical_speed, m)?)?;
    m.add_function(wrap_pyfunction!(speed_gap_scan, m)?)?;
    m.add_function(wrap_pyfunction!(wave, m)?)?;
    m.add_function(wrap_pyfunction!(thickness_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(cold_limit_report, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_solve, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(blowup_profile_analysis, m)?)?;
    Ok(())
}
