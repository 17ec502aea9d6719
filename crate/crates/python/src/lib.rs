//! Python bindings. Complex arguments are Python `complex`; errors surface as
//! `ValueError`.

use elliptheta_core::convergence::{fnm, radius};
use elliptheta_core::series::{self, SeriesSpec};
use elliptheta_core::theta as th;
use elliptheta_core::{phi, LineSpec, Nome, QSpec, C64};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: elliptheta_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn line(n: i64, m: i64, tau: C64) -> PyResult<LineSpec> {
    LineSpec::new(n, m, Nome::from_tau(tau).map_err(err)?).map_err(err)
}

/// `θ(z; p) = (z; p)_∞ (p/z; p)_∞`.
#[pyfunction]
fn theta(z: C64, p: C64) -> PyResult<C64> {
    th::theta(z, p).map_err(err)
}

/// `θ(z; p)` from its bilateral series.
#[pyfunction]
fn theta_sum(z: C64, p: C64) -> PyResult<C64> {
    th::theta_sum(z, p).map_err(err)
}

/// `(a; p)_∞`.
#[pyfunction]
fn qpochhammer_inf(a: C64, p: C64) -> PyResult<C64> {
    th::qpochhammer_inf(a, p).map_err(err)
}

/// `θ(t; p; q)_n = ∏_{m<n} θ(t qᵐ; p)`.
#[pyfunction]
fn elliptic_pochhammer(t: C64, p: C64, q: C64, n: usize) -> PyResult<C64> {
    th::elliptic_pochhammer(t, p, q, n).map_err(err)
}

/// Lattice sum `Φ_n(s; p)`.
#[pyfunction]
fn phi_n(s: Vec<C64>, p: C64, n: i64) -> PyResult<C64> {
    phi::phi_n(&s, p, n).map_err(err)
}

/// `F_{N,M}(t)`, the mean of `log|θ|` along the line `N + Mτ`.
#[pyfunction]
fn f_nm(t: C64, n: i64, m: i64, tau: C64) -> PyResult<f64> {
    fnm::f_nm(t, &line(n, m, tau)?).map_err(err)
}

/// Partial sums of `ₛEᵣ(z)`; returns a dict with `value`, `terms_used`,
/// `converged` and `terminated`.
#[pyfunction]
#[pyo3(signature = (t, w, q, p, z, max_terms = 10_000, tail_tol = 1e-16))]
fn eval_series<'py>(
    py: Python<'py>,
    t: Vec<C64>,
    w: Vec<C64>,
    q: C64,
    p: C64,
    z: C64,
    max_terms: usize,
    tail_tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = SeriesSpec::new(t, w, q, Nome::from_p(p).map_err(err)?).map_err(err)?;
    let res = series::eval_ser(&spec, z, max_terms, tail_tol).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("value", res.value)?;
    d.set_item("terms_used", res.terms_used)?;
    d.set_item("converged", res.converged)?;
    d.set_item("terminated", res.terminated)?;
    Ok(d)
}

/// `log r_c⁻¹` of a balanced series with `t[0] = q`, where `q` has rotation
/// number `chi` on the line `N + Mτ`.
#[pyfunction]
fn log_radius_inverse(t: Vec<C64>, w: Vec<C64>, chi: f64, n: i64, m: i64, tau: C64) -> PyResult<f64> {
    let l = line(n, m, tau)?;
    let q = QSpec::new(chi, l).map_err(err)?.q();
    let spec = SeriesSpec::new(t, w, q, l.nome).map_err(err)?;
    Ok(radius::radius_balanced(&spec, &l).map_err(err)?.log_rc_inv)
}

/// `q = exp(2πi χ (N + Mτ))`.
#[pyfunction]
fn q_on_line(chi: f64, n: i64, m: i64, tau: C64) -> PyResult<C64> {
    Ok(QSpec::new(chi, line(n, m, tau)?).map_err(err)?.q())
}

#[pymodule]
fn elliptheta(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(theta, m)?)?;
    m.add_function(wrap_pyfunction!(theta_sum, m)?)?;
    m.add_function(wrap_pyfunction!(qpochhammer_inf, m)?)?;
    m.add_function(wrap_pyfunction!(elliptic_pochhammer, m)?)?;
    m.add_function(wrap_pyfunction!(phi_n, m)?)?;
    m.add_function(wrap_pyfunction!(f_nm, m)?)?;
    m.add_function(wrap_pyfunction!(eval_series, m)?)?;
    m.add_function(wrap_pyfunction!(log_radius_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(q_on_line, m)?)?;
    Ok(())
}
