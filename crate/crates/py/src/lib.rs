//! Python bindings for the viscous-shock laboratory: end-state algebra, wave
//! profiles, entropy functionals, and short evolutions, driven in-process.

#![allow(clippy::needless_range_loop)]

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use wavelab::entropy;
use wavelab::grid::{FieldState, Frame, Grid};
use wavelab::params;
use wavelab::solver::{self, EvolveOptions};
use wavelab::wave;
use wavelab::{EndStates, TheoremConstants, WaveProfile};

fn err<T>(r: wavelab::Result<T>) -> PyResult<T> {
    r.map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Shock data: end states, derived speed and flux, shock strength.
#[pyclass(name = "EndStates")]
#[derive(Clone)]
struct PyEndStates {
    inner: EndStates,
}

#[pymethods]
impl PyEndStates {
    #[new]
    #[pyo3(signature = (n_minus, n_plus, q_minus=0.0, nu=1.0))]
    fn new(n_minus: f64, n_plus: f64, q_minus: f64, nu: f64) -> PyResult<Self> {
        Ok(PyEndStates {
            inner: err(EndStates::new(n_minus, n_plus, q_minus, nu))?,
        })
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.sigma
    }
    #[getter]
    fn q_plus(&self) -> f64 {
        self.inner.q_plus
    }
    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }
    #[getter]
    fn n_minus(&self) -> f64 {
        self.inner.n_minus
    }
    #[getter]
    fn n_plus(&self) -> f64 {
        self.inner.n_plus
    }
    #[getter]
    fn q_minus(&self) -> f64 {
        self.inner.q_minus
    }

    /// Relative residuals of the two jump relations.
    fn rh_residuals(&self) -> (f64, f64) {
        self.inner.rh_residuals()
    }

    fn is_canonical(&self) -> bool {
        self.inner.is_canonical()
    }

    /// The reflected configuration (x -> -x, sigma -> -sigma).
    fn reflect(&self) -> PyResult<PyEndStates> {
        Ok(PyEndStates {
            inner: err(params::reflect_problem(&self.inner))?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "EndStates(n_minus={}, n_plus={}, q_minus={}, q_plus={}, sigma={}, nu={})",
            self.inner.n_minus,
            self.inner.n_plus,
            self.inner.q_minus,
            self.inner.q_plus,
            self.inner.sigma,
            self.inner.nu
        )
    }
}

/// Sampled traveling wave with its monotone weight.
#[pyclass(name = "WaveProfile")]
struct PyWaveProfile {
    inner: WaveProfile,
}

#[pymethods]
impl PyWaveProfile {
    #[getter]
    fn xi(&self) -> Vec<f64> {
        self.inner.grid.xis()
    }
    #[getter]
    fn n_tilde(&self) -> Vec<f64> {
        self.inner.n_tilde.clone()
    }
    #[getter]
    fn q_tilde(&self) -> Vec<f64> {
        self.inner.q_tilde.clone()
    }
    #[getter]
    fn weight(&self) -> Vec<f64> {
        self.inner.a.clone()
    }
    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.lambda
    }

    fn weight_at(&self, xi: f64) -> f64 {
        self.inner.weight_at(xi)
    }

    fn __len__(&self) -> usize {
        self.inner.grid.n_points
    }

    fn __repr__(&self) -> String {
        format!(
            "WaveProfile(points={}, domain=[{}, {}], lambda={})",
            self.inner.grid.n_points,
            self.inner.grid.xi_min,
            self.inner.grid.xi_max,
            self.inner.lambda
        )
    }
}

/// Wave speed from the jump conditions.
#[pyfunction]
fn compute_sigma(n_minus: f64, n_plus: f64, q_minus: f64) -> PyResult<f64> {
    err(params::compute_sigma(n_minus, n_plus, q_minus))
}

/// Pi(n) = n log n - n.
#[pyfunction]
fn pi_potential(n: f64) -> PyResult<f64> {
    err(entropy::pi_potential(n))
}

/// Bregman divergence of Pi.
#[pyfunction]
fn pi_relative(n1: f64, n2: f64) -> PyResult<f64> {
    err(entropy::pi_relative(n1, n2))
}

/// State relative entropy |q1-q2|^2/2 + Pi(n1|n2).
#[pyfunction]
fn eta_relative(n1: f64, q1: f64, n2: f64, q2: f64) -> PyResult<f64> {
    err(entropy::eta_relative((n1, q1), (n2, q2)))
}

/// Build the traveling-wave profile on [xi_min, xi_max] with n_points nodes.
/// The domain auto-extends (at fixed spacing) until both tails sit within
/// 1e-8 of the end states.
#[pyfunction]
#[pyo3(signature = (end, xi_min=-60.0, xi_max=60.0, n_points=2049, lambda_=None))]
fn build_profile(
    end: &PyEndStates,
    xi_min: f64,
    xi_max: f64,
    n_points: usize,
    lambda_: Option<f64>,
) -> PyResult<PyWaveProfile> {
    let mut tc = TheoremConstants::defaults_for(&end.inner);
    if let Some(l) = lambda_ {
        tc.lambda = l;
    }
    let grid = err(Grid::new(xi_min, xi_max, n_points, Frame::Moving))?;
    Ok(PyWaveProfile {
        inner: err(wave::build_profile(&end.inner, &tc, &grid))?,
    })
}

/// Evolve a Gaussian-perturbed wave and return the entropy-report rows as a
/// list of dicts (keys: t, re_plain, re_weighted_shifted, shift_X,
/// dissipation, min_n, h1_norm).
#[pyfunction]
#[pyo3(signature = (profile, t_end, output_every, amplitude=0.0, width=10.0, center=0.0))]
fn evolve_gaussian(
    py: Python<'_>,
    profile: &PyWaveProfile,
    t_end: f64,
    output_every: f64,
    amplitude: f64,
    width: f64,
    center: f64,
) -> PyResult<Vec<Py<pyo3::types::PyDict>>> {
    let p = &profile.inner;
    let g = p.grid.clone();
    let mut n = p.n_tilde.clone();
    for i in 0..g.n_points {
        let s = (g.xi(i) - center) / width;
        n[i] += amplitude * (-s * s).exp();
    }
    let initial = err(FieldState::new(0.0, g, n, p.q_tilde.clone()))?;
    let ev = err(solver::evolve(
        &initial,
        p,
        &EvolveOptions::new(t_end, output_every),
    ))?;
    let mut rows = Vec::new();
    for r in &ev.rows {
        let d = pyo3::types::PyDict::new(py);
        d.set_item("t", r.report.t)?;
        d.set_item("re_plain", r.report.re_plain)?;
        d.set_item("re_weighted_shifted", r.report.re_weighted_shifted)?;
        d.set_item("shift_X", r.report.shift_x)?;
        d.set_item("dissipation", r.report.dissipation)?;
        d.set_item("min_n", r.min_n)?;
        d.set_item("h1_norm", r.h1_norm)?;
        rows.push(d.into());
    }
    Ok(rows)
}

/// q = -d/dx log(c) on a uniform grid.
#[pyfunction]
fn cole_hopf_forward(c: Vec<f64>, dx: f64) -> PyResult<Vec<f64>> {
    err(wavelab::kellersegel::cole_hopf_forward(&c, dx))
}

/// c = c_anchor * exp(-antiderivative of q) from the anchor node.
#[pyfunction]
fn cole_hopf_inverse(q: Vec<f64>, dx: f64, c_anchor: f64, anchor_index: usize) -> PyResult<Vec<f64>> {
    err(wavelab::kellersegel::cole_hopf_inverse(
        &q,
        dx,
        c_anchor,
        anchor_index,
    ))
}

#[pymodule]
fn wavelab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyEndStates>()?;
    m.add_class::<PyWaveProfile>()?;
    m.add_function(wrap_pyfunction!(compute_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(pi_potential, m)?)?;
    m.add_function(wrap_pyfunction!(pi_relative, m)?)?;
    m.add_function(wrap_pyfunction!(eta_relative, m)?)?;
    m.add_function(wrap_pyfunction!(build_profile, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(cole_hopf_forward, m)?)?;
    m.add_function(wrap_pyfunction!(cole_hopf_inverse, m)?)?;
    Ok(())
}
