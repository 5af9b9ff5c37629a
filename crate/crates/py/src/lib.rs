//! Python bindings: measures, ⊠ moments, transforms, array diagnostics and
//! the random-matrix oracle.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use freemult::arrays::{ArraySpec, Tolerances};
use freemult::measure::GridSpec;
use freemult::{Atom, Space};

fn to_py(e: freemult::Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyArithmeticError::new_err(e.to_string())
    }
}

fn parse_space(s: &str) -> PyResult<Space> {
    match s {
        "positive" => Ok(Space::PositiveHalfLine),
        "circle" => Ok(Space::Circle),
        other => Err(PyValueError::new_err(format!("unknown space {other:?}"))),
    }
}

/// Probability measure with finitely many atoms on the half-line
/// ("positive", positions t > 0) or the unit circle ("circle", angles).
#[pyclass(name = "AtomicMeasure", module = "freemult_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMeasure {
    inner: freemult::AtomicMeasure,
}

#[pymethods]
impl PyMeasure {
    #[new]
    fn new(space: &str, positions: Vec<f64>, weights: Vec<f64>) -> PyResult<Self> {
        if positions.len() != weights.len() {
            return Err(PyValueError::new_err("positions and weights differ in length"));
        }
        let atoms = positions.into_iter().zip(weights).map(|(p, w)| Atom::new(p, w)).collect();
        let inner = freemult::AtomicMeasure::new(parse_space(space)?, atoms).map_err(to_py)?;
        Ok(PyMeasure { inner })
    }

    #[staticmethod]
    fn dirac(space: &str, position: f64) -> PyResult<Self> {
        let inner = freemult::AtomicMeasure::dirac(parse_space(space)?, position).map_err(to_py)?;
        Ok(PyMeasure { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyMeasure { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn space(&self) -> &'static str {
        self.inner.space().name()
    }

    fn atoms(&self) -> Vec<(f64, f64)> {
        self.inner.atoms().iter().map(|a| (a.pos, a.weight)).collect()
    }

    fn moments(&self, n: usize) -> Vec<Complex64> {
        self.inner.moments(n)
    }

    fn __len__(&self) -> usize {
        self.inner.atoms().len()
    }

    fn __repr__(&self) -> String {
        format!("AtomicMeasure({:?}, {:?})", self.inner.space().name(), self.atoms())
    }
}

/// Moments of μ ⊠ ν through the S-transform series.
#[pyfunction]
fn boxtimes_moments(mu: &PyMeasure, nu: &PyMeasure, order: usize) -> PyResult<Vec<Complex64>> {
    Ok(freemult::freeconv::boxtimes_moments(&mu.inner, &nu.inner, order)
        .map_err(to_py)?
        .moments)
}

/// Moments of μ ⊠ ν by non-crossing partition enumeration (order ≤ 8).
#[pyfunction]
fn nc_moment_oracle(mu: &PyMeasure, nu: &PyMeasure, order: usize) -> PyResult<Vec<Complex64>> {
    Ok(freemult::freeconv::nc_moment_oracle(&mu.inner, &nu.inner, order)
        .map_err(to_py)?
        .moments)
}

/// Classical multiplicative convolution μ ⊛ ν.
#[pyfunction]
fn classical_multconv(mu: &PyMeasure, nu: &PyMeasure) -> PyResult<PyMeasure> {
    let inner = freemult::measure::classical_multconv(&mu.inner, &nu.inner).map_err(to_py)?;
    Ok(PyMeasure { inner })
}

/// ψ_ν(z) = ∫ tz/(1−tz) dν(t).
#[pyfunction]
fn psi(nu: &PyMeasure, z: Complex64) -> PyResult<Complex64> {
    freemult::transforms::psi_eval(&nu.inner, z).map_err(to_py)
}

/// S_ν(z) for a half-line measure and real z in (−1, 0).
#[pyfunction]
fn s_transform(nu: &PyMeasure, z: f64) -> PyResult<f64> {
    freemult::transforms::s_eval_pos(&nu.inner, z).map_err(to_py)
}

/// Coefficients of Σ_ν for a circle measure with nonzero first moment.
#[pyfunction]
fn sigma_series(nu: &PyMeasure, order: usize) -> PyResult<Vec<Complex64>> {
    Ok(freemult::transforms::sigma_series(&nu.inner, order)
        .map_err(to_py)?
        .coeffs()
        .to_vec())
}

/// Φ_ν(s) = ∫ t^{is} dν(t).
#[pyfunction]
fn mellin_fourier(nu: &PyMeasure, s: f64) -> PyResult<Complex64> {
    freemult::transforms::mellin_fourier(&nu.inner, s).map_err(to_py)
}

fn load_spec(spec_json: &str, rows: Option<Vec<u64>>) -> PyResult<(ArraySpec, Vec<u64>)> {
    let spec = ArraySpec::from_json(spec_json).map_err(to_py)?;
    let rows = rows.unwrap_or_else(|| spec.schedule());
    Ok((spec, rows))
}

/// Array diagnostics and verdict as a JSON string.
#[pyfunction]
#[pyo3(signature = (spec_json, rows=None))]
fn diagnose(spec_json: &str, rows: Option<Vec<u64>>) -> PyResult<String> {
    let (spec, rows) = load_spec(spec_json, rows)?;
    let d = freemult::arrays::diagnose(&spec, &rows, &Tolerances::default()).map_err(to_py)?;
    serde_json::to_string(&d).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Verification report as a JSON string; `check` is "pos", "circ", "haar" or "classical".
#[pyfunction]
#[pyo3(signature = (spec_json, rows=None, check=None, tol=None))]
fn verify(spec_json: &str, rows: Option<Vec<u64>>, check: Option<&str>, tol: Option<f64>) -> PyResult<String> {
    use freemult::verify::*;
    let (spec, rows) = load_spec(spec_json, rows)?;
    let check = check.unwrap_or(match spec.space {
        Space::PositiveHalfLine => "pos",
        Space::Circle => "circ",
    });
    let report = match check {
        "pos" => verify_pos(&spec, &rows, &GridSpec::default_half_line(), tol.unwrap_or(1e-2)),
        "circ" => verify_circ(&spec, &rows, DEFAULT_CIRCLE_ORDER, tol.unwrap_or(1e-2)),
        "haar" => {
            let mut t = Tolerances::default();
            if let Some(x) = tol {
                t.cauchy = x;
            }
            verify_haar(&spec, &rows, &t)
        }
        "classical" => verify_classical(&spec, &rows, &default_s_panel(), tol.unwrap_or(5e-2)),
        other => return Err(PyValueError::new_err(format!("unknown check {other:?}"))),
    }
    .map_err(to_py)?;
    serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Random-matrix estimate of the moments of μ ⊠ ν: (means, standard errors).
#[pyfunction]
#[pyo3(signature = (mu, nu, dim, samples, seed, order=4))]
fn rmt_oracle(
    py: Python<'_>,
    mu: &PyMeasure,
    nu: &PyMeasure,
    dim: usize,
    samples: usize,
    seed: u64,
    order: usize,
) -> PyResult<(Vec<Complex64>, Vec<f64>)> {
    let cfg = freemult::mc::McConfig::new(dim, samples, seed).with_order(order);
    let (mu, nu) = (mu.inner.clone(), nu.inner.clone());
    let est = py
        .detach(move || match mu.space() {
            Space::PositiveHalfLine => freemult::mc::rmt_oracle_pos(&mu, &nu, &cfg),
            Space::Circle => freemult::mc::rmt_oracle_circ(&mu, &nu, &cfg),
        })
        .map_err(to_py)?;
    Ok((est.mean, est.std_err))
}

#[pymodule]
fn freemult_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMeasure>()?;
    m.add_function(wrap_pyfunction!(boxtimes_moments, m)?)?;
    m.add_function(wrap_pyfunction!(nc_moment_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(classical_multconv, m)?)?;
    m.add_function(wrap_pyfunction!(psi, m)?)?;
    m.add_function(wrap_pyfunction!(s_transform, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_series, m)?)?;
    m.add_function(wrap_pyfunction!(mellin_fourier, m)?)?;
    m.add_function(wrap_pyfunction!(diagnose, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(rmt_oracle, m)?)?;
    Ok(())
}
