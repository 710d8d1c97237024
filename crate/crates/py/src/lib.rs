//! Python bindings. Matrices cross the boundary as lists of rows of
//! `complex`; reports come back as plain dicts.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qmetric::fock::{parity_matrix, FockBasis};
use qmetric::generator::build_q_generator;
use qmetric::lee::{self, LeeParams};
use qmetric::spectral::{self as sp, PseudoHermitianSystem, SpectralData};
use qmetric::verify::{self, ReportOptions};
use qmetric::{ComplexMatrix, MetricError, C64};

type Rows = Vec<Vec<C64>>;

fn py_err(e: MetricError) -> PyErr {
    if e.is_io() {
        PyOSError::new_err(e.to_string())
    } else if e.is_regime() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn matrix(rows: Rows) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(&rows).map_err(py_err)
}

fn json_to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = qmetric::io::to_json_string(value).map_err(py_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Pseudo-Hermitian pair `(H, S)` with its biorthogonal decomposition and
/// spectral metric.
#[pyclass(name = "System", module = "qmetric_py")]
struct PySystem {
    sys: PseudoHermitianSystem,
    sd: SpectralData,
    q: ComplexMatrix,
    lee: Option<(LeeParams, FockBasis)>,
}

impl PySystem {
    fn from_system(sys: PseudoHermitianSystem, lee: Option<(LeeParams, FockBasis)>) -> PyResult<Self> {
        let (sd, q) = sp::spectral_metric(&sys).map_err(py_err)?;
        Ok(Self { sys, sd, q, lee })
    }

    fn lee_model(&self) -> PyResult<&(LeeParams, FockBasis)> {
        self.lee.as_ref().ok_or_else(|| PyValueError::new_err("needs a Lee model system"))
    }
}

#[pymethods]
impl PySystem {
    #[new]
    #[pyo3(signature = (h, s, tol = 1e-10))]
    fn new(h: Rows, s: Rows, tol: f64) -> PyResult<Self> {
        let sys = PseudoHermitianSystem::new(matrix(h)?, matrix(s)?, tol).map_err(py_err)?;
        Self::from_system(sys, None)
    }

    /// Lee model truncated at `n_max` bosons, with `S` the parity.
    #[staticmethod]
    #[pyo3(signature = (m_theta, m_v, m_n, g, n_max, tol = 1e-10))]
    fn lee(m_theta: f64, m_v: f64, m_n: f64, g: f64, n_max: usize, tol: f64) -> PyResult<Self> {
        let params = LeeParams::new(m_theta, m_v, m_n, g, n_max).and_then(|p| p.with_tol(tol)).map_err(py_err)?;
        let (basis, sys) = lee::lee_system(&params).map_err(py_err)?;
        Self::from_system(sys, Some((params, basis)))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.sys.dim()
    }

    #[getter]
    fn h(&self) -> Rows {
        self.sys.h().rows()
    }

    #[getter]
    fn s(&self) -> Rows {
        self.sys.s().rows()
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<C64> {
        self.sd.eigenvalues().to_vec()
    }

    #[getter]
    fn pairing(&self) -> Vec<usize> {
        self.sd.pairings().to_vec()
    }

    #[getter]
    fn in_spect(&self) -> Vec<bool> {
        (0..self.sd.len()).map(|k| self.sd.in_spect(k)).collect()
    }

    #[getter]
    fn real_spectrum(&self) -> bool {
        self.sd.is_real_spectrum()
    }

    fn right(&self, k: usize) -> PyResult<Vec<C64>> {
        self.check_index(k)?;
        Ok(self.sd.right(k))
    }

    fn dual(&self, k: usize) -> PyResult<Vec<C64>> {
        self.check_index(k)?;
        Ok(self.sd.dual(k))
    }

    fn similarity_residual(&self) -> f64 {
        self.sys.similarity_residual()
    }

    /// Metric from the spectral sum.
    fn q_spectral(&self) -> Rows {
        self.q.rows()
    }

    /// Metric assembled from the Lee generator family.
    fn q_generator(&self) -> PyResult<Rows> {
        let (p, b) = self.lee_model()?;
        let fam = lee::generator_family(p, b).map_err(py_err)?;
        Ok(build_q_generator(&fam, &self.sd).map_err(py_err)?.rows())
    }

    /// Closed-form Lee metric.
    fn q_closed_form(&self) -> PyResult<Rows> {
        let (p, b) = self.lee_model()?;
        Ok(lee::closed_form_q(p, b).map_err(py_err)?.rows())
    }

    /// `(q_norm, dirac_norm)` pairs along `t`.
    fn norm_series(&self, q: Rows, state: Vec<C64>, t: Vec<f64>) -> PyResult<Vec<(f64, f64)>> {
        let series = verify::norm_series(&self.sd, &matrix(q)?, &state, &t).map_err(py_err)?;
        Ok(series.iter().map(|s| (s.q_norm, s.dirac_norm)).collect())
    }

    /// Diagnostics for an arbitrary candidate metric.
    #[pyo3(signature = (q, method = "custom"))]
    fn report<'py>(&self, py: Python<'py>, q: Rows, method: &str) -> PyResult<Bound<'py, PyAny>> {
        let q = matrix(q)?;
        let domain = match (method, &self.lee) {
            ("closed-form", Some((_, b))) => Some(lee::closed_form_domain(b)),
            _ => None,
        };
        let opts = ReportOptions {
            method,
            convention: "as supplied",
            tol: self.sys.tol(),
            domain: domain.as_deref(),
            state: None,
            t_grid: &[],
            reference: None,
            notes: Vec::new(),
        };
        let report = verify::metric_report(&self.sys, &self.sd, &q, &opts).map_err(py_err)?;
        json_to_py(py, &report)
    }

    /// Serialized spectral data.
    fn spectral_data<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &self.sd)
    }

    fn __repr__(&self) -> String {
        format!("System(dim={}, real_spectrum={})", self.sys.dim(), self.sd.is_real_spectrum())
    }
}

impl PySystem {
    fn check_index(&self, k: usize) -> PyResult<()> {
        if k >= self.sd.len() {
            return Err(PyValueError::new_err(format!("index {k} out of range for {} eigenvalues", self.sd.len())));
        }
        Ok(())
    }
}

/// Closed-form `(E₋, E₊)` of Lee sector `n`.
#[pyfunction]
fn lee_energies(m_theta: f64, m_v: f64, m_n: f64, g: f64, n: usize) -> PyResult<(C64, C64)> {
    let params = LeeParams::new(m_theta, m_v, m_n, g, n + 1).map_err(py_err)?;
    Ok(lee::closed_form_energies(&params, n))
}

/// Occupations `(n_θ, n_V, n_N)` of the truncated basis in index order.
#[pyfunction]
fn fock_basis(n_max: usize) -> PyResult<Vec<(usize, u8, u8)>> {
    let b = FockBasis::new(n_max).map_err(py_err)?;
    Ok(b.states().iter().map(|o| (o.n, o.v, o.nn)).collect())
}

#[pyfunction]
fn parity(n_max: usize) -> PyResult<Rows> {
    let b = FockBasis::new(n_max).map_err(py_err)?;
    Ok(parity_matrix(&b).rows())
}

#[pyfunction]
fn hermiticity_residual(q: Rows) -> PyResult<f64> {
    Ok(verify::hermiticity_residual(&matrix(q)?))
}

#[pyfunction]
fn selfadjointness_residual(q: Rows, h: Rows) -> PyResult<f64> {
    Ok(verify::selfadjointness_residual(&matrix(q)?, &matrix(h)?))
}

#[pymodule]
fn qmetric_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystem>()?;
    m.add_function(wrap_pyfunction!(lee_energies, m)?)?;
    m.add_function(wrap_pyfunction!(fock_basis, m)?)?;
    m.add_function(wrap_pyfunction!(parity, m)?)?;
    m.add_function(wrap_pyfunction!(hermiticity_residual, m)?)?;
    m.add_function(wrap_pyfunction!(selfadjointness_residual, m)?)?;
    Ok(())
}
