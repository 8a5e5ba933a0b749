//! Python bindings for `aphg`.

use aphg::data::{describe as describe_dataset, load_embedded, Dataset};
use aphg::estimation::{fit as fit_model, FitConfig, ModelKind};
use aphg::gof::{information_criteria as criteria, ks_statistic, GofReport};
use aphg::properties::{moment_report, renyi_entropy, shannon_entropy};
use aphg::{EdfVariant, Error};
use pyo3::exceptions::{PyArithmeticError, PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::UnknownDataset(_) | Error::UnknownModel(_) | Error::UnknownParameterSet(_) => {
            PyKeyError::new_err(e.to_string())
        }
        Error::Domain(_) | Error::Data(_) | Error::Row { .. } | Error::InvalidRank { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

/// The five-parameter alpha power Harris Burr XII distribution.
#[pyclass(name = "Aphbxii", module = "aphg_py", frozen)]
struct PyAphbxii {
    inner: aphg::Aphbxii,
}

#[pymethods]
impl PyAphbxii {
    #[new]
    fn new(alpha: f64, c: f64, upsilon: f64, phi: f64, eta: f64) -> PyResult<Self> {
        let inner = aphg::Aphbxii::from_params(alpha, c, upsilon, phi, eta).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// `(alpha, c, upsilon, phi, eta)`.
    #[getter]
    fn params(&self) -> (f64, f64, f64, f64, f64) {
        let [a, c, u, p, e] = self.inner.to_array();
        (a, c, u, p, e)
    }

    fn cdf(&self, x: f64) -> PyResult<f64> {
        self.inner.cdf(x).map_err(to_py)
    }

    fn sf(&self, x: f64) -> PyResult<f64> {
        self.inner.sf(x).map_err(to_py)
    }

    fn pdf(&self, x: f64) -> PyResult<f64> {
        self.inner.pdf(x).map_err(to_py)
    }

    fn hrf(&self, x: f64) -> PyResult<f64> {
        self.inner.hrf(x).map_err(to_py)
    }

    fn quantile(&self, u: f64) -> PyResult<f64> {
        self.inner.quantile(u).map_err(to_py)
    }

    fn sample(&self, n: usize, seed: u64) -> PyResult<Vec<f64>> {
        self.inner.sample(n, seed).map_err(to_py)
    }

    fn quantile_summary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = self.inner.quantile_summary().map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("q1", s.q1)?;
        d.set_item("median", s.q2)?;
        d.set_item("q3", s.q3)?;
        d.set_item("galton_skewness", s.galton_s)?;
        d.set_item("moors_kurtosis", s.moors_k)?;
        Ok(d)
    }

    /// Raw moments below `phi * eta` (up to six) and the derived summaries.
    fn moments<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = py.detach(|| moment_report(&self.inner)).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("raw", r.raw_moments.clone())?;
        d.set_item("mean", r.mean)?;
        d.set_item("variance", r.variance)?;
        d.set_item("skewness", r.skewness)?;
        d.set_item("kurtosis", r.kurtosis)?;
        Ok(d)
    }

    fn renyi_entropy(&self, rho: f64) -> PyResult<f64> {
        renyi_entropy(rho, &self.inner).map_err(to_py)
    }

    fn shannon_entropy(&self) -> PyResult<f64> {
        shannon_entropy(&self.inner).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        let [a, c, u, p, e] = self.inner.to_array();
        format!("Aphbxii(alpha={a}, c={c}, upsilon={u}, phi={p}, eta={e})")
    }
}

/// Values of an embedded dataset: `kevlar`, `cancer` or `device`.
#[pyfunction]
fn load_dataset(name: &str) -> PyResult<Vec<f64>> {
    Ok(load_embedded(name).map_err(to_py)?.values)
}

#[pyfunction]
fn describe<'py>(py: Python<'py>, values: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let s = describe_dataset(&Dataset::new("values", values, "python").map_err(to_py)?);
    let d = PyDict::new(py);
    d.set_item("n", s.n)?;
    d.set_item("min", s.min)?;
    d.set_item("q1", s.q1)?;
    d.set_item("median", s.median)?;
    d.set_item("mean", s.mean)?;
    d.set_item("q3", s.q3)?;
    d.set_item("max", s.max)?;
    d.set_item("variance", s.variance)?;
    d.set_item("skewness", s.skewness)?;
    d.set_item("kurtosis", s.kurtosis)?;
    Ok(d)
}

/// Maximum likelihood fit with goodness-of-fit statistics.
#[pyfunction]
#[pyo3(signature = (values, model = "aphbxii", seed = None, restarts = None))]
fn fit<'py>(
    py: Python<'py>,
    values: Vec<f64>,
    model: &str,
    seed: Option<u64>,
    restarts: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let model: ModelKind = model.parse().map_err(to_py)?;
    let defaults = FitConfig::default();
    let config = FitConfig {
        seed: seed.unwrap_or(defaults.seed),
        restarts: restarts.unwrap_or(defaults.restarts),
        ..defaults
    };
    let (result, gof) = py
        .detach(|| {
            let f = fit_model(&values, model, &config)?;
            let g = GofReport::from_fit(&values, &f, EdfVariant::default())?;
            Ok::<_, Error>((f, g))
        })
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("model", result.model.to_string())?;
    d.set_item("estimates", result.estimates.clone())?;
    d.set_item("standard_errors", result.standard_errors.clone())?;
    d.set_item("loglik", result.loglik)?;
    d.set_item("converged", result.converged)?;
    d.set_item("at_bound", result.at_bound)?;
    for (name, value) in aphg::gof::METRIC_NAMES.iter().zip(gof.metrics()) {
        d.set_item(*name, value)?;
    }
    Ok(d)
}

#[pyfunction]
fn information_criteria<'py>(py: Python<'py>, neg2loglik: f64, k: usize, n: usize) -> PyResult<Bound<'py, PyDict>> {
    let ic = criteria(neg2loglik, k, n).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("aic", ic.aic)?;
    d.set_item("bic", ic.bic)?;
    d.set_item("hqic", ic.hqic)?;
    d.set_item("caic", ic.caic)?;
    Ok(d)
}

/// Kolmogorov–Smirnov distance and asymptotic p-value against `dist`.
#[pyfunction]
fn ks(values: Vec<f64>, dist: &PyAphbxii) -> PyResult<(f64, f64)> {
    let r = ks_statistic(&values, |x| dist.inner.cdf(x)).map_err(to_py)?;
    Ok((r.d, r.p_value))
}

#[pymodule]
fn aphg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAphbxii>()?;
    m.add_function(wrap_pyfunction!(load_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(describe, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(information_criteria, m)?)?;
    m.add_function(wrap_pyfunction!(ks, m)?)?;
    Ok(())
}
