//! Python bindings for the mtb library.
//!
//! Thin wrappers over `mtb-core`: scalar special functions, Hermitian
//! matrices, Orlicz norms, the named bound evaluators, prior-work baselines,
//! and the Monte Carlo experiment drivers. Structured results cross the
//! boundary as single-line JSON strings with the same schemas the CLI prints,
//! so Python callers can `json.loads` them and diff against CLI output
//! byte-for-byte. Errors surface as `ValueError` carrying the core error text.
//!
//! Build: `cargo build --release -p mtb-py`, then rename/copy
//! `libmtb_py.so` to `mtb_py.so` somewhere on `sys.path` (see
//! `python/smoke_test.py`), or build with `--features extension-module` when
//! packaging a wheel.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use mtb_core::bounds::{baseline, eval_named, BaselineKind, BaselineParams, TailParams};
use mtb_core::linalg::{self, HermitianMatrix};
use mtb_core::mc::{
    empirical_coverage, mcdiarmid_experiment, run_experiment, MartingaleSpec, McdiarmidConfig,
    SimulationConfig,
};
use mtb_core::orlicz::{self, LawSpec, SampleSet};
use mtb_core::scalar::{self, Tolerance, ZInput};
use mtb_core::Error;
use std::str::FromStr;

fn to_py(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyValueError::new_err(format!("serialize: {e}")))
}

// --------------------------------------------------------------------------
// Scalar special functions
// --------------------------------------------------------------------------

/// phi(t) = e^t - 1 - t.
#[pyfunction]
fn phi(t: f64) -> f64 {
    scalar::phi(t)
}

/// upsilon(t) = t phi(t) / (phi(t) - t^2/2), continuously extended at 0.
#[pyfunction]
fn upsilon(t: f64) -> f64 {
    scalar::upsilon(t)
}

/// h(x) = (1+x) ln(1+x) - x for x >= -1.
#[pyfunction]
fn h(x: f64) -> PyResult<f64> {
    scalar::h(x).map_err(to_py)
}

/// Inverse of h on [0, inf).
#[pyfunction]
fn h_inv(u: f64) -> PyResult<f64> {
    scalar::h_inv(u, &Tolerance::default()).map_err(to_py)
}

/// max(ln x, 1) for x > 0.
#[pyfunction]
fn underline_log(x: f64) -> PyResult<f64> {
    scalar::underline_log(x).map_err(to_py)
}

/// Inverse of the capped conjugate g_{lambda0} at x >= 0.
#[pyfunction]
fn g_inv(lambda0: f64, x: f64) -> PyResult<f64> {
    scalar::g_inv(lambda0, x, &Tolerance::default()).map_err(to_py)
}

/// Truncation threshold z(bigU, sigma, alpha).
#[pyfunction]
fn z_threshold(big_u: f64, sigma: f64, alpha: f64) -> PyResult<f64> {
    scalar::z_threshold(&ZInput { big_u, sigma, alpha }).map_err(to_py)
}

// --------------------------------------------------------------------------
// Orlicz norms
// --------------------------------------------------------------------------

/// psi_alpha norm of the empirical distribution on `values` (optionally
/// weighted); bisection to the default tolerance.
#[pyfunction]
#[pyo3(signature = (values, alpha, weights=None))]
fn empirical_orlicz_norm(values: Vec<f64>, alpha: f64, weights: Option<Vec<f64>>) -> PyResult<f64> {
    let set = match weights {
        Some(w) => SampleSet::weighted(values, w),
        None => SampleSet::new(values),
    }
    .map_err(to_py)?;
    orlicz::empirical_orlicz_norm(&set, alpha, &Tolerance::default()).map_err(to_py)
}

/// psi_alpha norm of an analytic law given as JSON, e.g.
/// `{"law":"weibull","scale":1.0,"shape":1.0}`.
#[pyfunction]
fn law_orlicz_norm(law_json: &str, alpha: f64) -> PyResult<f64> {
    let law: LawSpec = serde_json::from_str(law_json)
        .map_err(|e| PyValueError::new_err(format!("law JSON: {e}")))?;
    orlicz::law_orlicz_norm(&law, alpha, &Tolerance::default()).map_err(to_py)
}

// --------------------------------------------------------------------------
// Hermitian matrices
// --------------------------------------------------------------------------

/// Dense Hermitian matrix; the JSON form matches the CLI file format
/// (`{"d": n, "re": [[...]], "im": [[...]]?}` with nested row arrays).
#[pyclass(name = "HermitianMatrix", from_py_object)]
#[derive(Clone)]
struct PyHermitianMatrix {
    inner: HermitianMatrix,
}

#[pymethods]
impl PyHermitianMatrix {
    /// Build from nested row lists; `im` defaults to the zero matrix.
    #[new]
    #[pyo3(signature = (re, im=None))]
    fn new(re: Vec<Vec<f64>>, im: Option<Vec<Vec<f64>>>) -> PyResult<Self> {
        let inner = HermitianMatrix::from_rows(&re, im.as_deref()).map_err(to_py)?;
        Ok(PyHermitianMatrix { inner })
    }

    #[staticmethod]
    fn diag(entries: Vec<f64>) -> PyResult<Self> {
        Ok(PyHermitianMatrix { inner: HermitianMatrix::diag(&entries).map_err(to_py)? })
    }

    /// c * v v^T for a real vector v.
    #[staticmethod]
    fn rank_one(v: Vec<f64>, c: f64) -> PyResult<Self> {
        Ok(PyHermitianMatrix { inner: HermitianMatrix::rank_one(&v, c).map_err(to_py)? })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(PyHermitianMatrix { inner: HermitianMatrix::from_json(s).map_err(to_py)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Eigenvalues in ascending order.
    fn eigenvalues(&self) -> PyResult<Vec<f64>> {
        Ok(linalg::eig(&self.inner).map_err(to_py)?.eigenvalues)
    }

    fn lambda_max(&self) -> PyResult<f64> {
        linalg::lambda_max(&self.inner).map_err(to_py)
    }

    fn lambda_min(&self) -> PyResult<f64> {
        linalg::lambda_min(&self.inner).map_err(to_py)
    }

    fn op_norm(&self) -> PyResult<f64> {
        linalg::op_norm(&self.inner).map_err(to_py)
    }

    /// trace / lambda_max, the intrinsic dimension of a PSD matrix.
    fn intrinsic_dim(&self) -> PyResult<f64> {
        linalg::intrinsic_dim(&self.inner).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("HermitianMatrix(dim={})", self.inner.dim())
    }
}

// --------------------------------------------------------------------------
// Bound evaluators
// --------------------------------------------------------------------------

/// Evaluate the named deviation bound; same tokens as `mtb bound --theorem`
/// (thm1-ben, thm1-ber, thm1-mixed, thm1-monotone, thm2, thm3-ben, thm3-ber,
/// cor-iid, cor-scalar, cor-cov, cor-cov-lower, mcd-ben, mcd-ber). Returns
/// the BoundResult as a JSON string. `thm2` ignores alpha/big_u and needs
/// exactly one of `d` / `cov`.
#[pyfunction]
#[pyo3(signature = (theorem, x, sigma, big_k, *, alpha=None, big_u=None, d=None, cov=None,
                    eps=None, n=None, grid=64, literal_log_block=false, cov_half_alpha=false))]
#[allow(clippy::too_many_arguments)]
fn bound(
    theorem: &str,
    x: f64,
    sigma: f64,
    big_k: f64,
    alpha: Option<f64>,
    big_u: Option<f64>,
    d: Option<usize>,
    cov: Option<PyHermitianMatrix>,
    eps: Option<f64>,
    n: Option<u64>,
    grid: u32,
    literal_log_block: bool,
    cov_half_alpha: bool,
) -> PyResult<String> {
    let (alpha, big_u) = if theorem == "thm2" {
        (alpha.unwrap_or(1.0), big_u.unwrap_or(big_k))
    } else {
        (
            alpha.ok_or_else(|| PyValueError::new_err(format!("'{theorem}' requires alpha")))?,
            big_u.ok_or_else(|| PyValueError::new_err(format!("'{theorem}' requires big_u")))?,
        )
    };
    let mut p = TailParams::new(alpha, sigma, big_u, big_k, x);
    p.dim = d;
    p.cov = cov.map(|m| m.inner);
    if let Some(eps) = eps {
        p.eps = eps;
    }
    p.n = n;
    p.literal_log_block = literal_log_block;
    p.cov_half_alpha = cov_half_alpha;
    let res = eval_named(theorem, &p, grid, &Tolerance::default()).map_err(to_py)?;
    to_json(&res)
}

/// Evaluate a prior-work baseline; same kind tokens as `mtb baseline`.
/// Returns `{"probability": ...}` for tail-form baselines and a BoundResult
/// object for deviation-form ones, as a JSON string.
#[pyfunction]
#[pyo3(signature = (kind, *, sigma=None, big_k=None, big_u=None, t=None, x=None, dim=None,
                    n=None, alpha=None, free_constant=None, free_prefactor=None,
                    free_validity=None, mean_cov=None))]
#[allow(clippy::too_many_arguments)]
fn baseline_bound(
    kind: &str,
    sigma: Option<f64>,
    big_k: Option<f64>,
    big_u: Option<f64>,
    t: Option<f64>,
    x: Option<f64>,
    dim: Option<usize>,
    n: Option<u64>,
    alpha: Option<f64>,
    free_constant: Option<f64>,
    free_prefactor: Option<f64>,
    free_validity: Option<f64>,
    mean_cov: Option<PyHermitianMatrix>,
) -> PyResult<String> {
    let kind = BaselineKind::from_str(kind).map_err(to_py)?;
    let params = BaselineParams {
        sigma,
        big_k,
        big_u,
        t,
        x,
        dim,
        n,
        alpha,
        free_constant,
        free_prefactor,
        free_validity,
        mean_cov: mean_cov.map(|m| m.inner),
    };
    to_json(&baseline(kind, &params).map_err(to_py)?)
}

// --------------------------------------------------------------------------
// Monte Carlo drivers
// --------------------------------------------------------------------------

/// Run a tail-validation experiment from the same JSON config the CLI's
/// `verify` subcommand reads; the seed must be present in the config. Returns
/// the report as a JSON string (identical to the CLI's stdout line).
#[pyfunction]
fn run_tail_experiment(config_json: &str) -> PyResult<String> {
    let cfg: SimulationConfig = serde_json::from_str(config_json)
        .map_err(|e| PyValueError::new_err(format!("config JSON: {e}")))?;
    to_json(&run_experiment(&cfg).map_err(to_py)?)
}

/// Coverage experiment for the empirical-variance corollary: spec_json is a
/// martingale spec (`{"kind": ..., "n": ..., "declared_alpha": ...}`).
#[pyfunction]
#[pyo3(signature = (spec_json, x, trials, seed, threads=1))]
fn run_coverage_experiment(
    spec_json: &str,
    x: f64,
    trials: u64,
    seed: u64,
    threads: usize,
) -> PyResult<String> {
    let spec: MartingaleSpec = serde_json::from_str(spec_json)
        .map_err(|e| PyValueError::new_err(format!("spec JSON: {e}")))?;
    to_json(&empirical_coverage(&spec, x, trials, seed, threads).map_err(to_py)?)
}

/// McDiarmid-style function-of-independent-variables experiment from a JSON
/// config (fields m, n, radius_law, alpha, x, trials, seed, ...).
#[pyfunction]
fn run_mcdiarmid_experiment(config_json: &str) -> PyResult<String> {
    let cfg: McdiarmidConfig = serde_json::from_str(config_json)
        .map_err(|e| PyValueError::new_err(format!("config JSON: {e}")))?;
    to_json(&mcdiarmid_experiment(&cfg).map_err(to_py)?)
}

#[pymodule]
fn mtb_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(upsilon, m)?)?;
    m.add_function(wrap_pyfunction!(h, m)?)?;
    m.add_function(wrap_pyfunction!(h_inv, m)?)?;
    m.add_function(wrap_pyfunction!(underline_log, m)?)?;
    m.add_function(wrap_pyfunction!(g_inv, m)?)?;
    m.add_function(wrap_pyfunction!(z_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_orlicz_norm, m)?)?;
    m.add_function(wrap_pyfunction!(law_orlicz_norm, m)?)?;
    m.add_function(wrap_pyfunction!(bound, m)?)?;
    m.add_function(wrap_pyfunction!(baseline_bound, m)?)?;
    m.add_function(wrap_pyfunction!(run_tail_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(run_coverage_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(run_mcdiarmid_experiment, m)?)?;
    m.add_class::<PyHermitianMatrix>()?;
    Ok(())
}
