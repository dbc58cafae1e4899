//! Python bindings. Sequences cross the boundary as lists of `+1`/`-1`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use bsc_thermo::denoise::{self, BfpMode};
use bsc_thermo::spin::spins_from_ints;
use bsc_thermo::{gibbs, sim, transfer, Spin};

fn err(e: bsc_thermo::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn spins(y: Vec<i64>) -> PyResult<Vec<Spin>> {
    spins_from_ints(y).map_err(err)
}

fn ints(y: &[Spin]) -> Vec<i8> {
    y.iter().map(|s| s.value()).collect()
}

#[pyclass(frozen, skip_from_py_object, name = "ChannelParams")]
#[derive(Clone, Copy)]
struct PyChannelParams {
    inner: bsc_thermo::ChannelParams,
}

#[pymethods]
impl PyChannelParams {
    #[new]
    fn new(p: f64, eps: f64) -> PyResult<Self> {
        bsc_thermo::ChannelParams::new(p, eps).map(|inner| Self { inner }).map_err(err)
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.p()
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.inner.epsilon()
    }

    /// `(J, K, λ)`.
    fn couplings(&self) -> (f64, f64, f64) {
        let m = self.inner.couplings();
        (m.j, m.k, m.lambda)
    }

    fn __repr__(&self) -> String {
        format!("ChannelParams(p={}, eps={})", self.inner.p(), self.inner.epsilon())
    }
}

#[pyclass(frozen, get_all, name = "DecayBound")]
struct PyDecayBound {
    rho: f64,
    regime: String,
    c: f64,
    c1: f64,
}

#[pyfunction]
fn cylinder_prob(y: Vec<i64>, params: &PyChannelParams) -> PyResult<f64> {
    let y = spins(y)?;
    if y.is_empty() {
        return Err(err(bsc_thermo::Error::EmptySequence));
    }
    Ok(transfer::log_cylinder_prob(&y, &params.inner.couplings()).exp())
}

#[pyfunction]
fn brute_force_cylinder(y: Vec<i64>, params: &PyChannelParams) -> PyResult<f64> {
    transfer::brute_force_cylinder(&spins(y)?, &params.inner).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (y, params, tol = 1e-10))]
fn g_function(y: Vec<i64>, params: &PyChannelParams, tol: f64) -> PyResult<f64> {
    gibbs::g_function(&spins(y)?, tol, &params.inner.couplings()).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (y, params, depth = 200))]
fn g_continued_fraction(y: Vec<i64>, params: &PyChannelParams, depth: usize) -> PyResult<f64> {
    gibbs::g_continued_fraction(&spins(y)?, depth, &params.inner.couplings())
        .map(|v| v.g)
        .map_err(err)
}

#[pyfunction]
fn decay_rate_bound(params: &PyChannelParams) -> PyDecayBound {
    let b = gibbs::decay_rate_bound(&params.inner);
    PyDecayBound { rho: b.rho, regime: b.regime.as_str().to_string(), c: b.c, c1: b.c1 }
}

#[pyfunction]
fn pressure(params: &PyChannelParams) -> f64 {
    gibbs::pressure(&params.inner.couplings())
}

/// `(x, z, y)` of one simulated path.
#[pyfunction]
fn simulate(params: &PyChannelParams, n: usize, seed: u64) -> PyResult<(Vec<i8>, Vec<i8>, Vec<i8>)> {
    let path = sim::generate_dataset(&params.inner, n, seed).map_err(err)?;
    Ok((ints(&path.x), ints(&path.z), ints(&path.y)))
}

/// `P(x_i = +1 | y)` for every position.
#[pyfunction]
fn forward_backward(y: Vec<i64>, params: &PyChannelParams) -> PyResult<Vec<f64>> {
    let post = denoise::forward_backward(&spins(y)?, &params.inner).map_err(err)?;
    Ok(post.pairs().iter().map(|p| p[0]).collect())
}

#[pyfunction]
fn map_denoise(y: Vec<i64>, params: &PyChannelParams) -> PyResult<Vec<i8>> {
    let post = denoise::forward_backward(&spins(y)?, &params.inner).map_err(err)?;
    Ok(ints(&denoise::map_denoise(&post)))
}

/// Denoised sequence and the estimated flip probability.
#[pyfunction]
fn gibbs_denoise(y: Vec<i64>, eps: f64) -> PyResult<(Vec<i8>, f64)> {
    let out = denoise::gibbs_denoise(&spins(y)?, eps).map_err(err)?;
    Ok((ints(&out.denoised), out.p_hat))
}

#[pyfunction]
#[pyo3(signature = (y, eps, k = None))]
fn dude(y: Vec<i64>, eps: f64, k: Option<usize>) -> PyResult<Vec<i8>> {
    let y = spins(y)?;
    let k = k.unwrap_or_else(|| denoise::default_context_length(y.len()));
    let out = denoise::dude(&y, eps, k).map_err(err)?;
    Ok(ints(&out.denoised))
}

/// Exact field-product denoiser, or the empirical one when `k` is given.
#[pyfunction]
#[pyo3(signature = (y, params, k = None))]
fn bfp_denoise(y: Vec<i64>, params: &PyChannelParams, k: Option<usize>) -> PyResult<Vec<i8>> {
    let mode = k.map_or(BfpMode::Exact, BfpMode::Empirical);
    let out = denoise::bfp_denoise(&spins(y)?, &params.inner, mode).map_err(err)?;
    Ok(ints(&out.denoised))
}

#[pyfunction]
fn bit_error_rate(xhat: Vec<i64>, x: Vec<i64>) -> PyResult<f64> {
    denoise::bit_error_rate(&spins(xhat)?, &spins(x)?).map_err(err)
}

#[pymodule]
fn bscthermo(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyChannelParams>()?;
    m.add_class::<PyDecayBound>()?;
    m.add_function(wrap_pyfunction!(cylinder_prob, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_cylinder, m)?)?;
    m.add_function(wrap_pyfunction!(g_function, m)?)?;
    m.add_function(wrap_pyfunction!(g_continued_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(decay_rate_bound, m)?)?;
    m.add_function(wrap_pyfunction!(pressure, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(forward_backward, m)?)?;
    m.add_function(wrap_pyfunction!(map_denoise, m)?)?;
    m.add_function(wrap_pyfunction!(gibbs_denoise, m)?)?;
    m.add_function(wrap_pyfunction!(dude, m)?)?;
    m.add_function(wrap_pyfunction!(bfp_denoise, m)?)?;
    m.add_function(wrap_pyfunction!(bit_error_rate, m)?)?;
    Ok(())
}
