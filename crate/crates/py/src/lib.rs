//! Python bindings: `import logfsk`.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use logfsk_core::experiments::config::parse_q_interpretation;
use logfsk_core::{theory, transform, waveform, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn frame(samples: Vec<f64>) -> PyResult<logfsk_core::SampleFrame> {
    logfsk_core::SampleFrame::new(samples).map_err(to_py)
}

fn normalization(name: &str) -> PyResult<waveform::PowerNormalization> {
    use waveform::PowerNormalization::*;
    match name {
        "reference" => Ok(Reference),
        "worst_case" => Ok(WorstCase),
        other => Err(PyValueError::new_err(format!(
            "unknown normalization `{other}` (expected reference or worst_case)"
        ))),
    }
}

/// Modulation constants shared by transmitters and receiver.
#[pyclass(name = "LogFskParams", module = "logfsk", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: logfsk_core::LogFskParams,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (n_samples, b_c=None, alpha=None, delta=waveform::DEFAULT_DELTA, a_bar_c=1.0, normalization="reference"))]
    fn new(
        n_samples: usize,
        b_c: Option<f64>,
        alpha: Option<f64>,
        delta: f64,
        a_bar_c: f64,
        normalization: &str,
    ) -> PyResult<Self> {
        let mut builder = logfsk_core::LogFskParams::builder(n_samples)
            .delta(delta)
            .a_bar_c(a_bar_c)
            .normalization(self::normalization(normalization)?);
        builder.b_c = b_c;
        builder.alpha = alpha;
        Ok(Self {
            inner: builder.build().map_err(to_py)?,
        })
    }

    #[getter]
    fn n_samples(&self) -> usize {
        self.inner.n_samples()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    #[getter]
    fn b_c(&self) -> f64 {
        self.inner.b_c()
    }

    #[getter]
    fn a_bar_c(&self) -> f64 {
        self.inner.a_bar_c()
    }

    #[getter]
    fn log_power(&self) -> f64 {
        self.inner.log_power()
    }

    #[getter]
    fn a_c(&self) -> f64 {
        self.inner.a_c()
    }

    /// Same design normalized so message `m` is sent at exactly `a_bar_c**2`.
    fn calibrated_for(&self, m: usize) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.calibrated_for(m).map_err(to_py)?,
        })
    }

    fn log_term_power(&self, m: usize) -> PyResult<f64> {
        waveform::log_term_power(m, &self.inner).map_err(to_py)
    }

    fn modulate(&self, m: usize) -> PyResult<Vec<f64>> {
        Ok(waveform::modulate(m, &self.inner)
            .map_err(to_py)?
            .into_vec())
    }

    fn __repr__(&self) -> String {
        format!(
            "LogFskParams(n_samples={}, b_c={}, alpha={}, a_bar_c={})",
            self.inner.n_samples(),
            self.inner.b_c(),
            self.inner.alpha(),
            self.inner.a_bar_c()
        )
    }
}

/// Every violated design invariant as a message; empty when the design is usable for AirComp.
#[pyfunction]
#[pyo3(signature = (n_samples, b_c=None, alpha=None, delta=waveform::DEFAULT_DELTA))]
fn validate_params(
    n_samples: usize,
    b_c: Option<f64>,
    alpha: Option<f64>,
    delta: f64,
) -> Vec<String> {
    let mut builder = logfsk_core::LogFskParams::builder(n_samples).delta(delta);
    builder.b_c = b_c;
    builder.alpha = alpha;
    match builder.validate() {
        Ok(()) => Vec::new(),
        Err(violations) => violations.iter().map(|v| v.to_string()).collect(),
    }
}

#[pyfunction]
fn cosine_basis(m: usize, n_samples: usize) -> PyResult<Vec<f64>> {
    Ok(waveform::cosine_basis(m, n_samples)
        .map_err(to_py)?
        .into_vec())
}

#[pyclass(name = "AnalysisOperator", module = "logfsk", frozen)]
struct PyOperator {
    inner: logfsk_core::AnalysisOperator,
}

#[pymethods]
impl PyOperator {
    #[new]
    fn new(n_samples: usize) -> PyResult<Self> {
        Ok(Self {
            inner: logfsk_core::AnalysisOperator::new(n_samples).map_err(to_py)?,
        })
    }

    fn analyze(&self, samples: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self
            .inner
            .analyze(&frame(samples)?)
            .map_err(to_py)?
            .into_vec())
    }

    fn synthesize(&self, coefficients: Vec<f64>) -> PyResult<Vec<f64>> {
        let spectrum = transform::Spectrum::new(coefficients).map_err(to_py)?;
        Ok(self.inner.synthesize(&spectrum).map_err(to_py)?.into_vec())
    }

    fn inverse_residual(&self) -> f64 {
        self.inner.inverse_residual()
    }

    /// Row-major analysis matrix.
    fn analysis_matrix(&self) -> Vec<Vec<f64>> {
        let q = self.inner.analysis_matrix();
        (0..q.nrows())
            .map(|i| q.row(i).iter().copied().collect())
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// `(index, below_threshold_fallback)` of the largest bin reaching `threshold`.
#[pyfunction]
fn detect_max_frequency(coefficients: Vec<f64>, threshold: f64) -> PyResult<(usize, bool)> {
    let d = transform::detect_max_frequency(&coefficients, threshold).map_err(to_py)?;
    Ok((d.index, d.below_threshold_fallback))
}

#[pyfunction]
fn superpose(frames: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let frames = frames
        .into_iter()
        .map(frame)
        .collect::<PyResult<Vec<_>>>()?;
    Ok(logfsk_core::superpose(&frames).map_err(to_py)?.into_vec())
}

#[pyfunction]
#[pyo3(signature = (samples, sigma2, seed, trial_index=0))]
fn add_awgn(samples: Vec<f64>, sigma2: f64, seed: u64, trial_index: u64) -> PyResult<Vec<f64>> {
    let channel = logfsk_core::AwgnChannel::new(sigma2, seed).map_err(to_py)?;
    Ok(channel.add_awgn(&frame(samples)?, trial_index).into_vec())
}

#[pyclass(name = "DemodOutcome", module = "logfsk", get_all, frozen)]
struct PyOutcome {
    sum_estimate: usize,
    threshold: f64,
    candidates: Vec<usize>,
    peak_magnitude: f64,
    below_threshold_fallback: bool,
    coefficients: Vec<f64>,
}

#[pyclass(name = "Receiver", module = "logfsk", frozen)]
struct PyReceiver {
    cfg: logfsk_core::ReceiverConfig,
    op: logfsk_core::AnalysisOperator,
}

#[pymethods]
impl PyReceiver {
    #[new]
    #[pyo3(signature = (params, k_users, threshold_fraction=logfsk_core::receiver::DEFAULT_THRESHOLD_FRACTION, dc_removal=true))]
    fn new(
        params: &PyParams,
        k_users: usize,
        threshold_fraction: f64,
        dc_removal: bool,
    ) -> PyResult<Self> {
        let n = params.inner.n_samples();
        Ok(Self {
            cfg: logfsk_core::ReceiverConfig::with_options(
                params.inner.clone(),
                k_users,
                threshold_fraction,
                dc_removal,
            )
            .map_err(to_py)?,
            op: logfsk_core::AnalysisOperator::new(n).map_err(to_py)?,
        })
    }

    #[getter]
    fn threshold(&self) -> f64 {
        self.cfg.threshold()
    }

    fn exp_postprocess(&self, samples: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(
            logfsk_core::exp_postprocess(&frame(samples)?, self.cfg.params())
                .map_err(to_py)?
                .into_vec(),
        )
    }

    fn demodulate(&self, samples: Vec<f64>) -> PyResult<PyOutcome> {
        let o = logfsk_core::demodulate(&frame(samples)?, &self.cfg, &self.op).map_err(to_py)?;
        Ok(PyOutcome {
            sum_estimate: o.sum_estimate,
            threshold: o.threshold,
            candidates: o.candidates,
            peak_magnitude: o.peak_magnitude,
            below_threshold_fallback: o.below_threshold_fallback,
            coefficients: o.coefficients,
        })
    }
}

/// `(mu_z, sigma2_z)` of the multiplicative noise.
#[pyfunction]
fn lognormal_stats(sigma2: f64, a_c: f64) -> (f64, f64) {
    let s = theory::lognormal_stats(sigma2, a_c);
    (s.mu_z, s.sigma2_z)
}

#[pyfunction]
fn a_sigma(k_users: usize, b_c: f64, n_samples: usize) -> PyResult<f64> {
    if k_users == 0 {
        return Err(PyValueError::new_err("at least one user"));
    }
    Ok(theory::a_sigma(k_users, b_c, n_samples))
}

#[pyfunction]
fn p_p(params: &PyParams, messages: Vec<usize>) -> PyResult<f64> {
    theory::p_p(&params.inner, &messages).map_err(to_py)
}

#[pyfunction]
fn snr_sigma_from_snr_r(snr_r: f64, p_p: f64, p: f64, n_samples: usize) -> f64 {
    theory::snr_sigma_from_snr_r(snr_r, p_p, p, n_samples)
}

#[pyfunction]
#[pyo3(signature = (n_samples, snr_sigma, interpretation="sqrt"))]
fn error_prob(n_samples: usize, snr_sigma: f64, interpretation: &str) -> PyResult<f64> {
    let q = parse_q_interpretation(interpretation).map_err(to_py)?;
    Ok(theory::error_prob(n_samples, snr_sigma, q))
}

/// `(snr_sigma_db, snr_r_db)` needed to keep the error probability at `gamma_th`.
#[pyfunction]
#[pyo3(signature = (params, k_users, gamma_th=1e-4, interpretation="sqrt"))]
fn threshold_snr_r(
    params: &PyParams,
    k_users: usize,
    gamma_th: f64,
    interpretation: &str,
) -> PyResult<(f64, f64)> {
    let q = parse_q_interpretation(interpretation).map_err(to_py)?;
    let th = theory::threshold_snr_r(&params.inner, k_users, gamma_th, q).map_err(to_py)?;
    Ok((th.snr_sigma_db, th.snr_r_db))
}

#[pyfunction]
fn mse(n_samples: usize, p_e: f64, true_sum: usize) -> f64 {
    theory::mse(n_samples, p_e, true_sum)
}

#[pymodule]
fn logfsk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyOperator>()?;
    m.add_class::<PyReceiver>()?;
    m.add_class::<PyOutcome>()?;
    m.add_function(wrap_pyfunction!(validate_params, m)?)?;
    m.add_function(wrap_pyfunction!(cosine_basis, m)?)?;
    m.add_function(wrap_pyfunction!(detect_max_frequency, m)?)?;
    m.add_function(wrap_pyfunction!(superpose, m)?)?;
    m.add_function(wrap_pyfunction!(add_awgn, m)?)?;
    m.add_function(wrap_pyfunction!(lognormal_stats, m)?)?;
    m.add_function(wrap_pyfunction!(a_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(p_p, m)?)?;
    m.add_function(wrap_pyfunction!(snr_sigma_from_snr_r, m)?)?;
    m.add_function(wrap_pyfunction!(error_prob, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_snr_r, m)?)?;
    m.add_function(wrap_pyfunction!(mse, m)?)?;
    Ok(())
}
