//! Exponential postprocessing and maximum-frequency demodulation of the sum.

use crate::error::{Error, Result};
use crate::theory::a_sigma;
use crate::transform::{detect_max_frequency, top_index, AnalysisOperator};
use crate::waveform::{CosineGrid, LogFskParams, SampleFrame};

/// Detection threshold as a fraction of the noiseless sum amplitude.
///
/// The bins above the sum carry only noise, and after exponentiation that noise
/// has heavy log-normal tails, so the decision level sits above the midpoint.
pub const DEFAULT_THRESHOLD_FRACTION: f64 = 0.7;

/// Largest `y / A_c` accepted before `exp` is treated as saturated.
pub const EXP_LIMIT: f64 = 700.0;

/// Demodulator settings; `params` must match the transmitters.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverConfig {
    params: LogFskParams,
    k_users: usize,
    threshold_fraction: f64,
    dc_removal: bool,
}

impl ReceiverConfig {
    /// Default settings: threshold fraction 0.7 with DC removal.
    pub fn new(params: LogFskParams, k_users: usize) -> Result<Self> {
        Self::with_options(params, k_users, DEFAULT_THRESHOLD_FRACTION, true)
    }

    pub fn with_options(
        params: LogFskParams,
        k_users: usize,
        threshold_fraction: f64,
        dc_removal: bool,
    ) -> Result<Self> {
        let violations = params.aircomp_violations();
        if !violations.is_empty() {
            return Err(Error::InvalidParams(violations));
        }
        if params.subtract_mean() {
            return Err(Error::Unsupported(
                "mean-removed symbols scale the product by a message-dependent factor the receiver cannot undo",
            ));
        }
        if k_users == 0 {
            return Err(Error::InvalidArgument("at least one user".into()));
        }
        if !(threshold_fraction > 0.0 && threshold_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "threshold fraction must lie in (0, 1], got {threshold_fraction}"
            )));
        }
        Ok(Self {
            params,
            k_users,
            threshold_fraction,
            dc_removal,
        })
    }

    pub fn params(&self) -> &LogFskParams {
        &self.params
    }

    pub fn k_users(&self) -> usize {
        self.k_users
    }

    pub fn threshold_fraction(&self) -> f64 {
        self.threshold_fraction
    }

    pub fn dc_removal(&self) -> bool {
        self.dc_removal
    }

    /// Expected noiseless peak of the sum bin.
    pub fn sum_amplitude(&self) -> f64 {
        a_sigma(self.k_users, self.params.b_c(), self.params.n_samples())
    }

    pub fn threshold(&self) -> f64 {
        self.threshold_fraction * self.sum_amplitude()
    }

    fn dc_level(&self) -> f64 {
        if self.dc_removal {
            self.params.alpha().powi(self.k_users as i32)
        } else {
            0.0
        }
    }

    fn check_operator(&self, op: &AnalysisOperator) -> Result<()> {
        if op.grid() != CosineGrid::HalfSampleTime {
            return Err(Error::Unsupported(
                "sum tones fall between bins of the half-bin-frequency grid",
            ));
        }
        if op.len() != self.params.n_samples() {
            return Err(Error::LengthMismatch {
                expected: self.params.n_samples(),
                actual: op.len(),
            });
        }
        Ok(())
    }

    /// Exponentiates `y` into `out` and removes the known DC level.
    pub(crate) fn prepare(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        let a_c = self.params.a_c();
        let dc = self.dc_level();
        for (index, (o, v)) in out.iter_mut().zip(y).enumerate() {
            *o = exp_checked(*v, a_c, index)? - dc;
        }
        Ok(())
    }

    /// Decided sum index and fallback flag for one analyzed column.
    pub(crate) fn decide(&self, coefficients: &[f64]) -> (usize, bool) {
        top_index(coefficients, self.threshold())
    }
}

fn exp_checked(v: f64, a_c: f64, index: usize) -> Result<f64> {
    let exponent = v / a_c;
    if exponent > EXP_LIMIT || exponent.is_nan() {
        return Err(Error::Saturation {
            index,
            exponent,
            limit: EXP_LIMIT,
            a_c,
        });
    }
    Ok(exponent.exp())
}

/// `r[n] = exp(y[n] / A_c)`.
pub fn exp_postprocess(y: &SampleFrame, params: &LogFskParams) -> Result<SampleFrame> {
    let a_c = params.a_c();
    let samples = y
        .samples()
        .iter()
        .enumerate()
        .map(|(i, v)| exp_checked(*v, a_c, i))
        .collect::<Result<Vec<_>>>()?;
    SampleFrame::new(samples)
}

/// Demodulated sum and detection diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DemodOutcome {
    pub sum_estimate: usize,
    pub threshold: f64,
    pub candidates: Vec<usize>,
    pub peak_magnitude: f64,
    pub below_threshold_fallback: bool,
    /// Full analysis output, kept for inspection.
    pub coefficients: Vec<f64>,
}

/// Recovers `sum_k m_k` from the received superposition `y`.
pub fn demodulate(
    y: &SampleFrame,
    cfg: &ReceiverConfig,
    op: &AnalysisOperator,
) -> Result<DemodOutcome> {
    cfg.check_operator(op)?;
    if y.len() != op.len() {
        return Err(Error::LengthMismatch {
            expected: op.len(),
            actual: y.len(),
        });
    }
    let mut r = vec![0.0; y.len()];
    cfg.prepare(y.samples(), &mut r)?;
    let d = op.analyze(&SampleFrame::new(r)?)?;
    let threshold = cfg.threshold();
    let det = detect_max_frequency(d.coefficients(), threshold)?;
    Ok(DemodOutcome {
        sum_estimate: det.index,
        threshold,
        candidates: det.candidates,
        peak_magnitude: det.magnitude,
        below_threshold_fallback: det.below_threshold_fallback,
        coefficients: d.into_vec(),
    })
}

/// Minimum number of trials for [`measure_destination_snr`].
pub const MIN_SNR_TRIALS: usize = 1000;

/// Empirical destination SNR from the sum-bin coefficient of many trials:
/// `A^2 / (Var + (Mean - A)^2)` with `A` the noiseless amplitude of that bin.
pub fn measure_destination_snr(sum_bin: &[f64], amplitude: f64) -> Result<f64> {
    if sum_bin.len() < MIN_SNR_TRIALS {
        return Err(Error::InsufficientTrials {
            got: sum_bin.len(),
            min: MIN_SNR_TRIALS,
        });
    }
    let count = sum_bin.len() as f64;
    let mean = sum_bin.iter().sum::<f64>() / count;
    let var = sum_bin.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
    let denom = var + (mean - amplitude).powi(2);
    Ok(if denom == 0.0 {
        f64::INFINITY
    } else {
        amplitude * amplitude / denom
    })
}
