//! Log-FSK symbol synthesis.
//!
//! A user with message index `m` transmits one frame of `N` samples
//!
//! ```text
//! x[n] = A_c * ln(B_c * cos_m[n] + alpha),    A_c = Abar_c / sqrt(P)
//! ```
//!
//! where `cos_m` is a column of the cosine alphabet and `P` is the mean-square
//! power of the logarithmic term. Summing such frames in the channel and
//! exponentiating at the receiver multiplies the shifted cosines, which puts a
//! tone at the sum of the message indices.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Index;

use crate::error::{Error, Result};

/// Default regularization margin: `alpha = B_c * sqrt(2/N) + DEFAULT_DELTA`.
pub const DEFAULT_DELTA: f64 = 0.1;

/// Relative slack used when checking the strict and non-strict amplitude bounds,
/// so that values computed as `sqrt(2N)` in different ways compare equal.
const BOUND_SLACK: f64 = 1e-12;

/// Sampling convention for the cosine alphabet `cos_m[n]`, both scaled by `sqrt(2/N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum CosineGrid {
    /// `cos(pi * m * (2n + 1) / 2N)`: integer frequency bins sampled at half-integer
    /// instants (the DCT-II family). The product of two alphabet tones contains
    /// exactly the tones `m_k + m_l` and `|m_k - m_l|`, so every intermodulation
    /// product of a K-user superposition stays on the grid.
    #[default]
    HalfSampleTime,
    /// `cos(pi * (2m + 1) * n / 2N)`: half-integer frequency bins sampled at integer
    /// instants. The K-user product tone lands on fractional bin `sum + (K - 1) / 2`,
    /// so for even K it straddles two bins and for `sum` near `N - 1` it aliases.
    HalfBinFrequency,
}

impl CosineGrid {
    /// Phase `theta` of `cos(theta)` for frequency index `m` at sample `n` of an `len`-sample frame.
    pub fn phase(self, m: usize, n: usize, len: usize) -> f64 {
        let (m, n, len) = (m as f64, n as f64, len as f64);
        match self {
            CosineGrid::HalfSampleTime => PI * m * (2.0 * n + 1.0) / (2.0 * len),
            CosineGrid::HalfBinFrequency => PI * (2.0 * m + 1.0) * n / (2.0 * len),
        }
    }
}

/// One symbol period of real samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleFrame {
    samples: Vec<f64>,
}

impl SampleFrame {
    /// Wraps `samples`, rejecting non-finite values.
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if let Some(index) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { samples })
    }

    pub(crate) fn from_raw(samples: Vec<f64>) -> Self {
        debug_assert!(samples.iter().all(|s| s.is_finite()));
        Self { samples }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            samples: vec![0.0; len],
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.samples
    }

    pub fn mean(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Time-average power `(1/N) * sum x[n]^2`.
    pub fn mean_square(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_raw(self.samples.iter().map(|s| s * factor).collect())
    }
}

impl Index<usize> for SampleFrame {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.samples[index]
    }
}

impl AsRef<[f64]> for SampleFrame {
    fn as_ref(&self) -> &[f64] {
        &self.samples
    }
}

/// Alphabet tone `cos_m` on the default [`CosineGrid::HalfSampleTime`] grid.
pub fn cosine_basis(m: usize, n_samples: usize) -> Result<SampleFrame> {
    cosine_basis_on(CosineGrid::default(), m, n_samples)
}

/// Alphabet tone `sqrt(2/N) * cos(theta_m[n])` on the given grid.
pub fn cosine_basis_on(grid: CosineGrid, m: usize, n_samples: usize) -> Result<SampleFrame> {
    if m >= n_samples {
        return Err(Error::MessageOutOfRange { m, n: n_samples });
    }
    let scale = (2.0 / n_samples as f64).sqrt();
    Ok(SampleFrame::from_raw(
        (0..n_samples)
            .map(|n| scale * grid.phase(m, n, n_samples).cos())
            .collect(),
    ))
}

/// An invariant of [`LogFskParams`] that a candidate design breaks.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    TooFewSamples {
        n_samples: usize,
    },
    NonPositive {
        field: &'static str,
        value: f64,
    },
    /// `alpha` must strictly exceed the peak `B_c * sqrt(2/N)` of the scaled cosine.
    AlphaNotAbovePeak {
        alpha: f64,
        bound: f64,
    },
    /// `B_c >= sqrt(2N)` keeps the sum tone from vanishing as K grows.
    BelowAirCompAmplitude {
        b_c: f64,
        bound: f64,
    },
    DegenerateLogPower {
        value: f64,
    },
}

impl Violation {
    /// True for constraints that only matter when frames are combined over the air.
    pub fn is_aircomp_only(&self) -> bool {
        matches!(self, Violation::BelowAirCompAmplitude { .. })
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewSamples { n_samples } => {
                write!(
                    f,
                    "n_samples = {n_samples} but at least 2 samples are required"
                )
            }
            Violation::NonPositive { field, value } => {
                write!(f, "{field} = {value} must be finite and positive")
            }
            Violation::AlphaNotAbovePeak { alpha, bound } => write!(
                f,
                "alpha = {alpha} must strictly exceed B_c*sqrt(2/N) = {bound}"
            ),
            Violation::BelowAirCompAmplitude { b_c, bound } => write!(
                f,
                "B_c = {b_c} is below sqrt(2N) = {bound}; the sum tone vanishes as K grows"
            ),
            Violation::DegenerateLogPower { value } => {
                write!(f, "log-term power P = {value} must be finite and positive")
            }
        }
    }
}

/// How the log-term power `P` that fixes `A_c = Abar_c / sqrt(P)` is chosen.
///
/// All users and the receiver must share one `A_c`, so `P` cannot follow each
/// transmitter's own message.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PowerNormalization {
    /// `P` of the reference message `m = N / 4`.
    #[default]
    Reference,
    /// Largest `P` over the alphabet: no frame exceeds `Abar_c^2`.
    WorstCase,
    /// `P` of one specific message; that message is sent at exactly `Abar_c^2`.
    Message(usize),
    Fixed(f64),
}

/// Candidate Log-FSK design. Unset amplitudes take the default design
/// `B_c = sqrt(2N)`, `alpha = B_c*sqrt(2/N) + delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogFskBuilder {
    pub n_samples: usize,
    pub b_c: Option<f64>,
    pub alpha: Option<f64>,
    pub delta: f64,
    pub a_bar_c: f64,
    pub subtract_mean: bool,
    pub normalization: PowerNormalization,
}

impl LogFskBuilder {
    pub fn b_c(mut self, b_c: f64) -> Self {
        self.b_c = Some(b_c);
        self
    }

    pub fn alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn a_bar_c(mut self, a_bar_c: f64) -> Self {
        self.a_bar_c = a_bar_c;
        self
    }

    pub fn subtract_mean(mut self, subtract_mean: bool) -> Self {
        self.subtract_mean = subtract_mean;
        self
    }

    pub fn normalization(mut self, normalization: PowerNormalization) -> Self {
        self.normalization = normalization;
        self
    }

    fn resolved_b_c(&self) -> f64 {
        self.b_c
            .unwrap_or_else(|| aircomp_amplitude_bound(self.n_samples))
    }

    fn resolved_alpha(&self) -> f64 {
        self.alpha
            .unwrap_or_else(|| cosine_peak(self.resolved_b_c(), self.n_samples.max(1)) + self.delta)
    }

    /// Every violated invariant, including the AirComp amplitude bound.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut violations = self.waveform_violations();
        let b_c = self.resolved_b_c();
        if self.n_samples >= 2 && b_c.is_finite() && b_c > 0.0 {
            let bound = aircomp_amplitude_bound(self.n_samples);
            if b_c < bound * (1.0 - BOUND_SLACK) {
                violations.push(Violation::BelowAirCompAmplitude { b_c, bound });
            }
        }
        if violations.is_empty() {
            if let Err(v) = self.log_power() {
                violations.push(v);
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    fn waveform_violations(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        if self.n_samples < 2 {
            violations.push(Violation::TooFewSamples {
                n_samples: self.n_samples,
            });
        }
        let b_c = self.resolved_b_c();
        let alpha = self.resolved_alpha();
        for (field, value) in [("b_c", b_c), ("alpha", alpha), ("a_bar_c", self.a_bar_c)] {
            if !(value.is_finite() && value > 0.0) {
                violations.push(Violation::NonPositive { field, value });
            }
        }
        if self.n_samples >= 1 && b_c.is_finite() && alpha.is_finite() {
            let bound = cosine_peak(b_c, self.n_samples);
            if alpha <= bound * (1.0 + BOUND_SLACK) {
                violations.push(Violation::AlphaNotAbovePeak { alpha, bound });
            }
        }
        violations
    }

    fn log_power(&self) -> Result<f64, Violation> {
        let (n, b_c, alpha) = (self.n_samples, self.resolved_b_c(), self.resolved_alpha());
        let value = match self.normalization {
            PowerNormalization::Reference => log_power_raw(reference_message(n), n, b_c, alpha),
            PowerNormalization::WorstCase => (0..n)
                .map(|m| log_power_raw(m, n, b_c, alpha))
                .fold(f64::NEG_INFINITY, f64::max),
            PowerNormalization::Message(m) if m < n => log_power_raw(m, n, b_c, alpha),
            PowerNormalization::Message(_) => f64::NAN,
            PowerNormalization::Fixed(p) => p,
        };
        let a_c = self.a_bar_c / value.sqrt();
        if value.is_finite() && value > 0.0 && a_c.is_finite() && a_c > 0.0 {
            Ok(value)
        } else {
            Err(Violation::DegenerateLogPower { value })
        }
    }

    /// Builds the parameter set. Only the waveform-level invariants are enforced
    /// here; the AirComp amplitude bound is checked by the receiver.
    pub fn build(&self) -> Result<LogFskParams> {
        let violations = self.waveform_violations();
        if !violations.is_empty() {
            return Err(Error::InvalidParams(violations));
        }
        let log_power = self
            .log_power()
            .map_err(|v| Error::InvalidParams(vec![v]))?;
        Ok(LogFskParams {
            n_samples: self.n_samples,
            alpha: self.resolved_alpha(),
            b_c: self.resolved_b_c(),
            a_bar_c: self.a_bar_c,
            subtract_mean: self.subtract_mean,
            log_power,
        })
    }
}

/// Validated modulation constants shared by every transmitter and the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct LogFskParams {
    n_samples: usize,
    alpha: f64,
    b_c: f64,
    a_bar_c: f64,
    subtract_mean: bool,
    log_power: f64,
}

impl LogFskParams {
    pub fn builder(n_samples: usize) -> LogFskBuilder {
        LogFskBuilder {
            n_samples,
            b_c: None,
            alpha: None,
            delta: DEFAULT_DELTA,
            a_bar_c: 1.0,
            subtract_mean: false,
            normalization: PowerNormalization::default(),
        }
    }

    /// Default design: `B_c = sqrt(2N)`, `alpha = 2 + 0.1`, `Abar_c = 1`.
    pub fn new(n_samples: usize) -> Result<Self> {
        Self::builder(n_samples).build()
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn b_c(&self) -> f64 {
        self.b_c
    }

    pub fn a_bar_c(&self) -> f64 {
        self.a_bar_c
    }

    pub fn subtract_mean(&self) -> bool {
        self.subtract_mean
    }

    /// `P`, the mean-square power of the logarithmic term used for normalization.
    pub fn log_power(&self) -> f64 {
        self.log_power
    }

    /// `A_c = Abar_c / sqrt(P)`.
    pub fn a_c(&self) -> f64 {
        self.a_bar_c / self.log_power.sqrt()
    }

    /// Same design at a different transmit amplitude; `P` does not depend on `Abar_c`.
    pub fn with_a_bar_c(&self, a_bar_c: f64) -> Result<Self> {
        if !(a_bar_c.is_finite() && a_bar_c > 0.0) {
            return Err(Error::InvalidParams(vec![Violation::NonPositive {
                field: "a_bar_c",
                value: a_bar_c,
            }]));
        }
        Ok(Self {
            a_bar_c,
            ..self.clone()
        })
    }

    /// Same design normalized so that message `m` is sent at exactly `Abar_c^2`.
    pub fn calibrated_for(&self, m: usize) -> Result<Self> {
        let log_power = log_term_power(m, self)?;
        Ok(Self {
            log_power,
            ..self.clone()
        })
    }

    pub fn check_message(&self, m: usize) -> Result<()> {
        if m >= self.n_samples {
            Err(Error::MessageOutOfRange {
                m,
                n: self.n_samples,
            })
        } else {
            Ok(())
        }
    }

    /// Violations of the AirComp amplitude bound `B_c >= sqrt(2N)`, if any.
    pub fn aircomp_violations(&self) -> Vec<Violation> {
        let bound = aircomp_amplitude_bound(self.n_samples);
        if self.b_c < bound * (1.0 - BOUND_SLACK) {
            vec![Violation::BelowAirCompAmplitude {
                b_c: self.b_c,
                bound,
            }]
        } else {
            Vec::new()
        }
    }
}

/// `sqrt(2N)`, the smallest `B_c` for which the sum-tone amplitude does not shrink with K.
pub fn aircomp_amplitude_bound(n_samples: usize) -> f64 {
    (2.0 * n_samples as f64).sqrt()
}

/// `B_c * sqrt(2/N)`, the largest value of `B_c * cos_m[n]`.
pub fn cosine_peak(b_c: f64, n_samples: usize) -> f64 {
    (2.0 * b_c * b_c / n_samples as f64).sqrt()
}

/// Message whose log-term power is the reference `P`.
pub fn reference_message(n_samples: usize) -> usize {
    n_samples / 4
}

fn log_power_raw(m: usize, n: usize, b_c: f64, alpha: f64) -> f64 {
    let scale = (2.0 / n as f64).sqrt();
    let grid = CosineGrid::HalfSampleTime;
    (0..n)
        .map(|i| {
            let v = (b_c * scale * grid.phase(m, i, n).cos() + alpha).ln();
            v * v
        })
        .sum::<f64>()
        / n as f64
}

/// `P = (1/N) * sum_n ln(B_c * cos_m[n] + alpha)^2` for message `m`.
pub fn log_term_power(m: usize, params: &LogFskParams) -> Result<f64> {
    params.check_message(m)?;
    Ok(log_power_raw(m, params.n_samples, params.b_c, params.alpha))
}

/// Largest log-term power over the whole alphabet.
pub fn worst_case_log_power(params: &LogFskParams) -> f64 {
    (0..params.n_samples)
        .map(|m| log_power_raw(m, params.n_samples, params.b_c, params.alpha))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Log-FSK symbol for message `m`.
pub fn modulate(m: usize, params: &LogFskParams) -> Result<SampleFrame> {
    let tone = cosine_basis(m, params.n_samples)?;
    let a_c = params.a_c();
    let mut samples = Vec::with_capacity(params.n_samples);
    for (index, c) in tone.samples().iter().enumerate() {
        let arg = params.b_c * c + params.alpha;
        if !(arg > 0.0 && arg.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        samples.push(a_c * arg.ln());
    }
    if params.subtract_mean {
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        samples.iter_mut().for_each(|s| *s -= mean);
    }
    SampleFrame::new(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn printed_grid_two_point_tone() {
        let tone = cosine_basis_on(CosineGrid::HalfBinFrequency, 0, 2).unwrap();
        assert_relative_eq!(tone[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(tone[1], 2f64.sqrt() / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn half_sample_grid_two_point_tones() {
        let dc = cosine_basis(0, 2).unwrap();
        assert_eq!(dc.samples(), &[1.0, 1.0]);
        let m1 = cosine_basis(1, 2).unwrap();
        assert_relative_eq!(m1[0], 2f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_relative_eq!(m1[1], -(2f64.sqrt()) / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn out_of_range_message() {
        assert!(matches!(
            cosine_basis(8, 8),
            Err(Error::MessageOutOfRange { m: 8, n: 8 })
        ));
        let params = LogFskParams::new(8).unwrap();
        assert!(modulate(8, &params).is_err());
    }

    #[test]
    fn weighted_gram_matrix_is_diagonal() {
        // brute-force Gram matrix with half weight on the first sample (printed grid)
        // and on the DC tone (half-sample grid)
        let n = 32;
        for grid in [CosineGrid::HalfBinFrequency, CosineGrid::HalfSampleTime] {
            let tones: Vec<_> = (0..n)
                .map(|m| cosine_basis_on(grid, m, n).unwrap())
                .collect();
            for a in 0..n {
                for b in 0..n {
                    let dot: f64 = (0..n)
                        .map(|i| {
                            let w = if grid == CosineGrid::HalfBinFrequency && i == 0 {
                                0.5
                            } else {
                                1.0
                            };
                            w * tones[a][i] * tones[b][i]
                        })
                        .sum();
                    if a != b {
                        assert!(dot.abs() < 1e-10, "{grid:?} <{a},{b}> = {dot}");
                    }
                }
            }
        }
    }

    #[test]
    fn default_design() {
        let params = LogFskParams::new(256).unwrap();
        assert_relative_eq!(params.b_c(), 512f64.sqrt());
        assert_relative_eq!(params.alpha(), 2.1, epsilon = 1e-12);
        assert!(LogFskParams::builder(256).validate().is_ok());
    }

    #[test]
    fn alpha_boundary_is_rejected() {
        let err = LogFskParams::builder(256)
            .alpha(2.0)
            .validate()
            .unwrap_err();
        assert!(matches!(err[..], [Violation::AlphaNotAbovePeak { .. }]));
        assert!(LogFskParams::builder(256).alpha(2.0).build().is_err());
    }

    #[test]
    fn small_alpha_and_small_amplitude() {
        let err = LogFskParams::builder(256)
            .b_c(1.0)
            .alpha(0.05)
            .validate()
            .unwrap_err();
        let alpha_bound = err
            .iter()
            .find_map(|v| match v {
                Violation::AlphaNotAbovePeak { bound, .. } => Some(*bound),
                _ => None,
            })
            .expect("alpha violation reported");
        assert_relative_eq!(alpha_bound, (2.0f64 / 256.0).sqrt(), epsilon = 1e-12);
        assert!(err.iter().any(|v| v.is_aircomp_only()));
    }

    #[test]
    fn waveform_only_designs_build() {
        // B_c = 1 is a valid waveform, just not an AirComp design
        let params = LogFskParams::builder(256)
            .b_c(1.0)
            .alpha((2.0f64 / 256.0).sqrt() + 0.01)
            .build()
            .unwrap();
        assert_eq!(params.aircomp_violations().len(), 1);
        assert!(modulate(5, &params).is_ok());
    }

    #[test]
    fn zero_of_cosine_gives_log_alpha() {
        // phase pi/2 when m * (2n + 1) = N: N = 12, m = 4, n = 1
        let params = LogFskParams::new(12).unwrap();
        let x = modulate(4, &params).unwrap();
        assert_relative_eq!(x[1], params.a_c() * params.alpha().ln(), epsilon = 1e-12);
    }

    #[test]
    fn power_calibration_single_message() {
        let params = LogFskParams::new(64).unwrap().calibrated_for(10).unwrap();
        let x = modulate(10, &params).unwrap();
        assert_relative_eq!(
            x.mean_square(),
            params.a_bar_c().powi(2),
            max_relative = 1e-9
        );
    }

    #[test]
    fn power_calibration_exhaustive_n32() {
        let base = LogFskParams::builder(32).a_bar_c(1.7).build().unwrap();
        for m in 0..32 {
            let params = base.calibrated_for(m).unwrap();
            let x = modulate(m, &params).unwrap();
            assert_relative_eq!(x.mean_square(), 1.7f64.powi(2), max_relative = 1e-9);
        }
    }

    #[test]
    fn log_power_high_precision_oracle() {
        // mpmath, 40 digits: (1/32) sum_n ln(8*sqrt(2/32)*cos(pi*7*(2n+1)/64) + 2.1)^2
        let params = LogFskParams::builder(32)
            .b_c(8.0)
            .alpha(2.1)
            .build()
            .unwrap();
        let p = log_term_power(7, &params).unwrap();
        assert_relative_eq!(p, 1.355_592_016_151_549_4, max_relative = 1e-13);
    }

    #[test]
    fn reference_log_power_oracle() {
        // mpmath: P at the reference message m = 16 of the default N = 64 design
        let params = LogFskParams::new(64).unwrap();
        assert_relative_eq!(
            params.log_power(),
            1.243_544_394_003_286_6,
            max_relative = 1e-13
        );
    }

    #[test]
    fn log_power_constant_limit() {
        let alpha = 1.5;
        let params = LogFskParams::builder(64)
            .b_c(1e-9)
            .alpha(alpha)
            .build()
            .unwrap();
        for m in [0, 7, 63] {
            let p = log_term_power(m, &params).unwrap();
            assert_relative_eq!(p, alpha.ln().powi(2), max_relative = 1e-6);
        }
    }

    #[test]
    fn reference_log_power_is_independent_of_n() {
        // reference P sits at +0.95 dB for every N at delta = 0.1
        for n in [64, 256, 1024] {
            let p = LogFskParams::new(n).unwrap().log_power();
            assert_relative_eq!(p, 1.243_544_394_003_286_6, max_relative = 1e-12);
            assert!(10.0 * p.log10() < 1.0);
        }
    }

    #[test]
    fn worst_case_normalization_caps_every_frame() {
        let params = LogFskParams::builder(32)
            .normalization(PowerNormalization::WorstCase)
            .build()
            .unwrap();
        assert_relative_eq!(params.log_power(), worst_case_log_power(&params));
        for m in 0..32 {
            let power = modulate(m, &params).unwrap().mean_square();
            assert!(power <= params.a_bar_c().powi(2) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn mean_removal() {
        let params = LogFskParams::builder(64)
            .subtract_mean(true)
            .build()
            .unwrap();
        let x = modulate(9, &params).unwrap();
        assert!(x.mean().abs() < 1e-12);
    }

    #[test]
    fn fig1_traces_sharpen_as_delta_shrinks() {
        let n = 256;
        let peak = (2.0f64 / n as f64).sqrt();
        let minima: Vec<f64> = [1.0, 0.1, 0.01]
            .iter()
            .map(|&delta| {
                let params = LogFskParams::builder(n)
                    .b_c(1.0)
                    .alpha(peak + delta)
                    .build()
                    .unwrap();
                let x = modulate(5, &params).unwrap();
                let scaled: Vec<f64> = x.samples().iter().map(|v| v / params.a_c()).collect();
                scaled.iter().cloned().fold(f64::INFINITY, f64::min)
            })
            .collect();
        assert!(minima[0] > minima[1] && minima[1] > minima[2]);
    }

    proptest! {
        #[test]
        fn log_argument_positive(n in 2usize..128, m_frac in 0.0f64..1.0, delta in 1e-6f64..3.0) {
            let m = ((n as f64 * m_frac) as usize).min(n - 1);
            let params = LogFskParams::builder(n).delta(delta).build().unwrap();
            let tone = cosine_basis(m, n).unwrap();
            let min = tone.samples().iter().map(|c| params.b_c() * c + params.alpha()).fold(f64::INFINITY, f64::min);
            prop_assert!(min > 0.0);
        }

        #[test]
        fn extrema_follow_the_cosine(n in 4usize..128, m_frac in 0.0f64..1.0) {
            let m = ((n as f64 * m_frac) as usize).min(n - 1);
            let params = LogFskParams::new(n).unwrap();
            let x = modulate(m, &params).unwrap();
            let c = cosine_basis(m, n).unwrap();
            for i in 0..n - 1 {
                let dc = c[i + 1] - c[i];
                if dc.abs() > 1e-9 {
                    prop_assert_eq!(dc > 0.0, x[i + 1] > x[i]);
                }
            }
        }

        #[test]
        fn log_power_ignores_transmit_amplitude(a in 0.01f64..100.0, m in 0usize..64) {
            let base = LogFskParams::new(64).unwrap();
            let scaled = base.with_a_bar_c(a).unwrap();
            prop_assert_eq!(log_term_power(m, &base).unwrap(), log_term_power(m, &scaled).unwrap());
            prop_assert_eq!(base.log_power(), scaled.log_power());
        }
    }
}
