//! Experiment configuration: per-command defaults, a flat TOML file and
//! command-line overrides applied in that order.

use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::theory::QInterpretation;
use crate::waveform::{LogFskParams, DEFAULT_DELTA};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    DemoSpectrum,
    ThresholdCurves,
    NmseCompare,
    TheoryOnly,
    ValidateParams,
}

/// How the users' messages are chosen in each trial.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum MeasurementLaw {
    /// Each `m_k` uniform on `0..=N/K`; draws with `sum > N - 1` are redrawn.
    #[default]
    UniformSumConstrained,
    /// The same messages in every trial.
    FixedList(Vec<usize>),
}

impl FromStr for QInterpretationName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt" | "q_of_sqrt" => Ok(Self(QInterpretation::QOfSqrt)),
            "linear" | "q_of_linear" => Ok(Self(QInterpretation::QOfLinear)),
            other => Err(Error::Config(format!(
                "unknown q interpretation `{other}` (expected sqrt or linear)"
            ))),
        }
    }
}

/// Parses `sqrt`/`linear` into a [`QInterpretation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QInterpretationName(pub QInterpretation);

pub fn parse_q_interpretation(s: &str) -> Result<QInterpretation> {
    s.parse::<QInterpretationName>().map(|q| q.0)
}

pub fn q_interpretation_name(q: QInterpretation) -> &'static str {
    match q {
        QInterpretation::QOfSqrt => "sqrt",
        QInterpretation::QOfLinear => "linear",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_samples: Vec<usize>,
    pub k_users: Vec<usize>,
    /// `None` selects `sqrt(2N)` for each `N`.
    pub b_c: Option<f64>,
    pub delta: f64,
    pub snr_r_grid_db: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub gamma_th: f64,
    pub measurement_law: MeasurementLaw,
    pub q_interpretation: QInterpretation,
    pub literal_mse: bool,
    pub threshold_fraction: f64,
    pub antithetic: bool,
}

impl ExperimentConfig {
    pub fn for_command(command: Command) -> Self {
        let base = Self {
            n_samples: vec![256],
            k_users: vec![2],
            b_c: None,
            delta: DEFAULT_DELTA,
            snr_r_grid_db: snr_grid(-10.0, 20.0, 2.0).expect("static grid"),
            trials: 10_000,
            master_seed: 1,
            gamma_th: 1e-4,
            measurement_law: MeasurementLaw::UniformSumConstrained,
            q_interpretation: QInterpretation::QOfSqrt,
            literal_mse: false,
            threshold_fraction: crate::receiver::DEFAULT_THRESHOLD_FRACTION,
            antithetic: false,
        };
        match command {
            Command::ThresholdCurves | Command::TheoryOnly => Self {
                n_samples: vec![64, 256, 1024],
                k_users: vec![2, 3, 4, 5],
                snr_r_grid_db: snr_grid(-10.0, 40.0, 2.0).expect("static grid"),
                ..base
            },
            Command::DemoSpectrum => Self {
                k_users: vec![2, 3],
                ..base
            },
            Command::NmseCompare | Command::ValidateParams => base,
        }
    }

    /// Waveform parameters for frame length `n`, before any AirComp check.
    pub fn params(&self, n: usize) -> Result<LogFskParams> {
        let mut builder = LogFskParams::builder(n).delta(self.delta);
        if let Some(b_c) = self.b_c {
            builder = builder.b_c(b_c);
        }
        if let Err(violations) = builder.validate() {
            return Err(Error::InvalidParams(violations));
        }
        builder.build()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples.is_empty() || self.k_users.is_empty() {
            return Err(Error::Config(
                "n_samples and k_users must not be empty".into(),
            ));
        }
        if self.k_users.contains(&0) {
            return Err(Error::Config("k_users must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.snr_r_grid_db.is_empty() || self.snr_r_grid_db.iter().any(|v| v.is_nan()) {
            return Err(Error::Config(
                "SNR grid must be non-empty and free of NaN".into(),
            ));
        }
        if !(self.gamma_th > 0.0 && self.gamma_th < 1.0) {
            return Err(Error::Config(format!(
                "gamma_th must lie in (0, 1), got {}",
                self.gamma_th
            )));
        }
        if !(self.threshold_fraction > 0.0 && self.threshold_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "threshold_fraction must lie in (0, 1], got {}",
                self.threshold_fraction
            )));
        }
        if let MeasurementLaw::FixedList(messages) = &self.measurement_law {
            if messages.is_empty() {
                return Err(Error::Config(
                    "fixed_list needs a non-empty messages list".into(),
                ));
            }
        }
        for &n in &self.n_samples {
            self.params(n)?;
        }
        Ok(())
    }

    /// Applies the keys present in `file`, leaving the others untouched.
    pub fn apply_file(&mut self, file: &ConfigFile) -> Result<()> {
        if let Some(v) = &file.n_samples {
            self.n_samples = v.clone().into_vec();
        }
        if let Some(v) = &file.k_users {
            self.k_users = v.clone().into_vec();
        }
        if file.b_c.is_some() {
            self.b_c = file.b_c;
        }
        if let Some(v) = file.delta {
            self.delta = v;
        }
        if let Some(v) = &file.snr_r_grid_db {
            self.snr_r_grid_db = v.clone();
        }
        if file.snr_min_db.is_some() || file.snr_max_db.is_some() || file.snr_step_db.is_some() {
            let (min, max, step) = self.grid_bounds();
            self.snr_r_grid_db = snr_grid(
                file.snr_min_db.unwrap_or(min),
                file.snr_max_db.unwrap_or(max),
                file.snr_step_db.unwrap_or(step),
            )?;
        }
        if let Some(v) = file.trials {
            self.trials = v;
        }
        if let Some(v) = file.master_seed {
            self.master_seed = v;
        }
        if let Some(v) = file.gamma_th {
            self.gamma_th = v;
        }
        if let Some(v) = &file.q_interpretation {
            self.q_interpretation = parse_q_interpretation(v)?;
        }
        if let Some(v) = file.literal_mse {
            self.literal_mse = v;
        }
        if let Some(v) = file.threshold_fraction {
            self.threshold_fraction = v;
        }
        if let Some(v) = file.antithetic {
            self.antithetic = v;
        }
        match (file.measurement_law.as_deref(), &file.messages) {
            (Some("fixed_list"), Some(m)) | (None, Some(m)) => {
                self.measurement_law = MeasurementLaw::FixedList(m.clone())
            }
            (Some("fixed_list"), None) => {
                return Err(Error::Config("fixed_list needs a messages list".into()))
            }
            (Some("uniform_sum_constrained"), _) => {
                self.measurement_law = MeasurementLaw::UniformSumConstrained
            }
            (Some(other), _) => {
                return Err(Error::Config(format!("unknown measurement_law `{other}`")))
            }
            (None, None) => {}
        }
        Ok(())
    }

    /// `(min, max, step)` describing the current grid, assuming uniform spacing.
    pub fn grid_bounds(&self) -> (f64, f64, f64) {
        let g = &self.snr_r_grid_db;
        let min = g.first().copied().unwrap_or(0.0);
        let max = g.last().copied().unwrap_or(min);
        let step = if g.len() > 1 { g[1] - g[0] } else { 1.0 };
        (min, max, step)
    }
}

/// Uniform grid `min, min + step, ..., max` (inclusive within rounding).
pub fn snr_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite() && min.is_finite() && max.is_finite() && max >= min) {
        return Err(Error::Config(format!(
            "bad SNR grid: min {min}, max {max}, step {step}"
        )));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| min + step * i as f64).collect())
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

impl OneOrMany {
    pub fn into_vec(self) -> Vec<usize> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

/// Flat key-value experiment file; every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n_samples: Option<OneOrMany>,
    pub k_users: Option<OneOrMany>,
    pub b_c: Option<f64>,
    pub delta: Option<f64>,
    pub snr_r_grid_db: Option<Vec<f64>>,
    pub snr_min_db: Option<f64>,
    pub snr_max_db: Option<f64>,
    pub snr_step_db: Option<f64>,
    pub trials: Option<usize>,
    pub master_seed: Option<u64>,
    pub gamma_th: Option<f64>,
    pub measurement_law: Option<String>,
    pub messages: Option<Vec<usize>>,
    pub q_interpretation: Option<String>,
    pub literal_mse: Option<bool>,
    pub threshold_fraction: Option<f64>,
    pub antithetic: Option<bool>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}
