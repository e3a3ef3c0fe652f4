use std::time::Instant;

use rand::Rng;

use crate::channel::{superpose, AwgnChannel};
use crate::dsb::DsbConfig;
use crate::error::{Error, Result};
use crate::receiver::{measure_destination_snr, ReceiverConfig, MIN_SNR_TRIALS};
use crate::rng::{trial_rng, Domain};
use crate::theory::{
    self, a_sigma, destination_snr, error_prob, from_db, lognormal_stats, p_p, reference_messages,
    threshold_snr_r, to_db, QInterpretation,
};
use crate::transform::AnalysisOperator;
use crate::waveform::{log_term_power, modulate, LogFskParams, SampleFrame};

use super::config::{q_interpretation_name, ExperimentConfig, MeasurementLaw};
use super::engine::{TrialOutcome, TrialRunner};
use super::table::{num, Table};

/// Error counts below this are reported as censored.
pub const CENSOR_COUNT: usize = 10;

fn noise_power(params: &LogFskParams, snr_r_db: f64) -> f64 {
    if snr_r_db == f64::INFINITY {
        0.0
    } else {
        params.a_bar_c().powi(2) / from_db(snr_r_db)
    }
}

/// Grid-point key for the noise streams: curve in the high half, point in the low half.
fn grid_key(curve: usize, point: usize) -> u64 {
    ((curve as u64) << 32) | point as u64
}

fn clean_superposition(params: &LogFskParams, messages: &[usize]) -> Result<SampleFrame> {
    let frames = messages
        .iter()
        .map(|&m| modulate(m, params))
        .collect::<Result<Vec<_>>>()?;
    superpose(&frames)
}

fn check_sum(messages: &[usize], n: usize) -> Result<usize> {
    let sum: usize = messages.iter().sum();
    if sum >= n {
        return Err(Error::Config(format!(
            "messages {messages:?} sum to {sum}, beyond N - 1 = {}",
            n - 1
        )));
    }
    Ok(sum)
}

/// Noiseless analysis output at the sum bin.
fn noiseless_sum_bin(
    params: &LogFskParams,
    cfg: &ReceiverConfig,
    op: &AnalysisOperator,
    messages: &[usize],
) -> Result<f64> {
    let clean = clean_superposition(params, messages)?;
    let out = crate::receiver::demodulate(&clean, cfg, op)?;
    Ok(out.coefficients[messages.iter().sum::<usize>()])
}

fn draw_messages(seed: u64, trial: u64, n: usize, k: usize, out: &mut Vec<usize>) {
    let mut rng = trial_rng(seed, Domain::Messages, 0, trial);
    let top = n / k;
    loop {
        out.clear();
        out.extend((0..k).map(|_| rng.random_range(0..=top)));
        if out.iter().sum::<usize>() < n {
            return;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub snr_r_db: f64,
    pub n: usize,
    pub k: usize,
    pub snr_sigma_theory_db: f64,
    /// NaN when fewer trials than the SNR estimator needs.
    pub snr_sigma_emp_db: f64,
    pub pe_theory: f64,
    pub pe_emp: f64,
    pub pe_censored: bool,
    pub mse_theory: f64,
    pub fallback_rate: f64,
    pub trials: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    pub n: usize,
    pub k: usize,
    pub interpretation: QInterpretation,
    pub snr_sigma_db: f64,
    pub snr_r_db: f64,
    pub messages: Vec<usize>,
    pub p_p: f64,
    pub log_power: f64,
}

impl ThresholdReport {
    fn solve(params: &LogFskParams, k: usize, gamma_th: f64, q: QInterpretation) -> Result<Self> {
        let th = threshold_snr_r(params, k, gamma_th, q)?;
        Ok(Self {
            n: params.n_samples(),
            k,
            interpretation: q,
            snr_sigma_db: th.snr_sigma_db,
            snr_r_db: th.snr_r_db,
            messages: th.messages,
            p_p: th.p_p,
            log_power: params.log_power(),
        })
    }
}

fn thresholds_table(reports: &[ThresholdReport]) -> Table {
    let mut t = Table::new(&[
        "n",
        "k",
        "q_interpretation",
        "snr_sigma_threshold_db",
        "snr_r_threshold_db",
        "p_p",
        "p",
    ]);
    for r in reports {
        t.push(vec![
            r.n.to_string(),
            r.k.to_string(),
            q_interpretation_name(r.interpretation).to_string(),
            num(r.snr_sigma_db),
            num(r.snr_r_db),
            num(r.p_p),
            num(r.log_power),
        ]);
    }
    t
}

fn both_thresholds(params: &LogFskParams, k: usize, gamma_th: f64) -> Result<Vec<ThresholdReport>> {
    [QInterpretation::QOfSqrt, QInterpretation::QOfLinear]
        .into_iter()
        .map(|q| ThresholdReport::solve(params, k, gamma_th, q))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCurves {
    pub rows: Vec<ThresholdRow>,
    pub thresholds: Vec<ThresholdReport>,
}

impl ThresholdCurves {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "snr_r_db",
            "n",
            "k",
            "snr_sigma_theory_db",
            "snr_sigma_emp_db",
            "pe_theory",
            "pe_emp",
            "pe_censored",
            "mse_theory",
            "fallback_rate",
            "trials",
        ]);
        for r in &self.rows {
            t.push(vec![
                num(r.snr_r_db),
                r.n.to_string(),
                r.k.to_string(),
                num(r.snr_sigma_theory_db),
                num(r.snr_sigma_emp_db),
                num(r.pe_theory),
                num(r.pe_emp),
                r.pe_censored.to_string(),
                num(r.mse_theory),
                num(r.fallback_rate),
                r.trials.to_string(),
            ]);
        }
        t
    }

    pub fn thresholds_table(&self) -> Table {
        thresholds_table(&self.thresholds)
    }
}

/// Closed-form destination SNR for every requested `(N, K)` with a Monte-Carlo
/// overlay on a fixed message set, plus the solved thresholds.
pub fn run_threshold_curves(cfg: &ExperimentConfig) -> Result<ThresholdCurves> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut thresholds = Vec::new();
    let mut curve = 0;
    for &n in &cfg.n_samples {
        let params = cfg.params(n)?;
        let op = AnalysisOperator::new(n)?;
        for &k in &cfg.k_users {
            let messages = match &cfg.measurement_law {
                MeasurementLaw::FixedList(m) if m.len() == k => m.clone(),
                _ => reference_messages(n, k),
            };
            let sum = check_sum(&messages, n)?;
            let rcfg =
                ReceiverConfig::with_options(params.clone(), k, cfg.threshold_fraction, true)?;
            let pp = p_p(&params, &messages)?;
            let amplitude = noiseless_sum_bin(&params, &rcfg, &op, &messages)?;
            let clean = clean_superposition(&params, &messages)?;
            thresholds.extend(both_thresholds(&params, k, cfg.gamma_th)?);
            for (point, &snr_r_db) in cfg.snr_r_grid_db.iter().enumerate() {
                let start = Instant::now();
                let snr = destination_snr(&params, &messages, pp, from_db(snr_r_db));
                let pe_theory = error_prob(n, snr, cfg.q_interpretation);
                let mse_theory = if cfg.literal_mse {
                    theory::mse_literal(n, pe_theory, sum)
                } else {
                    theory::mse(n, pe_theory, sum)
                };
                let runner = TrialRunner {
                    op: &op,
                    cfg: &rcfg,
                    channel: AwgnChannel::new(noise_power(&params, snr_r_db), cfg.master_seed)?
                        .at_grid_point(grid_key(curve, point)),
                    antithetic: cfg.antithetic,
                    probe: None,
                };
                let outcomes = runner.run(cfg.trials, |_, out| {
                    out.copy_from_slice(clean.samples());
                    Ok(sum)
                })?;
                let errors = outcomes.iter().filter(|o| o.decision != o.true_sum).count();
                let fallbacks = outcomes.iter().filter(|o| o.fallback).count();
                let sum_bin: Vec<f64> = outcomes.iter().map(|o| o.sum_bin).collect();
                let snr_emp = if cfg.trials >= MIN_SNR_TRIALS {
                    to_db(measure_destination_snr(&sum_bin, amplitude)?)
                } else {
                    f64::NAN
                };
                rows.push(ThresholdRow {
                    snr_r_db,
                    n,
                    k,
                    snr_sigma_theory_db: to_db(snr),
                    snr_sigma_emp_db: snr_emp,
                    pe_theory,
                    pe_emp: errors as f64 / cfg.trials as f64,
                    pe_censored: errors < CENSOR_COUNT,
                    mse_theory,
                    fallback_rate: fallbacks as f64 / cfg.trials as f64,
                    trials: cfg.trials,
                    wall_time_s: start.elapsed().as_secs_f64(),
                });
            }
            curve += 1;
        }
    }
    Ok(ThresholdCurves { rows, thresholds })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmseRow {
    pub snr_r_db: f64,
    pub nmse_logfsk: f64,
    pub nmse_dsb: f64,
    pub trials: usize,
    pub seed: u64,
    pub logfsk_errors: usize,
    pub fallback_rate: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmseResult {
    pub n: usize,
    pub k: usize,
    pub rows: Vec<NmseRow>,
    /// Solved threshold under the configured interpretation.
    pub threshold: ThresholdReport,
    pub dsb: DsbConfig,
    /// Average Log-FSK transmit power per user over the message law.
    pub logfsk_power: f64,
}

impl NmseResult {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["snr_r_db", "nmse_logfsk", "nmse_dsb", "trials", "seed"]);
        for r in &self.rows {
            t.push(vec![
                num(r.snr_r_db),
                num(r.nmse_logfsk),
                num(r.nmse_dsb),
                r.trials.to_string(),
                r.seed.to_string(),
            ]);
        }
        t
    }
}

/// Log-FSK against DSB at equal average transmit power. Both chains see the
/// same messages and the same noise realization in every trial.
pub fn run_nmse_comparison(cfg: &ExperimentConfig) -> Result<NmseResult> {
    cfg.validate()?;
    let n = cfg.n_samples[0];
    let k = cfg.k_users[0];
    let params = cfg.params(n)?;
    let op = AnalysisOperator::new(n)?;
    let rcfg = ReceiverConfig::with_options(params.clone(), k, cfg.threshold_fraction, true)?;
    let tones = (0..n)
        .map(|m| modulate(m, &params))
        .collect::<Result<Vec<_>>>()?;

    // per-user power of both schemes averaged over the message law
    let support: Vec<usize> = match &cfg.measurement_law {
        MeasurementLaw::UniformSumConstrained => (0..=n / k).collect(),
        MeasurementLaw::FixedList(m) => {
            check_sum(m, n)?;
            if m.len() != k {
                return Err(Error::Config(format!(
                    "fixed messages {m:?} do not match k_users = {k}"
                )));
            }
            m.clone()
        }
    };
    let count = support.len() as f64;
    let logfsk_power = support.iter().map(|&m| tones[m].mean_square()).sum::<f64>() / count;
    let m_mean_square = support.iter().map(|&m| (m as f64).powi(2)).sum::<f64>() / count;
    let m_max = (n / k) as f64;
    let dsb = DsbConfig::with_mean_square(n, m_max, logfsk_power, m_mean_square)?;
    let carrier = dsb.carrier()?;
    let dsb_scale = 1.0 / (n as f64 * dsb.gain);

    let threshold = ThresholdReport::solve(&params, k, cfg.gamma_th, cfg.q_interpretation)?;
    let mut rows = Vec::with_capacity(cfg.snr_r_grid_db.len());
    for (point, &snr_r_db) in cfg.snr_r_grid_db.iter().enumerate() {
        let start = Instant::now();
        let runner = TrialRunner {
            op: &op,
            cfg: &rcfg,
            channel: AwgnChannel::new(noise_power(&params, snr_r_db), cfg.master_seed)?
                .at_grid_point(grid_key(0, point)),
            antithetic: cfg.antithetic,
            probe: Some(carrier.samples()),
        };
        let outcomes: Vec<TrialOutcome> = runner.run(cfg.trials, |trial, out| {
            let mut messages = Vec::with_capacity(k);
            match &cfg.measurement_law {
                MeasurementLaw::UniformSumConstrained => {
                    draw_messages(cfg.master_seed, trial, n, k, &mut messages)
                }
                MeasurementLaw::FixedList(m) => messages.extend_from_slice(m),
            }
            out.iter_mut().for_each(|v| *v = 0.0);
            for &m in &messages {
                for (o, x) in out.iter_mut().zip(tones[m].samples()) {
                    *o += x;
                }
            }
            Ok(messages.iter().sum())
        })?;
        let mut power = 0.0;
        let mut logfsk_se = 0.0;
        let mut dsb_se = 0.0;
        let mut errors = 0;
        let mut fallbacks = 0;
        for o in &outcomes {
            power += (o.true_sum as f64).powi(2);
            let e = o.decision as f64 - o.true_sum as f64;
            logfsk_se += e * e;
            dsb_se += (o.noise_projection * dsb_scale).powi(2);
            errors += usize::from(o.decision != o.true_sum);
            fallbacks += usize::from(o.fallback);
        }
        rows.push(NmseRow {
            snr_r_db,
            nmse_logfsk: logfsk_se / power,
            nmse_dsb: dsb_se / power,
            trials: cfg.trials,
            seed: cfg.master_seed,
            logfsk_errors: errors,
            fallback_rate: fallbacks as f64 / cfg.trials as f64,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
    }
    Ok(NmseResult {
        n,
        k,
        rows,
        threshold,
        dsb,
        logfsk_power,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryRow {
    pub snr_r_db: f64,
    pub n: usize,
    pub k: usize,
    pub snr_sigma_theory_db: f64,
    /// Straight-line high-SNR approximation.
    pub snr_sigma_high_snr_db: f64,
    pub pe_theory: f64,
    pub mse_theory: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryCurves {
    pub rows: Vec<TheoryRow>,
    pub thresholds: Vec<ThresholdReport>,
    /// `(N, min_m P, max_m P, reference P)`: how much `P` moves with the message.
    pub log_power_range: Vec<(usize, f64, f64, f64)>,
}

impl TheoryCurves {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "snr_r_db",
            "n",
            "k",
            "snr_sigma_theory_db",
            "snr_sigma_high_snr_db",
            "pe_theory",
            "mse_theory",
        ]);
        for r in &self.rows {
            t.push(vec![
                num(r.snr_r_db),
                r.n.to_string(),
                r.k.to_string(),
                num(r.snr_sigma_theory_db),
                num(r.snr_sigma_high_snr_db),
                num(r.pe_theory),
                num(r.mse_theory),
            ]);
        }
        t
    }

    pub fn thresholds_table(&self) -> Table {
        thresholds_table(&self.thresholds)
    }
}

/// Closed-form curves and thresholds without any simulation.
pub fn run_theory_only(cfg: &ExperimentConfig) -> Result<TheoryCurves> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut thresholds = Vec::new();
    let mut log_power_range = Vec::new();
    for &n in &cfg.n_samples {
        let params = cfg.params(n)?;
        let powers = (0..n)
            .map(|m| log_term_power(m, &params))
            .collect::<Result<Vec<_>>>()?;
        log_power_range.push((
            n,
            powers.iter().cloned().fold(f64::INFINITY, f64::min),
            powers.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            params.log_power(),
        ));
        for &k in &cfg.k_users {
            let messages = reference_messages(n, k);
            let sum = check_sum(&messages, n)?;
            let pp = p_p(&params, &messages)?;
            let amp = a_sigma(k, params.b_c(), n);
            thresholds.extend(both_thresholds(&params, k, cfg.gamma_th)?);
            for &snr_r_db in &cfg.snr_r_grid_db {
                let snr = destination_snr(&params, &messages, pp, from_db(snr_r_db));
                let pe = error_prob(n, snr, cfg.q_interpretation);
                rows.push(TheoryRow {
                    snr_r_db,
                    n,
                    k,
                    snr_sigma_theory_db: to_db(snr),
                    snr_sigma_high_snr_db: to_db(amp * amp) + snr_r_db
                        - to_db(pp)
                        - to_db(params.log_power()),
                    pe_theory: pe,
                    mse_theory: if cfg.literal_mse {
                        theory::mse_literal(n, pe, sum)
                    } else {
                        theory::mse(n, pe, sum)
                    },
                });
            }
        }
    }
    Ok(TheoryCurves {
        rows,
        thresholds,
        log_power_range,
    })
}

/// Sample moments of the sum-bin coefficient against the log-normal model.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseStatistics {
    pub trials: usize,
    pub sum_amplitude: f64,
    /// Empirical mean of `d[sum] - A_sum`.
    pub mean_offset: f64,
    /// Model `A_sum (mu_z - 1)`.
    pub expected_mean_offset: f64,
    /// Standard error of `mean_offset` over independent draws (pairs when antithetic).
    pub mean_offset_std_error: f64,
    pub variance: f64,
    /// Model `sigma_z^2 P_p`.
    pub expected_variance: f64,
}

/// Moments of the sum bin for fixed `messages` at `snr_r_db`.
///
/// With `antithetic`, trials come in `(w, -w)` pairs: the marginal law of each
/// trial is unchanged while the part of the mean estimate that is linear in
/// the noise cancels within each pair.
pub fn noise_statistics(
    params: &LogFskParams,
    messages: &[usize],
    snr_r_db: f64,
    trials: usize,
    seed: u64,
    antithetic: bool,
) -> Result<NoiseStatistics> {
    if trials < 2 || (antithetic && trials % 2 == 1) {
        return Err(Error::InvalidArgument(format!(
            "need an even number of at least 2 trials, got {trials}"
        )));
    }
    let n = params.n_samples();
    let k = messages.len();
    let sum = check_sum(messages, n)?;
    let op = AnalysisOperator::new(n)?;
    let rcfg = ReceiverConfig::new(params.clone(), k)?;
    let clean = clean_superposition(params, messages)?;
    let sigma2 = noise_power(params, snr_r_db);
    let runner = TrialRunner {
        op: &op,
        cfg: &rcfg,
        channel: AwgnChannel::new(sigma2, seed)?,
        antithetic,
        probe: None,
    };
    let outcomes = runner.run(trials, |_, out| {
        out.copy_from_slice(clean.samples());
        Ok(sum)
    })?;
    let amp = a_sigma(k, params.b_c(), n);
    let d: Vec<f64> = outcomes.iter().map(|o| o.sum_bin - amp).collect();
    let count = d.len() as f64;
    let mean = d.iter().sum::<f64>() / count;
    let variance = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
    let units: Vec<f64> = if antithetic {
        d.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
    } else {
        d.clone()
    };
    let u = units.len() as f64;
    let unit_var = units.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (u - 1.0);
    let stats = lognormal_stats(sigma2, params.a_c());
    Ok(NoiseStatistics {
        trials,
        sum_amplitude: amp,
        mean_offset: mean,
        expected_mean_offset: amp * (stats.mu_z - 1.0),
        mean_offset_std_error: (unit_var / u).sqrt(),
        variance,
        expected_variance: stats.sigma2_z * p_p(params, messages)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRatePoint {
    pub snr_r_db: f64,
    pub errors: usize,
    pub fallbacks: usize,
    pub trials: usize,
}

impl ErrorRatePoint {
    pub fn rate(&self) -> f64 {
        self.errors as f64 / self.trials as f64
    }
}

/// Detection error counts for fixed `messages` over an SNR grid.
pub fn error_rate_sweep(
    cfg: &ReceiverConfig,
    messages: &[usize],
    grid_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<ErrorRatePoint>> {
    let params = cfg.params();
    let n = params.n_samples();
    let sum = check_sum(messages, n)?;
    let op = AnalysisOperator::new(n)?;
    let clean = clean_superposition(params, messages)?;
    grid_db
        .iter()
        .enumerate()
        .map(|(point, &snr_r_db)| {
            let runner = TrialRunner {
                op: &op,
                cfg,
                channel: AwgnChannel::new(noise_power(params, snr_r_db), seed)?
                    .at_grid_point(grid_key(0, point)),
                antithetic: false,
                probe: None,
            };
            let outcomes = runner.run(trials, |_, out| {
                out.copy_from_slice(clean.samples());
                Ok(sum)
            })?;
            Ok(ErrorRatePoint {
                snr_r_db,
                errors: outcomes.iter().filter(|o| o.decision != sum).count(),
                fallbacks: outcomes.iter().filter(|o| o.fallback).count(),
                trials,
            })
        })
        .collect()
}
