//! `logfsk` experiment driver.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use logfsk_core::experiments::config::{parse_q_interpretation, q_interpretation_name, snr_grid};
use logfsk_core::experiments::{
    emit_csv, run_nmse_comparison, run_spectrum_demo, run_theory_only, run_threshold_curves,
    Command, ConfigFile, ExperimentConfig, Table, ThresholdReport,
};
use logfsk_core::Error;

#[derive(Parser, Debug)]
#[command(
    name = "logfsk",
    version,
    about = "Log-FSK over-the-air computation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Noiseless spectra of the sum tones for two and three users.
    DemoSpectrum {
        #[command(flatten)]
        common: Common,
        /// Comma-separated message set; repeat for several cases.
        #[arg(long = "case")]
        cases: Vec<String>,
    },
    /// Destination SNR against received SNR with Monte-Carlo overlay and thresholds.
    ThresholdCurves {
        #[command(flatten)]
        common: Common,
    },
    /// NMSE of Log-FSK and DSB at equal average transmit power.
    NmseCompare {
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form curves and thresholds only.
    TheoryOnly {
        #[command(flatten)]
        common: Common,
    },
    /// Check a design against every parameter invariant.
    ValidateParams {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Samples per symbol; comma-separated for several curves.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Number of users; comma-separated for several curves.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[arg(long, allow_negative_numbers = true)]
    bc: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    snr_min_db: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    snr_max_db: Option<f64>,
    #[arg(long)]
    snr_step_db: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    gamma_th: Option<f64>,
    /// Gaussian-tail argument: `sqrt` or `linear`.
    #[arg(long)]
    q_interpretation: Option<String>,
    /// Use the literal MSE sum over all bins.
    #[arg(long)]
    literal_mse: bool,
    #[arg(long)]
    threshold_fraction: Option<f64>,
    /// Pair each trial with the negated noise of its partner.
    #[arg(long)]
    antithetic: bool,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat TOML file with experiment settings.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn resolve(&self, command: Command) -> Result<ExperimentConfig, Error> {
        let mut cfg = ExperimentConfig::for_command(command);
        if let Some(path) = &self.config {
            cfg.apply_file(&ConfigFile::load(path)?)?;
        }
        if let Some(v) = &self.n {
            cfg.n_samples = v.clone();
        }
        if let Some(v) = &self.k {
            cfg.k_users = v.clone();
        }
        if self.bc.is_some() {
            cfg.b_c = self.bc;
        }
        if let Some(v) = self.delta {
            cfg.delta = v;
        }
        if self.snr_min_db.is_some() || self.snr_max_db.is_some() || self.snr_step_db.is_some() {
            let (min, max, step) = cfg.grid_bounds();
            cfg.snr_r_grid_db = snr_grid(
                self.snr_min_db.unwrap_or(min),
                self.snr_max_db.unwrap_or(max),
                self.snr_step_db.unwrap_or(step),
            )?;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.seed {
            cfg.master_seed = v;
        }
        if let Some(v) = self.gamma_th {
            cfg.gamma_th = v;
        }
        if let Some(v) = &self.q_interpretation {
            cfg.q_interpretation = parse_q_interpretation(v)?;
        }
        cfg.literal_mse |= self.literal_mse;
        if let Some(v) = self.threshold_fraction {
            cfg.threshold_fraction = v;
        }
        cfg.antithetic |= self.antithetic;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 3,
        Error::Config(_) | Error::InvalidParams(_) | Error::InvalidArgument(_) => 2,
        _ => 1,
    }
}

fn common(sub: &Sub) -> &Common {
    match sub {
        Sub::DemoSpectrum { common, .. }
        | Sub::ThresholdCurves { common }
        | Sub::NmseCompare { common }
        | Sub::TheoryOnly { common }
        | Sub::ValidateParams { common } => common,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(threads) = common(&cli.command).threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Sub::DemoSpectrum { common, cases } => demo(common, cases),
        Sub::ThresholdCurves { common } => {
            let cfg = common.resolve(Command::ThresholdCurves)?;
            let out = run_threshold_curves(&cfg)?;
            for row in &out.rows {
                eprintln!(
                    "N={:<5} K={} SNR_R={:>6.2} dB  SNR_sum theory {:>7.2} dB  empirical {:>7.2} dB  Pe {:.3e}{}",
                    row.n,
                    row.k,
                    row.snr_r_db,
                    row.snr_sigma_theory_db,
                    row.snr_sigma_emp_db,
                    row.pe_emp,
                    if row.pe_censored { " (censored)" } else { "" }
                );
            }
            report_thresholds(&out.thresholds);
            write(&out.table(), common.out.as_deref())?;
            write_companion(&out.thresholds_table(), common.out.as_deref())
        }
        Sub::NmseCompare { common } => {
            let cfg = common.resolve(Command::NmseCompare)?;
            let out = run_nmse_comparison(&cfg)?;
            report_thresholds(std::slice::from_ref(&out.threshold));
            for row in &out.rows {
                eprintln!(
                    "SNR_R={:>6.2} dB  NMSE Log-FSK {:.3e} ({} errors)  DSB {:.3e}",
                    row.snr_r_db, row.nmse_logfsk, row.logfsk_errors, row.nmse_dsb
                );
            }
            write(&out.table(), common.out.as_deref())
        }
        Sub::TheoryOnly { common } => {
            let cfg = common.resolve(Command::TheoryOnly)?;
            let out = run_theory_only(&cfg)?;
            for (n, lo, hi, reference) in &out.log_power_range {
                eprintln!(
                    "N={n}: log-term power over messages {:.4} .. {:.4} dB, reference {:.4} dB",
                    10.0 * lo.log10(),
                    10.0 * hi.log10(),
                    10.0 * reference.log10()
                );
            }
            report_thresholds(&out.thresholds);
            write(&out.table(), common.out.as_deref())?;
            write_companion(&out.thresholds_table(), common.out.as_deref())
        }
        Sub::ValidateParams { common } => {
            let cfg = common.resolve(Command::ValidateParams)?;
            let mut failed = Vec::new();
            for &n in &cfg.n_samples {
                match cfg.params(n) {
                    Ok(p) => println!(
                        "N={n}: ok (B_c={:.6}, alpha={:.6}, P={:.6}, A_c={:.6})",
                        p.b_c(),
                        p.alpha(),
                        p.log_power(),
                        p.a_c()
                    ),
                    Err(e) => {
                        println!("N={n}: {e}");
                        failed.push(n);
                    }
                }
            }
            if failed.is_empty() {
                cfg.validate()
            } else {
                Err(Error::Config(format!("invalid design for N = {failed:?}")))
            }
        }
    }
}

fn demo(common: &Common, cases: &[String]) -> Result<(), Error> {
    let cfg = common.resolve(Command::DemoSpectrum)?;
    let n = cfg.n_samples[0];
    let params = cfg.params(n)?;
    let default_cases = cases.is_empty();
    let cases: Vec<Vec<usize>> = if default_cases {
        vec![vec![40, 60], vec![10, 35, 55]]
    } else {
        cases
            .iter()
            .map(|c| {
                c.split([',', ' '])
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<usize>()
                            .map_err(|_| Error::Config(format!("bad message `{s}`")))
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?
    };
    let demo = run_spectrum_demo(&params, &cases, cfg.threshold_fraction)?;
    for case in &demo.cases {
        eprintln!(
            "messages {:?}: top qualifying index {} (expected {}), peak {:.9}, threshold {:.6}",
            case.messages,
            case.outcome.sum_estimate,
            case.true_sum(),
            case.outcome.peak_magnitude,
            case.outcome.threshold
        );
    }
    write(&demo.table(), common.out.as_deref())?;
    demo.check()?;
    if default_cases {
        demo.check_equal_peaks()?;
    }
    Ok(())
}

fn report_thresholds(reports: &[ThresholdReport]) {
    for r in reports {
        eprintln!(
            "threshold N={} K={} Q({}): SNR_sum {:.2} dB -> SNR_R {:.2} dB (messages {:?})",
            r.n,
            r.k,
            q_interpretation_name(r.interpretation),
            r.snr_sigma_db,
            r.snr_r_db,
            r.messages
        );
    }
}

fn write(table: &Table, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => emit_csv(table, path),
        None => {
            print!("{}", table.to_csv_string()?);
            Ok(())
        }
    }
}

/// Threshold table next to the main CSV: `curves.csv` -> `curves_thresholds.csv`.
fn write_companion(table: &Table, out: Option<&Path>) -> Result<(), Error> {
    let Some(path) = out else { return Ok(()) };
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    emit_csv(
        table,
        &path.with_file_name(format!("{stem}_thresholds.csv")),
    )
}
