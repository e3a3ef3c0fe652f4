//! Seeded experiments: spectrum demo, destination-SNR curves with threshold
//! report, NMSE comparison against DSB, and closed-form curves.
//!
//! Every trial draws its messages and noise from streams keyed by
//! `(master_seed, grid point, trial)`, and results are aggregated in trial
//! order, so outputs do not depend on the number of worker threads.

pub mod config;
mod demo;
mod engine;
mod sweep;
pub mod table;

pub use config::{Command, ConfigFile, ExperimentConfig, MeasurementLaw};
pub use demo::{run_spectrum_demo, DemoCase, SpectrumDemo};
pub use sweep::{
    error_rate_sweep, noise_statistics, run_nmse_comparison, run_theory_only, run_threshold_curves,
    ErrorRatePoint, NmseResult, NmseRow, NoiseStatistics, TheoryCurves, TheoryRow, ThresholdCurves,
    ThresholdReport, ThresholdRow,
};
pub use table::{emit_csv, read_csv, Table};
