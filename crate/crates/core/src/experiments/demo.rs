use crate::channel::superpose;
use crate::error::{Error, Result};
use crate::receiver::{demodulate, DemodOutcome, ReceiverConfig};
use crate::transform::AnalysisOperator;
use crate::waveform::{modulate, LogFskParams};

use super::table::{num, Table};

/// Noiseless reception of one message set.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoCase {
    pub messages: Vec<usize>,
    pub outcome: DemodOutcome,
}

impl DemoCase {
    pub fn true_sum(&self) -> usize {
        self.messages.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumDemo {
    pub n_samples: usize,
    pub cases: Vec<DemoCase>,
}

/// Analyzes the noiseless superposition of each message set.
pub fn run_spectrum_demo(
    params: &LogFskParams,
    cases: &[Vec<usize>],
    threshold_fraction: f64,
) -> Result<SpectrumDemo> {
    let n = params.n_samples();
    let op = AnalysisOperator::new(n)?;
    let cases = cases
        .iter()
        .map(|messages| {
            if messages.iter().sum::<usize>() >= n {
                return Err(Error::InvalidArgument(format!(
                    "messages {messages:?} sum beyond N - 1 = {}",
                    n - 1
                )));
            }
            let frames = messages
                .iter()
                .map(|&m| modulate(m, params))
                .collect::<Result<Vec<_>>>()?;
            let cfg = ReceiverConfig::with_options(
                params.clone(),
                messages.len(),
                threshold_fraction,
                true,
            )?;
            let outcome = demodulate(&superpose(&frames)?, &cfg, &op)?;
            Ok(DemoCase {
                messages: messages.clone(),
                outcome,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumDemo {
        n_samples: n,
        cases,
    })
}

impl SpectrumDemo {
    /// `index` column followed by one coefficient column per case.
    pub fn table(&self) -> Table {
        let names: Vec<String> = self
            .cases
            .iter()
            .map(|c| {
                let joined: Vec<String> = c.messages.iter().map(|m| m.to_string()).collect();
                format!("d_{}", joined.join("_"))
            })
            .collect();
        let mut header = vec!["index"];
        header.extend(names.iter().map(String::as_str));
        let mut table = Table::new(&header);
        for i in 0..self.n_samples {
            let mut row = vec![i.to_string()];
            row.extend(self.cases.iter().map(|c| num(c.outcome.coefficients[i])));
            table.push(row);
        }
        table
    }

    /// Every case detects its own sum above threshold.
    pub fn check(&self) -> Result<()> {
        for case in &self.cases {
            let o = &case.outcome;
            if o.sum_estimate != case.true_sum() || o.below_threshold_fallback {
                return Err(Error::CheckFailed(format!(
                    "messages {:?}: detected {} (fallback {}), expected {}",
                    case.messages,
                    o.sum_estimate,
                    o.below_threshold_fallback,
                    case.true_sum()
                )));
            }
        }
        Ok(())
    }

    /// All cases share the same peak magnitude, as they do when no other
    /// intermodulation product lands on the sum bin.
    pub fn check_equal_peaks(&self) -> Result<()> {
        if let Some(first) = self.cases.first() {
            let reference = first.outcome.peak_magnitude;
            for case in &self.cases[1..] {
                let rel = (case.outcome.peak_magnitude - reference).abs() / reference;
                if rel >= 1e-6 {
                    return Err(Error::CheckFailed(format!(
                        "peak {} of {:?} differs from {} of {:?} (relative {rel:.3e})",
                        case.outcome.peak_magnitude, case.messages, reference, first.messages
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_and_three_users() {
        let params = LogFskParams::new(256).unwrap();
        let demo = run_spectrum_demo(&params, &[vec![40, 60], vec![10, 35, 55]], 0.7).unwrap();
        demo.check().unwrap();
        demo.check_equal_peaks().unwrap();
        let two = &demo.cases[0].outcome.coefficients;
        // product expansion: B_c^2 c40 c60 + alpha B_c (c40 + c60) + alpha^2
        let (b, a) = (params.b_c(), params.alpha());
        let a_sum = b * b / 2.0 * (2.0f64 / 256.0).sqrt();
        assert_relative_eq!(two[100], a_sum, max_relative = 1e-9);
        assert_relative_eq!(two[20], a_sum, max_relative = 1e-9);
        assert_relative_eq!(two[40], a * b, max_relative = 1e-9);
        assert_relative_eq!(two[60], a * b, max_relative = 1e-9);
        for (i, v) in two.iter().enumerate() {
            if ![20, 40, 60, 100].contains(&i) {
                assert!(v.abs() < 1e-9, "bin {i}: {v}");
            }
        }
        assert_eq!(demo.table().rows.len(), 256);
        assert_eq!(demo.table().header, vec!["index", "d_40_60", "d_10_35_55"]);
    }

    #[test]
    fn zero_messages_peak_at_zero() {
        let params = LogFskParams::new(256).unwrap();
        let demo = run_spectrum_demo(&params, &[vec![0, 0]], 0.7).unwrap();
        assert_eq!(demo.cases[0].outcome.sum_estimate, 0);
        demo.check().unwrap();
    }

    #[test]
    fn unequal_peaks_fail_the_check() {
        let params = LogFskParams::new(64).unwrap();
        let mut demo = run_spectrum_demo(&params, &[vec![3, 5], vec![1, 2, 4]], 0.7).unwrap();
        demo.check().unwrap();
        demo.cases[1].outcome.peak_magnitude *= 1.01;
        assert!(matches!(
            demo.check_equal_peaks(),
            Err(Error::CheckFailed(_))
        ));
    }
}
