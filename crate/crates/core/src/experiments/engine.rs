//! Batched Monte-Carlo trials: frames become columns of one matrix so the
//! analysis step is a single matrix product per chunk.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::channel::AwgnChannel;
use crate::error::Result;
use crate::receiver::ReceiverConfig;
use crate::transform::AnalysisOperator;

const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct TrialOutcome {
    pub true_sum: usize,
    pub decision: usize,
    pub fallback: bool,
    /// Analysis output at the true sum bin.
    pub sum_bin: f64,
    /// Correlation of the trial's noise with the probe vector, if any.
    pub noise_projection: f64,
}

pub(crate) struct TrialRunner<'a> {
    pub op: &'a AnalysisOperator,
    pub cfg: &'a ReceiverConfig,
    pub channel: AwgnChannel,
    /// Pair trial `2j + 1` with the negated noise of trial `2j`.
    pub antithetic: bool,
    pub probe: Option<&'a [f64]>,
}

impl TrialRunner<'_> {
    fn noise(&self, trial: u64, out: &mut [f64]) {
        if self.antithetic && trial % 2 == 1 {
            self.channel.fill_noise(trial - 1, out);
            out.iter_mut().for_each(|v| *v = -*v);
        } else {
            self.channel.fill_noise(trial, out);
        }
    }

    /// Runs `trials` trials in trial order. `source(trial, frame)` writes the
    /// noiseless superposition of that trial and returns its true sum.
    pub fn run<F>(&self, trials: usize, source: F) -> Result<Vec<TrialOutcome>>
    where
        F: Fn(u64, &mut [f64]) -> Result<usize> + Sync,
    {
        let n = self.op.len();
        let chunks = trials.div_ceil(CHUNK);
        let per_chunk: Vec<Vec<TrialOutcome>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK;
                let width = CHUNK.min(trials - start);
                let mut frames = DMatrix::<f64>::zeros(n, width);
                let mut clean = vec![0.0; n];
                let mut noise = vec![0.0; n];
                let mut meta = Vec::with_capacity(width);
                for j in 0..width {
                    let trial = (start + j) as u64;
                    let sum = source(trial, &mut clean)?;
                    self.noise(trial, &mut noise);
                    let projection = self
                        .probe
                        .map(|p| p.iter().zip(&noise).map(|(a, b)| a * b).sum())
                        .unwrap_or(0.0);
                    for (w, x) in noise.iter_mut().zip(&clean) {
                        *w += x;
                    }
                    let column = &mut frames.as_mut_slice()[j * n..(j + 1) * n];
                    self.cfg.prepare(&noise, column)?;
                    meta.push((sum, projection));
                }
                let spectra = self.op.analyze_columns(&frames)?;
                Ok(meta
                    .into_iter()
                    .enumerate()
                    .map(|(j, (true_sum, noise_projection))| {
                        let column = &spectra.as_slice()[j * n..(j + 1) * n];
                        let (decision, fallback) = self.cfg.decide(column);
                        TrialOutcome {
                            true_sum,
                            decision,
                            fallback,
                            sum_bin: column[true_sum],
                            noise_projection,
                        }
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        Ok(per_chunk.into_iter().flatten().collect())
    }
}
