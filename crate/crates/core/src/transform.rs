//! Analysis filter bank and maximum-frequency detection.
//!
//! The analysis operator `Q` is the exact inverse of the synthesis matrix `C`
//! whose column `m` is the alphabet tone `cos_m`, so analyzing `cos_m` returns
//! the unit vector `e_m` on either cosine grid.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::waveform::{cosine_basis_on, CosineGrid, SampleFrame};

/// Coefficients `d = Q r` of a frame in the alphabet basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    coefficients: Vec<f64>,
}

impl Spectrum {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if let Some(index) = coefficients.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { coefficients })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coefficients
    }

    pub fn detect_max_frequency(&self, threshold: f64) -> Result<Detection> {
        detect_max_frequency(&self.coefficients, threshold)
    }
}

impl std::ops::Index<usize> for Spectrum {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.coefficients[index]
    }
}

/// Dense synthesis/analysis pair for one frame length and grid.
#[derive(Debug, Clone)]
pub struct AnalysisOperator {
    n_samples: usize,
    grid: CosineGrid,
    analysis: DMatrix<f64>,
    synthesis: DMatrix<f64>,
}

impl AnalysisOperator {
    /// Operator for the default half-sample-time grid used by the modem.
    pub fn new(n_samples: usize) -> Result<Self> {
        Self::on_grid(CosineGrid::default(), n_samples)
    }

    pub fn on_grid(grid: CosineGrid, n_samples: usize) -> Result<Self> {
        if n_samples < 2 {
            return Err(Error::InvalidArgument(format!(
                "analysis needs at least 2 samples, got {n_samples}"
            )));
        }
        let mut synthesis = DMatrix::zeros(n_samples, n_samples);
        for m in 0..n_samples {
            let tone = cosine_basis_on(grid, m, n_samples)?;
            synthesis.set_column(m, &DVector::from_column_slice(tone.samples()));
        }
        let analysis = synthesis
            .clone()
            .try_inverse()
            .ok_or(Error::SingularBasis { n: n_samples })?;
        Ok(Self {
            n_samples,
            grid,
            analysis,
            synthesis,
        })
    }

    pub fn len(&self) -> usize {
        self.n_samples
    }

    pub fn is_empty(&self) -> bool {
        self.n_samples == 0
    }

    pub fn grid(&self) -> CosineGrid {
        self.grid
    }

    /// `Q`; row `i` is the analysis filter for frequency index `i`.
    pub fn analysis_matrix(&self) -> &DMatrix<f64> {
        &self.analysis
    }

    /// `C`; column `m` is `cos_m`.
    pub fn synthesis_matrix(&self) -> &DMatrix<f64> {
        &self.synthesis
    }

    fn check_len(&self, actual: usize) -> Result<()> {
        if actual != self.n_samples {
            Err(Error::LengthMismatch {
                expected: self.n_samples,
                actual,
            })
        } else {
            Ok(())
        }
    }

    pub fn analyze(&self, frame: &SampleFrame) -> Result<Spectrum> {
        self.check_len(frame.len())?;
        let d = &self.analysis * DVector::from_column_slice(frame.samples());
        Spectrum::new(d.as_slice().to_vec())
    }

    /// Analyzes every column of `frames` (one frame per column) in a single product.
    pub fn analyze_columns(&self, frames: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_len(frames.nrows())?;
        Ok(&self.analysis * frames)
    }

    pub fn synthesize(&self, spectrum: &Spectrum) -> Result<SampleFrame> {
        self.check_len(spectrum.len())?;
        let r = &self.synthesis * DVector::from_column_slice(spectrum.coefficients());
        SampleFrame::new(r.as_slice().to_vec())
    }

    /// `max |Q C - I|` over all entries.
    pub fn inverse_residual(&self) -> f64 {
        let product = &self.analysis * &self.synthesis;
        let mut worst = 0.0f64;
        for i in 0..self.n_samples {
            for j in 0..self.n_samples {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((product[(i, j)] - target).abs());
            }
        }
        worst
    }
}

/// Result of thresholded maximum-frequency detection.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub index: usize,
    /// Indices with `|d[i]| >= threshold`, ascending.
    pub candidates: Vec<usize>,
    pub magnitude: f64,
    /// No coefficient reached the threshold; `index` is the largest-magnitude bin instead.
    pub below_threshold_fallback: bool,
}

/// Largest index whose coefficient magnitude reaches `threshold`.
///
/// Falls back to the arg-max of `|d|` (lowest index on ties) when nothing qualifies.
pub fn detect_max_frequency(coefficients: &[f64], threshold: f64) -> Result<Detection> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "detection threshold must be finite and positive, got {threshold}"
        )));
    }
    if coefficients.is_empty() {
        return Err(Error::Empty("spectrum"));
    }
    let candidates: Vec<usize> = coefficients
        .iter()
        .enumerate()
        .filter(|(_, c)| c.abs() >= threshold)
        .map(|(i, _)| i)
        .collect();
    match candidates.last() {
        Some(&index) => Ok(Detection {
            index,
            magnitude: coefficients[index].abs(),
            candidates,
            below_threshold_fallback: false,
        }),
        None => {
            let mut index = 0;
            for (i, c) in coefficients.iter().enumerate() {
                if c.abs() > coefficients[index].abs() {
                    index = i;
                }
            }
            Ok(Detection {
                index,
                magnitude: coefficients[index].abs(),
                candidates,
                below_threshold_fallback: true,
            })
        }
    }
}

/// Index-only variant of [`detect_max_frequency`] for hot loops: returns
/// `(index, fallback)` without collecting the candidate set.
pub(crate) fn top_index(coefficients: &[f64], threshold: f64) -> (usize, bool) {
    match coefficients.iter().rposition(|c| c.abs() >= threshold) {
        Some(i) => (i, false),
        None => {
            let mut index = 0;
            for (i, c) in coefficients.iter().enumerate() {
                if c.abs() > coefficients[index].abs() {
                    index = i;
                }
            }
            (index, true)
        }
    }
}
