//! Multiple-access channel: synchronous superposition, AWGN and flat fading.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{trial_rng, Domain};
use crate::waveform::SampleFrame;

/// Sample-wise sum of symbol-synchronous frames.
pub fn superpose(frames: &[SampleFrame]) -> Result<SampleFrame> {
    let first = frames.first().ok_or(Error::Empty("frame list"))?;
    let mut acc = first.samples().to_vec();
    for frame in &frames[1..] {
        if frame.len() != acc.len() {
            return Err(Error::LengthMismatch {
                expected: acc.len(),
                actual: frame.len(),
            });
        }
        for (a, s) in acc.iter_mut().zip(frame.samples()) {
            *a += s;
        }
    }
    SampleFrame::new(acc)
}

/// Additive white Gaussian noise with per-sample power `sigma2`.
///
/// The noise of a trial depends only on `(rng_seed, grid_index, trial_index)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwgnChannel {
    sigma2: f64,
    rng_seed: u64,
    grid_index: u64,
}

impl AwgnChannel {
    pub fn new(sigma2: f64, rng_seed: u64) -> Result<Self> {
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise power must be finite and non-negative, got {sigma2}"
            )));
        }
        Ok(Self {
            sigma2,
            rng_seed,
            grid_index: 0,
        })
    }

    /// Channel whose per-trial streams are specific to one point of a sweep grid.
    pub fn at_grid_point(self, grid_index: u64) -> Self {
        Self { grid_index, ..self }
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn grid_index(&self) -> u64 {
        self.grid_index
    }

    /// Writes `out.len()` noise samples of trial `trial_index` into `out`.
    pub fn fill_noise(&self, trial_index: u64, out: &mut [f64]) {
        if self.sigma2 == 0.0 {
            out.iter_mut().for_each(|v| *v = 0.0);
            return;
        }
        let sigma = self.sigma2.sqrt();
        let mut rng = trial_rng(self.rng_seed, Domain::Noise, self.grid_index, trial_index);
        for v in out.iter_mut() {
            let g: f64 = StandardNormal.sample(&mut rng);
            *v = sigma * g;
        }
    }

    pub fn noise(&self, trial_index: u64, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        self.fill_noise(trial_index, &mut out);
        out
    }

    pub fn add_awgn(&self, frame: &SampleFrame, trial_index: u64) -> SampleFrame {
        let mut samples = self.noise(trial_index, frame.len());
        for (s, x) in samples.iter_mut().zip(frame.samples()) {
            *s += x;
        }
        SampleFrame::from_raw(samples)
    }
}

/// Default smallest fade magnitude that may be inverted (40 dB of amplification).
pub const DEFAULT_GAIN_FLOOR: f64 = 0.01;

/// Real flat fade between one user and the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatFadingLink {
    pub gain: f64,
    pub csi_known: bool,
    pub floor: f64,
}

impl FlatFadingLink {
    pub fn new(gain: f64, csi_known: bool) -> Self {
        Self {
            gain,
            csi_known,
            floor: DEFAULT_GAIN_FLOOR,
        }
    }

    pub fn with_floor(self, floor: f64) -> Self {
        Self { floor, ..self }
    }

    /// What the receiver sees from this user: `gain * frame`.
    pub fn apply(&self, frame: &SampleFrame) -> SampleFrame {
        frame.scaled(self.gain)
    }

    /// Transmit-side inversion so the frame arrives at its nominal level.
    pub fn precompensate(&self, frame: &SampleFrame) -> Result<SampleFrame> {
        if !self.csi_known {
            return Err(Error::CsiUnavailable);
        }
        if !self.gain.is_finite() || self.gain.abs() < self.floor || self.floor.is_nan() {
            return Err(Error::GainBelowFloor {
                gain: self.gain,
                floor: self.floor,
            });
        }
        Ok(frame.scaled(1.0 / self.gain))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frame(v: &[f64]) -> SampleFrame {
        SampleFrame::new(v.to_vec()).unwrap()
    }

    #[test]
    fn single_user_is_identity() {
        let f = frame(&[1.0, -2.0, 3.5]);
        assert_eq!(superpose(std::slice::from_ref(&f)).unwrap(), f);
    }

    #[test]
    fn additive_inverse_cancels() {
        let f = frame(&[1.0, -2.0, 3.5]);
        let sum = superpose(&[f.clone(), f.scaled(-1.0)]).unwrap();
        assert!(sum.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn superpose_errors() {
        assert!(matches!(superpose(&[]), Err(Error::Empty(_))));
        assert!(matches!(
            superpose(&[frame(&[1.0, 2.0]), frame(&[1.0])]),
            Err(Error::LengthMismatch {
                expected: 2,
                actual: 1
            })
        ));
    }

    #[test]
    fn zero_noise_is_identity() {
        let f = frame(&[0.5, 1.5]);
        let ch = AwgnChannel::new(0.0, 9).unwrap();
        assert_eq!(ch.add_awgn(&f, 4), f);
    }

    #[test]
    fn noise_is_deterministic() {
        let ch = AwgnChannel::new(2.0, 11).unwrap();
        let f = SampleFrame::zeros(64);
        assert_eq!(ch.add_awgn(&f, 5), ch.add_awgn(&f, 5));
        assert_ne!(ch.add_awgn(&f, 5), ch.add_awgn(&f, 6));
        assert_ne!(ch.add_awgn(&f, 5), ch.at_grid_point(1).add_awgn(&f, 5));
    }

    #[test]
    fn gaussian_moments() {
        let n = 100_000;
        let w = AwgnChannel::new(1.0, 2024).unwrap().noise(0, n);
        let mean = w.iter().sum::<f64>() / n as f64;
        let var = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 3.0 / (n as f64).sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "variance {var}");
    }

    #[test]
    fn negative_noise_power_rejected() {
        assert!(AwgnChannel::new(-1.0, 0).is_err());
        assert!(AwgnChannel::new(f64::NAN, 0).is_err());
    }

    #[test]
    fn precompensation_cases() {
        let f = frame(&[1.0, -3.0, 0.25]);
        assert_eq!(FlatFadingLink::new(1.0, true).precompensate(&f).unwrap(), f);
        let half = FlatFadingLink::new(0.5, true);
        let pre = half.precompensate(&f).unwrap();
        assert_eq!(pre, f.scaled(2.0));
        assert_eq!(half.apply(&pre), f);
        assert!(matches!(
            FlatFadingLink::new(0.005, true).precompensate(&f),
            Err(Error::GainBelowFloor { .. })
        ));
        assert!(matches!(
            FlatFadingLink::new(0.5, false).precompensate(&f),
            Err(Error::CsiUnavailable)
        ));
    }

    proptest! {
        #[test]
        fn superpose_is_order_free(
            frames in proptest::collection::vec(proptest::collection::vec(-100.0f64..100.0, 8), 1..6),
            rot in 0usize..6,
        ) {
            let frames: Vec<SampleFrame> = frames.into_iter().map(|v| SampleFrame::new(v).unwrap()).collect();
            let mut rotated = frames.clone();
            rotated.rotate_left(rot % frames.len());
            rotated.reverse();
            let a = superpose(&frames).unwrap();
            let b = superpose(&rotated).unwrap();
            for i in 0..8 {
                prop_assert!((a[i] - b[i]).abs() <= 1e-12 * (1.0 + a[i].abs()));
            }
        }

        #[test]
        fn fade_undoes_precompensation(
            v in proptest::collection::vec(-100.0f64..100.0, 1..32),
            gain in 0.01f64..100.0,
        ) {
            let f = SampleFrame::new(v).unwrap();
            let link = FlatFadingLink::new(gain, true);
            let back = link.apply(&link.precompensate(&f).unwrap());
            for i in 0..f.len() {
                // one rounding in the division and one in the product
                prop_assert!((back[i] - f[i]).abs() <= 4.0 * f64::EPSILON * f[i].abs());
            }
        }
    }
}
