//! Linear AirComp baseline: measurement carried in the amplitude of a fixed
//! carrier, sum recovered with a matched filter.

use crate::error::{Error, Result};
use crate::waveform::{cosine_basis, SampleFrame};

#[derive(Debug, Clone, PartialEq)]
pub struct DsbConfig {
    pub n_samples: usize,
    /// Largest measurement a user may send.
    pub m_max: f64,
    /// Amplitude per unit of measurement.
    pub gain: f64,
    pub carrier_index: usize,
}

impl DsbConfig {
    /// Gain chosen so that `E[(g m)^2] = a_bar_c^2` for `m ~ Uniform[0, m_max]`.
    pub fn new(n_samples: usize, m_max: f64, a_bar_c: f64) -> Result<Self> {
        Self::with_mean_square(n_samples, m_max, a_bar_c * a_bar_c, m_max * m_max / 3.0)
    }

    /// Gain that gives average transmit power `target_power` when the
    /// measurement has second moment `measurement_mean_square`.
    pub fn with_mean_square(
        n_samples: usize,
        m_max: f64,
        target_power: f64,
        measurement_mean_square: f64,
    ) -> Result<Self> {
        if n_samples < 2 {
            return Err(Error::InvalidArgument(format!(
                "carrier needs at least 2 samples, got {n_samples}"
            )));
        }
        if !(m_max > 0.0 && m_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "m_max must be positive, got {m_max}"
            )));
        }
        let gain = (target_power / measurement_mean_square).sqrt();
        if !(gain > 0.0 && gain.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "degenerate DSB gain from power {target_power} and second moment {measurement_mean_square}"
            )));
        }
        Ok(Self {
            n_samples,
            m_max,
            gain,
            carrier_index: n_samples / 4,
        })
    }

    /// Unit-power carrier, `sqrt(N) * cos_c[n]`.
    pub fn carrier(&self) -> Result<SampleFrame> {
        let scale = (self.n_samples as f64).sqrt();
        Ok(cosine_basis(self.carrier_index, self.n_samples)?.scaled(scale))
    }
}

pub fn dsb_transmit(m: f64, cfg: &DsbConfig) -> Result<SampleFrame> {
    if !(0.0..=cfg.m_max).contains(&m) {
        return Err(Error::MeasurementOutOfRange {
            value: m,
            max: cfg.m_max,
        });
    }
    Ok(cfg.carrier()?.scaled(cfg.gain * m))
}

/// Matched-filter estimate of the sum of the transmitted measurements.
pub fn dsb_estimate_sum(y: &SampleFrame, cfg: &DsbConfig) -> Result<f64> {
    if y.len() != cfg.n_samples {
        return Err(Error::LengthMismatch {
            expected: cfg.n_samples,
            actual: y.len(),
        });
    }
    let carrier = cfg.carrier()?;
    Ok(correlate(y.samples(), carrier.samples()) / (cfg.n_samples as f64 * cfg.gain))
}

pub(crate) fn correlate(y: &[f64], carrier: &[f64]) -> f64 {
    y.iter().zip(carrier).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{superpose, AwgnChannel};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn carrier_has_unit_power() {
        let cfg = DsbConfig::new(256, 128.0, 1.0).unwrap();
        assert_relative_eq!(
            cfg.carrier().unwrap().mean_square(),
            1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn zero_and_full_scale() {
        let cfg = DsbConfig::new(64, 32.0, 1.0).unwrap();
        assert!(dsb_transmit(0.0, &cfg)
            .unwrap()
            .samples()
            .iter()
            .all(|&v| v == 0.0));
        let p = dsb_transmit(32.0, &cfg).unwrap().mean_square();
        assert_relative_eq!(p, (cfg.gain * 32.0).powi(2), max_relative = 1e-12);
        assert!(matches!(
            dsb_transmit(33.0, &cfg),
            Err(Error::MeasurementOutOfRange { .. })
        ));
        assert!(dsb_transmit(-1.0, &cfg).is_err());
    }

    #[test]
    fn average_power_matches_target() {
        let cfg = DsbConfig::new(256, 128.0, 1.3).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let draws = 100_000;
        let mean_power = (0..draws)
            .map(|_| (cfg.gain * rng.random_range(0.0..=128.0f64)).powi(2))
            .sum::<f64>()
            / draws as f64;
        assert!((mean_power / 1.69 - 1.0).abs() < 0.01, "{mean_power}");
    }

    #[test]
    fn noiseless_sum() {
        let cfg = DsbConfig::new(64, 32.0, 1.0).unwrap();
        let y = superpose(&[
            dsb_transmit(3.0, &cfg).unwrap(),
            dsb_transmit(4.5, &cfg).unwrap(),
        ])
        .unwrap();
        assert_relative_eq!(
            dsb_estimate_sum(&y, &cfg).unwrap(),
            7.5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn unbiased_in_noise() {
        let cfg = DsbConfig::new(64, 32.0, 1.0).unwrap();
        let x = superpose(&[
            dsb_transmit(10.0, &cfg).unwrap(),
            dsb_transmit(5.0, &cfg).unwrap(),
        ])
        .unwrap();
        let ch = AwgnChannel::new(1.0, 77).unwrap();
        let trials = 100_000;
        let estimates: Vec<f64> = (0..trials)
            .map(|t| dsb_estimate_sum(&ch.add_awgn(&x, t), &cfg).unwrap())
            .collect();
        let mean = estimates.iter().sum::<f64>() / trials as f64;
        // matched filter noise std: sigma / (g sqrt(N))
        let std = 1.0 / (cfg.gain * 8.0);
        assert!(
            (mean - 15.0).abs() < 3.0 * std / (trials as f64).sqrt(),
            "{mean}"
        );
    }

    proptest! {
        #[test]
        fn estimator_is_linear(ms in proptest::collection::vec(0.0f64..32.0, 1..5)) {
            let cfg = DsbConfig::new(64, 32.0, 1.0).unwrap();
            let frames: Vec<_> = ms.iter().map(|&m| dsb_transmit(m, &cfg).unwrap()).collect();
            let whole = dsb_estimate_sum(&superpose(&frames).unwrap(), &cfg).unwrap();
            let parts: f64 = frames.iter().map(|f| dsb_estimate_sum(f, &cfg).unwrap()).sum();
            prop_assert!((whole - parts).abs() < 1e-9 * (1.0 + parts.abs()));
        }
    }
}
