//! Closed-form performance of Log-FSK AirComp in AWGN.
//!
//! After exponentiation the noise is multiplicative log-normal,
//! `r[n] = p[n] * z[n]` with `z = exp(w / A_c)`. Under a Gaussian approximation
//! of the analysis output this gives the destination SNR of the sum bin, a
//! union-bound error probability and the threshold received SNR.

use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::waveform::{aircomp_amplitude_bound, modulate, LogFskParams};

/// Moments of `z = exp(w / A_c)` with `w ~ N(0, sigma2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalStats {
    pub mu_z: f64,
    pub sigma2_z: f64,
}

pub fn lognormal_stats(sigma2: f64, a_c: f64) -> LogNormalStats {
    let ratio = sigma2 / (a_c * a_c);
    LogNormalStats {
        mu_z: (ratio / 2.0).exp(),
        sigma2_z: ratio.exp() * ratio.exp_m1(),
    }
}

/// Noiseless amplitude of the sum tone, `B_c^K (1/2)^(K-1) (2/N)^((K-1)/2)`.
pub fn a_sigma(k_users: usize, b_c: f64, n_samples: usize) -> f64 {
    assert!(k_users >= 1, "at least one user");
    let k1 = (k_users - 1) as i32;
    b_c.powi(k_users as i32) * 0.5f64.powi(k1) * (2.0 / n_samples as f64).sqrt().powi(k1)
}

/// Time-average power of the noiseless exponentiated sum,
/// `(1/N) sum_n exp((2/A_c) sum_k x_k[n])`.
pub fn p_p(params: &LogFskParams, messages: &[usize]) -> Result<f64> {
    if messages.is_empty() {
        return Err(Error::Empty("message list"));
    }
    let n = params.n_samples();
    let mut sum = vec![0.0; n];
    for &m in messages {
        let x = modulate(m, params)?;
        for (s, v) in sum.iter_mut().zip(x.samples()) {
            *s += v;
        }
    }
    let scale = 2.0 / params.a_c();
    Ok(sum.iter().map(|s| (scale * s).exp()).sum::<f64>() / n as f64)
}

/// Destination SNR of the sum bin from its amplitude, the product power and
/// the log-normal moments. `+inf` without noise.
pub fn snr_sigma(a_sig: f64, p_p: f64, stats: LogNormalStats) -> f64 {
    let bias = stats.mu_z - 1.0;
    let denom = p_p * stats.sigma2_z + a_sig * a_sig * bias * bias;
    if denom == 0.0 {
        f64::INFINITY
    } else {
        a_sig * a_sig / denom
    }
}

/// Destination SNR in terms of the per-user received SNR (linear), for two
/// users at `B_c = sqrt(2N)`.
pub fn snr_sigma_from_snr_r(snr_r: f64, p_p: f64, p: f64, n_samples: usize) -> f64 {
    let t = p / snr_r;
    let inv = p_p / (2.0 * n_samples as f64) * t.exp() * t.exp_m1() + (t / 2.0).exp_m1().powi(2);
    if inv == 0.0 {
        f64::INFINITY
    } else {
        1.0 / inv
    }
}

/// High-SNR straight line `10 log10(2N) + SNR_R - P_p - P`, all in dB.
pub fn high_snr_approx_db(snr_r_db: f64, p_p_db: f64, p_db: f64, n_samples: usize) -> f64 {
    to_db(2.0 * n_samples as f64) + snr_r_db - p_p_db - p_db
}

/// How the destination SNR enters the Gaussian tail of the error probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum QInterpretation {
    /// `Q(sqrt(SNR_Sigma))`, the expression as printed.
    #[default]
    QOfSqrt,
    /// `Q(SNR_Sigma)`, which reproduces the 7 dB threshold line.
    QOfLinear,
}

impl QInterpretation {
    fn argument(self, snr_sigma: f64) -> f64 {
        match self {
            QInterpretation::QOfSqrt => snr_sigma.sqrt(),
            QInterpretation::QOfLinear => snr_sigma,
        }
    }

    fn snr_for_argument(self, arg: f64) -> f64 {
        match self {
            QInterpretation::QOfSqrt => arg * arg,
            QInterpretation::QOfLinear => arg,
        }
    }
}

/// Gaussian tail `Q(x) = P(X > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse of [`q_function`] on `(0, 1)`.
pub fn inverse_q(p: f64) -> f64 {
    std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Union bound `(N - 1) Q(.)` on the M-ary detection error, clamped to `[0, 1]`.
pub fn error_prob(n_samples: usize, snr_sigma: f64, interpretation: QInterpretation) -> f64 {
    if snr_sigma == f64::INFINITY {
        return 0.0;
    }
    let arg = interpretation.argument(snr_sigma.max(0.0));
    ((n_samples as f64 - 1.0) * q_function(arg)).clamp(0.0, 1.0)
}

/// Destination SNR (linear) at which the union bound equals `gamma_th`.
pub fn required_snr_sigma(
    n_samples: usize,
    gamma_th: f64,
    interpretation: QInterpretation,
) -> Result<f64> {
    if !(gamma_th > 0.0 && gamma_th < 1.0) || n_samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "tolerable error probability must lie in (0, 1), got {gamma_th}"
        )));
    }
    let tail = gamma_th / (n_samples as f64 - 1.0);
    let arg = if tail >= 0.5 { 0.0 } else { inverse_q(tail) };
    Ok(interpretation.snr_for_argument(arg))
}

/// Message set used for theory curves: `floor(N / 2K) + k` for `k = 0..K`,
/// a sum near `N / 2` with distinct tones.
pub fn reference_messages(n_samples: usize, k_users: usize) -> Vec<usize> {
    let base = n_samples / (2 * k_users.max(1));
    (0..k_users).map(|k| base + k).collect()
}

/// Destination SNR for `messages` at per-user received SNR `snr_r` (linear).
///
/// Uses the two-user closed form when it applies (`K = 2`, `B_c = sqrt(2N)`)
/// and the general amplitude/power expression otherwise.
pub fn destination_snr(
    params: &LogFskParams,
    messages: &[usize],
    p_p_value: f64,
    snr_r: f64,
) -> f64 {
    let n = params.n_samples();
    if snr_r == f64::INFINITY {
        return f64::INFINITY;
    }
    if uses_two_user_form(params, messages.len()) {
        snr_sigma_from_snr_r(snr_r, p_p_value, params.log_power(), n)
    } else {
        let sigma2 = params.a_bar_c().powi(2) / snr_r;
        let stats = lognormal_stats(sigma2, params.a_c());
        snr_sigma(a_sigma(messages.len(), params.b_c(), n), p_p_value, stats)
    }
}

fn uses_two_user_form(params: &LogFskParams, k_users: usize) -> bool {
    let bound = aircomp_amplitude_bound(params.n_samples());
    k_users == 2 && ((params.b_c() - bound) / bound).abs() < 1e-12
}

/// Solved operating threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub snr_sigma_db: f64,
    pub snr_r_db: f64,
    pub messages: Vec<usize>,
    pub p_p: f64,
    /// `|SNR_Sigma(snr_r_db) - snr_sigma_db|` in dB at the returned point.
    pub residual_db: f64,
}

pub const THRESHOLD_BRACKET_DB: (f64, f64) = (-20.0, 80.0);

/// Received SNR needed so that the union bound meets `gamma_th` for `k_users`
/// users sending the reference messages.
pub fn threshold_snr_r(
    params: &LogFskParams,
    k_users: usize,
    gamma_th: f64,
    interpretation: QInterpretation,
) -> Result<Threshold> {
    if k_users == 0 {
        return Err(Error::InvalidArgument("at least one user".into()));
    }
    let target = required_snr_sigma(params.n_samples(), gamma_th, interpretation)?;
    let target_db = to_db(target);
    let messages = reference_messages(params.n_samples(), k_users);
    if messages.iter().sum::<usize>() >= params.n_samples() {
        return Err(Error::InvalidArgument(format!(
            "N = {} is too small for {k_users} users",
            params.n_samples()
        )));
    }
    let pp = p_p(params, &messages)?;
    let curve = |snr_r_db: f64| to_db(destination_snr(params, &messages, pp, from_db(snr_r_db)));
    let (mut lo, mut hi) = THRESHOLD_BRACKET_DB;
    if !(curve(lo) < target_db && curve(hi) > target_db) {
        return Err(Error::NoRoot {
            lo_db: lo,
            hi_db: hi,
        });
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if curve(mid) < target_db {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let snr_r_db = 0.5 * (lo + hi);
    Ok(Threshold {
        snr_sigma_db: target_db,
        snr_r_db,
        residual_db: (curve(snr_r_db) - target_db).abs(),
        messages,
        p_p: pp,
    })
}

/// Mean squared error with wrong detections spread uniformly over the other
/// `N - 1` bins: `p_e * mean_{m != sum} (m - sum)^2`.
pub fn mse(n_samples: usize, p_e: f64, true_sum: usize) -> f64 {
    if p_e == 0.0 || n_samples < 2 {
        return 0.0;
    }
    p_e * squared_distance_total(n_samples, true_sum) / (n_samples as f64 - 1.0)
}

/// `p_e * sum_{m=0}^{N-1} (m - sum)^2`, the expression read literally with the
/// estimate replaced by the true sum.
pub fn mse_literal(n_samples: usize, p_e: f64, true_sum: usize) -> f64 {
    if p_e == 0.0 {
        return 0.0;
    }
    p_e * squared_distance_total(n_samples, true_sum)
}

fn squared_distance_total(n_samples: usize, true_sum: usize) -> f64 {
    (0..n_samples)
        .map(|m| (m as f64 - true_sum as f64).powi(2))
        .sum()
}

/// Per-user received SNR `Abar_c^2 / sigma^2`.
pub fn snr_r(a_bar_c: f64, sigma2: f64) -> f64 {
    a_bar_c * a_bar_c / sigma2
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Closed-form metrics at one received-SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryPoint {
    pub snr_r_db: f64,
    pub snr_sigma_db: f64,
    pub p_e: f64,
    pub mse: f64,
    pub n_samples: usize,
    pub k_users: usize,
}

/// Theory for `messages` at `snr_r_db`; `literal_mse` selects the literal MSE sum.
pub fn theory_point(
    params: &LogFskParams,
    messages: &[usize],
    snr_r_db: f64,
    interpretation: QInterpretation,
    literal_mse: bool,
) -> Result<TheoryPoint> {
    let pp = p_p(params, messages)?;
    let snr = destination_snr(params, messages, pp, from_db(snr_r_db));
    let n = params.n_samples();
    let p_e = error_prob(n, snr, interpretation);
    let sum: usize = messages.iter().sum();
    let mse = if literal_mse {
        mse_literal(n, p_e, sum)
    } else {
        mse(n, p_e, sum)
    };
    Ok(TheoryPoint {
        snr_r_db,
        snr_sigma_db: to_db(snr),
        p_e,
        mse,
        n_samples: n,
        k_users: messages.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::cosine_basis;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn lognormal_degenerate_and_unit() {
        assert_eq!(
            lognormal_stats(0.0, 2.0),
            LogNormalStats {
                mu_z: 1.0,
                sigma2_z: 0.0
            }
        );
        let s = lognormal_stats(4.0, 2.0);
        // mpmath: e^0.5 and e(e - 1)
        assert_relative_eq!(s.mu_z, 1.648_721_270_700_128_1, max_relative = 1e-15);
        assert_relative_eq!(s.sigma2_z, 4.670_774_270_471_605, max_relative = 1e-14);
    }

    #[test]
    fn lognormal_shrinks_monotonically() {
        let mut prev = lognormal_stats(1.0, 1.0);
        for i in 1..40 {
            let s = lognormal_stats(0.5f64.powi(i), 1.0);
            assert!(s.mu_z < prev.mu_z && s.sigma2_z < prev.sigma2_z);
            assert!(s.mu_z >= 1.0 && s.sigma2_z >= 0.0);
            prev = s;
        }
    }

    #[test]
    fn sum_amplitude() {
        assert_eq!(a_sigma(1, 3.5, 64), 3.5);
        for n in [16, 64, 256, 1024] {
            let b = aircomp_amplitude_bound(n);
            for k in 1..=6 {
                assert_relative_eq!(a_sigma(k, b, n), b, max_relative = 1e-12);
            }
            assert_relative_eq!(
                a_sigma(2, b, n).powi(2),
                2.0 * n as f64,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn product_power_direct_sum_oracle() {
        // direct product of the shifted cosines, independent of A_c
        let params = LogFskParams::new(64).unwrap();
        let c10 = cosine_basis(10, 64).unwrap();
        let c20 = cosine_basis(20, 64).unwrap();
        let direct: f64 = (0..64)
            .map(|i| {
                ((params.b_c() * c10[i] + params.alpha())
                    * (params.b_c() * c20[i] + params.alpha()))
                .powi(2)
            })
            .sum::<f64>()
            / 64.0;
        assert_relative_eq!(
            p_p(&params, &[10, 20]).unwrap(),
            direct,
            max_relative = 1e-12
        );
        // mpmath evaluation of the same sum
        assert_relative_eq!(direct, 49.4881, max_relative = 1e-12);
    }

    #[test]
    fn product_power_single_user_weak_signal() {
        let params = LogFskParams::builder(32)
            .b_c(1e-9)
            .alpha(1.0)
            .build()
            .unwrap();
        assert_relative_eq!(p_p(&params, &[5]).unwrap(), 1.0, max_relative = 1e-6);
    }

    #[test]
    fn product_power_grows_with_users() {
        let params = LogFskParams::new(256).unwrap();
        let p2 = p_p(&params, &[20, 30]).unwrap();
        let p3 = p_p(&params, &[20, 30, 40]).unwrap();
        let p4 = p_p(&params, &[20, 30, 40, 50]).unwrap();
        assert!(p2 < p3 && p3 < p4);
    }

    #[test]
    fn noiseless_snr_is_infinite() {
        assert_eq!(
            snr_sigma(10.0, 40.0, lognormal_stats(0.0, 1.0)),
            f64::INFINITY
        );
        assert_eq!(
            snr_sigma_from_snr_r(f64::INFINITY, 40.0, 1.2, 256),
            f64::INFINITY
        );
    }

    #[test]
    fn two_routes_agree() {
        let params = LogFskParams::new(256).unwrap();
        let msgs = [64, 65];
        let pp = p_p(&params, &msgs).unwrap();
        let a = a_sigma(2, params.b_c(), 256);
        for i in 0..20 {
            let snr_r_db = -10.0 + 2.5 * i as f64;
            let sigma2 = params.a_bar_c().powi(2) / from_db(snr_r_db);
            let eq16 = snr_sigma(a, pp, lognormal_stats(sigma2, params.a_c()));
            let eq17 = snr_sigma_from_snr_r(from_db(snr_r_db), pp, params.log_power(), 256);
            assert_relative_eq!(eq16, eq17, max_relative = 1e-9);
        }
    }

    #[test]
    fn closed_form_is_strictly_increasing() {
        let mut prev = 0.0;
        for i in 0..=1000 {
            let s = snr_sigma_from_snr_r(from_db(-20.0 + 0.1 * i as f64), 41.0, 1.24, 256);
            assert!(s > prev);
            prev = s;
        }
    }

    #[test]
    fn doubling_samples_adds_three_db() {
        let a = to_db(snr_sigma_from_snr_r(from_db(60.0), 41.0, 1.24, 256));
        let b = to_db(snr_sigma_from_snr_r(from_db(60.0), 41.0, 1.24, 512));
        assert!((b - a - 3.0103).abs() < 1e-3);
        let shift =
            high_snr_approx_db(20.0, 16.0, 1.0, 512) - high_snr_approx_db(20.0, 16.0, 1.0, 256);
        assert_relative_eq!(shift, 10.0 * 2f64.log10(), max_relative = 1e-12);
    }

    #[test]
    fn high_snr_line_matches_closed_form() {
        let params = LogFskParams::new(256).unwrap();
        let msgs = reference_messages(256, 2);
        let pp = p_p(&params, &msgs).unwrap();
        for snr_r_db in [30.0, 35.0, 40.0, 50.0] {
            let exact = to_db(snr_sigma_from_snr_r(
                from_db(snr_r_db),
                pp,
                params.log_power(),
                256,
            ));
            let approx = high_snr_approx_db(snr_r_db, to_db(pp), to_db(params.log_power()), 256);
            assert!(
                (exact - approx).abs() < 0.5,
                "{snr_r_db}: {exact} vs {approx}"
            );
        }
    }

    #[test]
    fn knee_then_linear_slope() {
        let params = LogFskParams::new(256).unwrap();
        let msgs = reference_messages(256, 2);
        let pp = p_p(&params, &msgs).unwrap();
        let curve = |db: f64| {
            to_db(snr_sigma_from_snr_r(
                from_db(db),
                pp,
                params.log_power(),
                256,
            ))
        };
        let th = threshold_snr_r(&params, 2, 1e-4, QInterpretation::QOfSqrt).unwrap();
        let slope = |db: f64| (curve(db + 0.05) - curve(db - 0.05)) / 0.1;
        let steepest = (0..200)
            .map(|i| slope(th.snr_r_db - 20.0 + 0.1 * i as f64))
            .fold(0.0, f64::max);
        assert!(steepest > 1.5);
        assert!((slope(th.snr_r_db + 30.0) - 1.0).abs() < 0.02);
    }

    #[test]
    fn error_probability_limits() {
        assert_eq!(
            error_prob(256, f64::INFINITY, QInterpretation::QOfSqrt),
            0.0
        );
        assert_eq!(error_prob(256, 0.0, QInterpretation::QOfSqrt), 1.0);
        assert_eq!(error_prob(2, 0.0, QInterpretation::QOfLinear), 0.5);
        let tail = 1e-4 / 255.0;
        let snr = inverse_q(tail).powi(2);
        assert_relative_eq!(
            error_prob(256, snr, QInterpretation::QOfSqrt),
            1e-4,
            max_relative = 1e-9
        );
    }

    #[test]
    fn printed_argument_is_pessimistic_at_seven_db() {
        let pe = 255.0 * q_function(from_db(7.0).sqrt());
        assert!(pe > 1.0);
        assert_eq!(error_prob(256, from_db(7.0), QInterpretation::QOfSqrt), 1.0);
    }

    #[test]
    fn linear_argument_gives_seven_db() {
        let s = required_snr_sigma(256, 1e-4, QInterpretation::QOfLinear).unwrap();
        assert!((to_db(s) - 7.0).abs() < 0.5, "{}", to_db(s));
    }

    #[test]
    fn threshold_solver_converges_for_loose_target() {
        let params = LogFskParams::new(8).unwrap();
        let th = threshold_snr_r(&params, 2, 0.5, QInterpretation::QOfSqrt).unwrap();
        assert!(th.snr_r_db.is_finite());
        assert!(th.residual_db < 0.01);
    }

    #[test]
    fn multi_user_thresholds() {
        let params = LogFskParams::new(256).unwrap();
        for (k, expected) in [(3, 7.0), (4, 15.0), (5, 25.0)] {
            let th = threshold_snr_r(&params, k, 1e-4, QInterpretation::QOfLinear).unwrap();
            assert!(
                (th.snr_r_db - expected).abs() <= 2.0,
                "K={k}: {}",
                th.snr_r_db
            );
        }
    }

    #[test]
    fn mse_cases() {
        assert_eq!(mse(256, 0.0, 100), 0.0);
        assert_relative_eq!(mse(3, 1.0, 0), 2.5);
        assert_relative_eq!(mse_literal(3, 1.0, 0), 5.0);
    }

    #[test]
    fn received_snr() {
        assert_eq!(snr_r(1.0, 1.0), 1.0);
        assert_relative_eq!(to_db(snr_r(10f64.sqrt(), 1.0)), 10.0, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn error_prob_monotone(a in 0.0f64..100.0, b in 0.0f64..100.0, n in 2usize..2048) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            for q in [QInterpretation::QOfSqrt, QInterpretation::QOfLinear] {
                prop_assert!(error_prob(n, hi, q) <= error_prob(n, lo, q));
                prop_assert!(error_prob(n, lo, q) <= error_prob(n + 1, lo, q));
                let pe = error_prob(n, lo, q);
                prop_assert!((0.0..=1.0).contains(&pe));
            }
        }
    }
}
