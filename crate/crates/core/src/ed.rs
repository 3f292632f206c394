//! Energy-detector detection probability.
//!
//! The detector averages `M` squared samples and compares the result with a
//! threshold. Under interference the statistic is approximately Gaussian
//! with mean `s + n` and standard deviation `sqrt(2/M) (s + n)`, where `s`
//! and `n` are the signal and noise powers in mW.

use libm::erfc;

use crate::error::{Error, Result};

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Standard Gaussian tail probability `P(Z > x)`.
pub fn gaussian_q(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdConfig {
    pub threshold_dbm: f64,
    pub signal_power_dbm: f64,
    pub noise_power_dbm: f64,
    pub samples: u32,
}

impl EdConfig {
    /// Configuration with the signal power given as an SNR above the noise.
    pub fn from_snr(threshold_dbm: f64, snr_db: f64, noise_power_dbm: f64, samples: u32) -> Self {
        EdConfig {
            threshold_dbm,
            signal_power_dbm: noise_power_dbm + snr_db,
            noise_power_dbm,
            samples,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::invalid("ed.samples", "must be at least 1"));
        }
        for (field, v) in [
            ("ed.threshold_dbm", self.threshold_dbm),
            ("ed.signal_power_dbm", self.signal_power_dbm),
            ("ed.noise_power_dbm", self.noise_power_dbm),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(field, "must be finite"));
            }
        }
        Ok(())
    }
}

/// Probability that the averaged energy exceeds the threshold while an
/// interferer is on the air.
pub fn detection_probability(c: &EdConfig) -> f64 {
    let eta = dbm_to_mw(c.threshold_dbm);
    let total = dbm_to_mw(c.signal_power_dbm) + dbm_to_mw(c.noise_power_dbm);
    let sd = (2.0 / f64::from(c.samples)).sqrt() * total;
    gaussian_q((eta - total) / sd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dbm_conversion() {
        assert_relative_eq!(dbm_to_mw(0.0), 1.0);
        assert_relative_eq!(dbm_to_mw(-30.0), 1e-3, max_relative = 1e-14);
        assert_relative_eq!(dbm_to_mw(10.0), 10.0, max_relative = 1e-14);
    }

    #[test]
    fn q_reference_values() {
        assert_relative_eq!(gaussian_q(0.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(gaussian_q(1.0), 0.158_655_253_931_457_05, epsilon = 1e-13);
        assert_relative_eq!(gaussian_q(3.0), 1.349_898_031_630_094_5e-3, epsilon = 1e-13);
        assert_relative_eq!(gaussian_q(-2.0), 1.0 - 0.022_750_131_948_179_21, epsilon = 1e-13);
    }

    #[test]
    fn extreme_thresholds() {
        let lo = EdConfig::from_snr(-200.0, 22.0, -94.0, 680);
        let hi = EdConfig::from_snr(50.0, 22.0, -94.0, 680);
        assert!(detection_probability(&lo) > 1.0 - 1e-12);
        assert!(detection_probability(&hi) < 1e-12);
    }

    #[test]
    fn zero_samples_rejected() {
        let c = EdConfig::from_snr(-72.0, 22.0, -94.0, 0);
        assert!(c.validate().is_err());
    }
}
