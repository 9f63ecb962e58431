use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::topology::{angular_difference, preferred_angle};
use super::{RingConfig, AMPLITUDE_FLOOR, SIGMA_MIN};
use crate::envs::ActionMapping;
use crate::error::{ensure_finite, invalid, Result};

/// One Gaussian input on the ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputSignal {
    pub amplitude: f64,
    /// Radians in `[0, 2π)`.
    pub center: f64,
    /// Radians, at least [`SIGMA_MIN`].
    pub width: f64,
}

impl InputSignal {
    pub fn new(amplitude: f64, center: f64, width: f64) -> Result<Self> {
        let signal = Self {
            amplitude,
            center: center.rem_euclid(TAU),
            width,
        };
        signal.validate()?;
        Ok(signal)
    }

    fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.center.is_finite()) {
            return Err(invalid(format!("non-finite input signal {self:?}")));
        }
        if !(self.width >= SIGMA_MIN) || !self.width.is_finite() {
            return Err(invalid(format!(
                "signal width {} below the minimum {SIGMA_MIN}",
                self.width
            )));
        }
        Ok(())
    }

    /// Contribution of this signal at angle `alpha`.
    ///
    /// The normaliser is `sqrt(2π·σ)`, not the usual `σ·sqrt(2π)`.
    pub fn at(&self, alpha: f64) -> f64 {
        let d = angular_difference(alpha, self.center);
        self.amplitude / (TAU * self.width).sqrt()
            * (-0.5 * d * d / (self.width * self.width)).exp()
    }
}

/// Sum of Gaussian inputs sampled at each neuron's preferred angle.
pub fn gaussian_input(signals: &[InputSignal], config: &RingConfig) -> Result<Vec<f64>> {
    for s in signals {
        s.validate()?;
    }
    let n = config.n_excitatory;
    Ok((0..n)
        .map(|k| {
            let alpha = preferred_angle(k, n);
            signals.iter().map(|s| s.at(alpha)).sum()
        })
        .collect())
}

/// Turn action values into ring inputs.
///
/// Amplitudes are shifted so the smallest equals [`AMPLITUDE_FLOOR`]; this
/// keeps every input excitatory while preserving the ordering of `q_values`.
/// Widths are floored at [`SIGMA_MIN`].
pub fn encode_actions(
    q_values: &[f64],
    sigmas: &[f64],
    mapping: &ActionMapping,
) -> Result<Vec<InputSignal>> {
    if q_values.len() != sigmas.len() {
        return Err(invalid(format!(
            "{} q-values but {} sigmas",
            q_values.len(),
            sigmas.len()
        )));
    }
    if q_values.len() != mapping.n_actions() {
        return Err(invalid(format!(
            "{} q-values for a mapping of {} actions",
            q_values.len(),
            mapping.n_actions()
        )));
    }
    ensure_finite(q_values, "q_values")?;
    ensure_finite(sigmas, "sigmas")?;
    let floor = q_values.iter().copied().fold(f64::INFINITY, f64::min);
    q_values
        .iter()
        .zip(sigmas)
        .enumerate()
        .map(|(a, (&q, &sigma))| {
            InputSignal::new(q - floor + AMPLITUDE_FLOOR, mapping.angle(a)?, sigma.max(SIGMA_MIN))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::CONSTANT_ACTION_SIGMA;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn empty_signal_list_is_zero() {
        let x = gaussian_input(&[], &RingConfig::default()).unwrap();
        assert_eq!(x.len(), 64);
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_signal_peak_value() {
        let s = InputSignal::new(1.0, 0.0, PI / 6.0).unwrap();
        let x = gaussian_input(&[s], &RingConfig::default()).unwrap();
        // 1 / sqrt(2π · π/6)
        assert_abs_diff_eq!(x[0], 0.551_328_895_421_792, epsilon = 1e-12);
    }

    #[test]
    fn mirrored_signals_give_reflected_input() {
        let config = RingConfig {
            n_excitatory: 32,
            ..RingConfig::default()
        };
        let mu = 0.9;
        let signals = [
            InputSignal::new(1.3, mu, 0.4).unwrap(),
            InputSignal::new(1.3, -mu, 0.4).unwrap(),
        ];
        let x = gaussian_input(&signals, &config).unwrap();
        for n in 0..32 {
            assert_abs_diff_eq!(x[n], x[(32 - n) % 32], epsilon = 1e-12);
        }
    }

    #[test]
    fn narrow_signal_rejected() {
        assert!(InputSignal::new(1.0, 0.0, 0.01).is_err());
        let bad = InputSignal {
            amplitude: 1.0,
            center: 0.0,
            width: 0.0,
        };
        assert!(gaussian_input(&[bad], &RingConfig::default()).is_err());
    }

    #[test]
    fn constant_sigma_widths() {
        let mapping = ActionMapping::uniform(4);
        let s = encode_actions(&[0.3, -1.0, 2.0, 0.0], &[CONSTANT_ACTION_SIGMA; 4], &mapping)
            .unwrap();
        assert!(s.iter().all(|s| (s.width - PI / 6.0).abs() < 1e-15));
    }

    #[test]
    fn equal_values_get_floor_amplitude() {
        let mapping = ActionMapping::uniform(3);
        let s = encode_actions(&[-2.5; 3], &[0.5; 3], &mapping).unwrap();
        assert!(s.iter().all(|s| s.amplitude == AMPLITUDE_FLOOR));
    }

    #[test]
    fn amplitude_shift_rule() {
        let mapping = ActionMapping::uniform(3);
        let s = encode_actions(&[1.0, 3.0, 2.0], &[0.5; 3], &mapping).unwrap();
        let k: Vec<f64> = s.iter().map(|s| s.amplitude).collect();
        assert_abs_diff_eq!(k[0], 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(k[1], 2.1, epsilon = 1e-12);
        assert_abs_diff_eq!(k[2], 1.1, epsilon = 1e-12);
    }

    #[test]
    fn widths_floored_and_centres_from_mapping() {
        let mapping = ActionMapping::uniform(4);
        let s = encode_actions(&[0.0; 4], &[0.0, 0.01, 0.2, 3.0], &mapping).unwrap();
        assert_eq!(s[0].width, SIGMA_MIN);
        assert_eq!(s[1].width, SIGMA_MIN);
        assert_eq!(s[2].width, 0.2);
        assert_abs_diff_eq!(s[1].center, PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn length_mismatch_rejected() {
        let mapping = ActionMapping::uniform(3);
        assert!(encode_actions(&[0.0; 3], &[0.5; 2], &mapping).is_err());
        assert!(encode_actions(&[0.0; 4], &[0.5; 4], &mapping).is_err());
    }
}
