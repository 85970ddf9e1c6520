//! Sensor models and linear two-point/least-squares calibration.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Checker, Error, Result, Violation};

/// Seeded generator driving all sensor noise in a run.
pub type SensorRng = rand_chacha::ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SensorRng {
    SensorRng::seed_from_u64(seed)
}

/// A sampled sensor with gain/offset error, Gaussian noise and ADC resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorModel {
    /// Sampling period, s.
    pub period: f64,
    pub noise_sigma: f64,
    /// Quantization step; 0 disables quantization.
    pub resolution: f64,
    pub gain: f64,
    pub offset: f64,
}

impl SensorModel {
    /// Digital temperature sensor: 1 Hz, 0.1 °C noise, 1/16 °C LSB.
    pub fn temperature() -> Self {
        Self {
            period: 1.0,
            noise_sigma: 0.1,
            resolution: 0.0625,
            gain: 1.0,
            offset: 0.0,
        }
    }

    /// NDIR CO₂ sensor reporting a volume fraction.
    pub fn co2() -> Self {
        Self {
            period: 1.0,
            noise_sigma: 0.0005,
            resolution: 0.0001,
            gain: 1.0,
            offset: 0.0,
        }
    }

    /// Noiseless, unquantized, perfectly calibrated sensor.
    pub fn ideal(period: f64) -> Self {
        Self {
            period,
            noise_sigma: 0.0,
            resolution: 0.0,
            gain: 1.0,
            offset: 0.0,
        }
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut c = Checker::default();
        c.positive("period", self.period);
        c.non_negative("noise_sigma", self.noise_sigma);
        c.non_negative("resolution", self.resolution);
        c.require(
            self.gain.is_finite() && self.gain != 0.0,
            "gain",
            format!("must be finite and non-zero (got {})", self.gain),
        );
        c.finite("offset", self.offset);
        c.finish()
    }

    pub fn validate(&self) -> Result<()> {
        Error::from_violations(self.violations())
    }
}

/// Rounds to the nearest multiple of `resolution`; identity when `resolution` is 0.
pub fn quantize(v: f64, resolution: f64) -> f64 {
    if resolution > 0.0 {
        (v / resolution).round() * resolution
    } else {
        v
    }
}

/// Draws one reading of `true_value`.
///
/// Exactly one standard-normal draw is consumed per call regardless of
/// `noise_sigma`, so streams stay aligned when noise levels change.
pub fn sample<R: Rng + ?Sized>(true_value: f64, m: &SensorModel, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    quantize(m.gain * true_value + m.offset + m.noise_sigma * z, m.resolution)
}

/// Linear correction `corrected = gain·reading + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub gain: f64,
    pub offset: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Self {
            gain: 1.0,
            offset: 0.0,
        }
    }
}

/// Least-squares fit of `reference ≈ gain·raw + offset` over `(raw, reference)` pairs.
pub fn calibrate(pairs: &[(f64, f64)]) -> Result<Calibration> {
    if pairs.iter().any(|(r, y)| !r.is_finite() || !y.is_finite()) {
        return Err(Error::DegenerateInput("calibration pairs must be finite".into()));
    }
    let first = pairs.first().map(|p| p.0);
    if pairs.len() < 2 || pairs.iter().all(|p| Some(p.0) == first) {
        return Err(Error::DegenerateInput(
            "calibration needs at least two distinct raw values".into(),
        ));
    }
    let n = pairs.len() as f64;
    let mean_x = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (sxy, sxx) = pairs.iter().fold((0.0, 0.0), |(sxy, sxx), &(x, y)| {
        let dx = x - mean_x;
        (sxy + dx * (y - mean_y), sxx + dx * dx)
    });
    let gain = sxy / sxx;
    if !gain.is_finite() || gain == 0.0 {
        return Err(Error::DegenerateInput(format!(
            "fitted gain {gain} is not usable (reference values do not vary)"
        )));
    }
    Ok(Calibration {
        gain,
        offset: mean_y - gain * mean_x,
    })
}

pub fn apply_calibration(reading: f64, c: &Calibration) -> f64 {
    c.gain * reading + c.offset
}
