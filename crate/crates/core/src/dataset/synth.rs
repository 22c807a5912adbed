//! Synthetic participants with a planted intensity → sickness relationship.
//!
//! Each participant gets a motion intensity `λ` drawn uniformly from the
//! configured range and a stress-style capture whose angular amplitude is
//! `λ` rad/s. The planted sickness is `100·σ(gain·(λ − midpoint) + ε)` with
//! Gaussian `ε`; it is then quantized to the nearest reachable VRSQ total so
//! the labels are genuine questionnaire scores.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Capture, DatasetError};
use crate::simulator::{generate_motion, MotionKind, MotionProfile};
use crate::vrsq::VrsqResponse;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub participants: usize,
    pub duration_s: f64,
    pub rate_hz: f64,
    pub intensity_min: f64,
    pub intensity_max: f64,
    /// Logistic slope per rad/s of intensity.
    pub gain: f64,
    /// Intensity at which the planted score crosses 50.
    pub midpoint: f64,
    /// Standard deviation of the logit-space label noise.
    pub label_noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            participants: 20,
            duration_s: 60.0,
            rate_hz: 72.0,
            intensity_min: 0.0,
            intensity_max: 3.0,
            gain: 2.5,
            midpoint: 1.2,
            label_noise: 0.25,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.participants == 0 {
            return Err(DatasetError::Config("participants must be positive"));
        }
        if !(self.duration_s > 0.0 && self.rate_hz > 0.0) {
            return Err(DatasetError::Config("duration and rate must be positive"));
        }
        if !(self.intensity_min >= 0.0 && self.intensity_max >= self.intensity_min) {
            return Err(DatasetError::Config("intensity range must satisfy 0 <= min <= max"));
        }
        if !(self.gain.is_finite() && self.midpoint.is_finite() && self.label_noise >= 0.0) {
            return Err(DatasetError::Config("invalid label model"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub captures: Vec<Capture>,
    pub responses: Vec<(String, VrsqResponse)>,
    /// Planted intensity per participant, same order as `captures`.
    pub intensities: Vec<f64>,
}

impl SynthData {
    /// VRSQ totals keyed by participant.
    pub fn scores(&self) -> BTreeMap<String, f64> {
        self.responses.iter().map(|(id, r)| (id.clone(), r.score().total)).collect()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// Deterministic synthetic captures and questionnaire responses.
pub fn synth_dataset(cfg: &SynthConfig, seed: u64) -> Result<SynthData, DatasetError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, cfg.label_noise).map_err(|_| DatasetError::Config("label noise"))?;
    let mut out = SynthData {
        captures: Vec::with_capacity(cfg.participants),
        responses: Vec::with_capacity(cfg.participants),
        intensities: Vec::with_capacity(cfg.participants),
    };
    for p in 0..cfg.participants {
        let id = format!("p{:03}", p + 1);
        let lambda = if cfg.intensity_max > cfg.intensity_min {
            rng.random_range(cfg.intensity_min..cfg.intensity_max)
        } else {
            cfg.intensity_min
        };
        let profile = MotionProfile {
            kind: MotionKind::Stress,
            angular_amp: lambda,
            pos_amp: 0.15 * lambda,
            freq: rng.random_range(0.15..0.4),
            noise: 0.1 * lambda,
            duration: cfg.duration_s,
            rate: cfg.rate_hz,
        };
        let motion_seed: u64 = rng.random();
        let samples = generate_motion(&profile, motion_seed).map_err(|_| DatasetError::Config("motion profile"))?;
        let eps = noise.sample(&mut rng);
        let planted = (100.0 * sigmoid(cfg.gain * (lambda - cfg.midpoint) + eps)).clamp(0.0, 100.0);
        out.captures.push(Capture { participant_id: id.clone(), samples });
        out.responses.push((id, VrsqResponse::closest_to_total(planted)));
        out.intensities.push(lambda);
    }
    Ok(out)
}
