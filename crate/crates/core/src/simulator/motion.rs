//! Scripted head-motion generators.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SimError;
use crate::math::{Quat, Vec3};
use crate::telemetry::HeadSample;

/// Standing eye height used as the neutral head position.
pub const EYE_HEIGHT_M: f64 = 1.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MotionKind {
    /// Identity pose for the whole session.
    Static,
    /// Forward walk with vertical bob, lateral sway and gentle yaw.
    Walk,
    /// Sinusoidal yaw rate `A·sin(2πft)` about the vertical axis.
    Spin,
    /// Constant yaw rate `A` with pitch and roll oscillation and an orbiting
    /// head position; the sickness-inducing scenario.
    Stress,
}

impl MotionKind {
    pub fn name(self) -> &'static str {
        match self {
            MotionKind::Static => "static",
            MotionKind::Walk => "walk",
            MotionKind::Spin => "spin",
            MotionKind::Stress => "stress",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "static" => MotionKind::Static,
            "walk" => MotionKind::Walk,
            "spin" => MotionKind::Spin,
            "stress" => MotionKind::Stress,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionProfile {
    pub kind: MotionKind,
    /// Angular-rate amplitude, rad/s.
    pub angular_amp: f64,
    /// Positional amplitude, m.
    pub pos_amp: f64,
    /// Base oscillation frequency, Hz.
    pub freq: f64,
    /// Smooth-noise angular-rate amplitude, rad/s.
    pub noise: f64,
    pub duration: f64,
    pub rate: f64,
}

impl MotionProfile {
    pub fn preset(kind: MotionKind) -> Self {
        let base =
            MotionProfile { kind, angular_amp: 0.0, pos_amp: 0.0, freq: 0.25, noise: 0.0, duration: 120.0, rate: 72.0 };
        match kind {
            MotionKind::Static => base,
            MotionKind::Walk => MotionProfile { angular_amp: 0.3, pos_amp: 0.04, freq: 0.9, noise: 0.05, ..base },
            MotionKind::Spin => MotionProfile { angular_amp: core::f64::consts::PI, freq: 0.25, ..base },
            MotionKind::Stress => MotionProfile { angular_amp: 2.0, pos_amp: 0.3, freq: 0.25, noise: 0.2, ..base },
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let finite = [self.angular_amp, self.pos_amp, self.freq, self.noise, self.duration, self.rate]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(SimError::Profile("non-finite parameter"));
        }
        if self.angular_amp < 0.0 || self.pos_amp < 0.0 || self.noise < 0.0 {
            return Err(SimError::Profile("amplitudes must be nonnegative"));
        }
        if self.rate <= 0.0 {
            return Err(SimError::Profile("rate must be positive"));
        }
        if self.duration <= 0.0 {
            return Err(SimError::Profile("duration must be positive"));
        }
        if self.freq <= 0.0 && self.kind != MotionKind::Static {
            return Err(SimError::Profile("frequency must be positive"));
        }
        Ok(())
    }

    pub fn sample_count(&self) -> usize {
        libm::round(self.duration * self.rate) as usize + 1
    }
}

/// Sum of a few sinusoids with random frequency and phase; band-limited so
/// that its derivatives stay bounded.
#[derive(Debug, Clone)]
struct SmoothNoise {
    terms: [(f64, f64, f64); 3],
}

impl SmoothNoise {
    /// `rate_amp` bounds the derivative's amplitude.
    fn new(rng: &mut ChaCha8Rng, rate_amp: f64) -> Self {
        let mut terms = [(0.0, 0.0, 0.0); 3];
        for term in terms.iter_mut() {
            let f = rng.random_range(0.4..1.6);
            let phase = rng.random_range(0.0..TAU);
            // each term contributes a third of the rate amplitude
            *term = (rate_amp / 3.0 / (TAU * f), f, phase);
        }
        SmoothNoise { terms }
    }

    fn at(&self, t: f64) -> f64 {
        self.terms.iter().map(|&(a, f, p)| a * libm::sin(TAU * f * t + p)).sum()
    }
}

const UP: Vec3 = Vec3::new(0.0, 1.0, 0.0);
const RIGHT: Vec3 = Vec3::new(1.0, 0.0, 0.0);
const FORWARD: Vec3 = Vec3::new(0.0, 0.0, 1.0);

fn orientation(yaw: f64, pitch: f64, roll: f64) -> Quat {
    Quat::from_axis_angle(UP, yaw) * Quat::from_axis_angle(RIGHT, pitch) * Quat::from_axis_angle(FORWARD, roll)
}

/// Deterministic head-sample stream for a profile.
pub fn generate_motion(profile: &MotionProfile, seed: u64) -> Result<Vec<HeadSample>, SimError> {
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: [SmoothNoise; 6] = core::array::from_fn(|_| SmoothNoise::new(&mut rng, profile.noise));
    let n = profile.sample_count();
    let w = TAU * profile.freq;
    let a = profile.angular_amp;
    let p = profile.pos_amp;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / profile.rate;
        let (yaw, pitch, roll, pos) = match profile.kind {
            MotionKind::Static => (0.0, 0.0, 0.0, Vec3::ZERO),
            MotionKind::Spin => ((a / w) * (1.0 - libm::cos(w * t)), 0.0, 0.0, Vec3::ZERO),
            MotionKind::Walk => (
                (a / w) * libm::sin(w * t),
                0.0,
                0.0,
                Vec3::new(0.5 * p * libm::sin(w * t), p * libm::sin(2.0 * w * t), 1.0 * t),
            ),
            MotionKind::Stress => (
                a * t,
                (0.5 * a / w) * libm::sin(w * t),
                (0.25 * a / (1.7 * w)) * libm::sin(1.7 * w * t + 1.0),
                Vec3::new(p * libm::sin(w * t), 0.3 * p * libm::sin(2.0 * w * t), p * libm::cos(w * t)),
            ),
        };
        let (yaw, pitch, roll, pos) = if profile.kind == MotionKind::Static {
            (yaw, pitch, roll, pos)
        } else {
            (
                yaw + noise[0].at(t),
                pitch + noise[1].at(t),
                roll + noise[2].at(t),
                pos + Vec3::new(noise[3].at(t), noise[4].at(t), noise[5].at(t)).scale(0.05),
            )
        };
        out.push(HeadSample::new(t, pos + Vec3::new(0.0, EYE_HEIGHT_M, 0.0), orientation(yaw, pitch, roll)));
    }
    crate::telemetry::sign_fix(&mut out);
    Ok(out)
}
