//! Framerate cost model and the synthetic latent-sickness model.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::SimError;
use crate::controller::ComfortParams;

/// `fps = base · (1 + ffr_gain·ffr) · (fov_max / fov)^fov_exponent + jitter`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramerateModel {
    /// Framerate with FFR off and the full field of view.
    pub base_fps: f64,
    pub ffr_gain: f64,
    pub fov_exponent: f64,
    pub jitter_std: f64,
    pub fov_max: f64,
}

impl Default for FramerateModel {
    fn default() -> Self {
        FramerateModel { base_fps: 60.0, ffr_gain: 0.05, fov_exponent: 1.0, jitter_std: 1.5, fov_max: 110.0 }
    }
}

impl FramerateModel {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.base_fps > 0.0 && self.ffr_gain > 0.0 && self.fov_exponent > 0.0 && self.fov_max > 0.0) {
            return Err(SimError::Config("framerate model needs positive base, gains and fov_max"));
        }
        if !(self.jitter_std >= 0.0) {
            return Err(SimError::Config("jitter must be nonnegative"));
        }
        Ok(())
    }

    pub fn nominal(&self, params: &ComfortParams) -> f64 {
        self.base_fps
            * (1.0 + self.ffr_gain * params.ffr_level as f64)
            * libm::pow(self.fov_max / params.fov_deg, self.fov_exponent)
    }

    /// Nominal framerate plus Gaussian jitter, floored at 1 fps.
    pub fn sample<R: Rng>(&self, params: &ComfortParams, rng: &mut R) -> f64 {
        let jitter =
            if self.jitter_std > 0.0 { Normal::new(0.0, self.jitter_std).map_or(0.0, |n| n.sample(rng)) } else { 0.0 };
        (self.nominal(params) + jitter).max(1.0)
    }
}

/// First-order latent sickness: `ds/dt = gain·stimulus − decay·s`, with
/// `stimulus = |ω| · (fov / fov_max) · max(1, F / fps)`. This is a test
/// harness for the control loop, not a validated human model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SicknessModel {
    pub gain: f64,
    pub decay: f64,
}

impl Default for SicknessModel {
    fn default() -> Self {
        SicknessModel { gain: 2.0, decay: 0.05 }
    }
}

impl SicknessModel {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.gain >= 0.0 && self.gain.is_finite() && self.decay > 0.0 && self.decay.is_finite()) {
            return Err(SimError::Config("sickness model needs gain >= 0 and decay > 0"));
        }
        Ok(())
    }

    pub fn stimulus(omega: f64, fov: f64, fov_max: f64, fps: f64, fps_threshold: f64) -> f64 {
        let penalty = if fps > 0.0 { (fps_threshold / fps).max(1.0) } else { 1.0 };
        omega.abs() * (fov / fov_max) * penalty
    }

    /// Exact solution of the linear ODE over `dt` with constant stimulus,
    /// clamped to `[0, 100]`.
    pub fn advance(&self, s: f64, stimulus: f64, dt: f64) -> f64 {
        let steady = self.gain * stimulus / self.decay;
        let next = steady + (s - steady) * libm::exp(-self.decay * dt);
        next.clamp(0.0, 100.0)
    }
}
