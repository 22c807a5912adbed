//! Kinematic signals and the window feature vector.
//!
//! Six channels are derived from a uniform window: linear velocity,
//! acceleration and jerk from positions, and angular velocity, acceleration
//! and jerk from orientations. Every derivative uses the same second-order
//! stencil: central differences inside, three-point one-sided differences at
//! the two ends. Series lengths always equal the window length.
//!
//! Angular velocity is expressed in the body frame. At sample `k` the
//! neighbours are mapped to rotation vectors relative to `q_k`
//! (`log(q_k⁻¹ ⊗ q_j)`) and the stencil is applied to those, so the result
//! is the derivative of the body-frame rotation vector at `t_k`.
//!
//! Features are {mean, std, max} of each channel's per-sample Euclidean
//! magnitude, in the order of [`FEATURE_NAMES`].

use alloc::vec::Vec;

use crate::math::{Quat, Vec3};
use crate::telemetry::TelemetryWindow;

/// Bumped whenever the feature layout or the derivative scheme changes.
pub const FEATURE_SET_VERSION: u32 = 1;
pub const N_CHANNELS: usize = 6;
pub const N_FEATURES: usize = N_CHANNELS * 3;

/// Feature names, channel-major, each followed by its unit.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "lin_vel_mean",
    "lin_vel_std",
    "lin_vel_max",
    "lin_acc_mean",
    "lin_acc_std",
    "lin_acc_max",
    "lin_jerk_mean",
    "lin_jerk_std",
    "lin_jerk_max",
    "ang_vel_mean",
    "ang_vel_std",
    "ang_vel_max",
    "ang_acc_mean",
    "ang_acc_std",
    "ang_acc_max",
    "ang_jerk_mean",
    "ang_jerk_std",
    "ang_jerk_max",
];

pub const FEATURE_UNITS: [&str; N_FEATURES] = [
    "m/s", "m/s", "m/s", "m/s^2", "m/s^2", "m/s^2", "m/s^3", "m/s^3", "m/s^3", "rad/s", "rad/s", "rad/s", "rad/s^2",
    "rad/s^2", "rad/s^2", "rad/s^3", "rad/s^3", "rad/s^3",
];

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum KinematicsError {
    #[error("window is not on a uniform grid; resample first")]
    NonUniform,
    #[error("need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("sample interval too small: {0}")]
    TinyInterval(f64),
    #[error("non-finite kinematic value")]
    NonFinite,
}

/// Per-channel 3-vector series sharing one time base.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicSeries {
    pub t: Vec<f64>,
    pub lin_vel: Vec<Vec3>,
    pub lin_acc: Vec<Vec3>,
    pub lin_jerk: Vec<Vec3>,
    pub ang_vel: Vec<Vec3>,
    pub ang_acc: Vec<Vec3>,
    pub ang_jerk: Vec<Vec3>,
}

impl KinematicSeries {
    pub fn channels(&self) -> [&[Vec3]; N_CHANNELS] {
        [&self.lin_vel, &self.lin_acc, &self.lin_jerk, &self.ang_vel, &self.ang_acc, &self.ang_jerk]
    }
}

/// Fixed-length window descriptor fed to the predictor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; N_FEATURES]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

fn uniform_dt(window: &TelemetryWindow) -> Result<f64, KinematicsError> {
    let rate = window.rate().ok_or(KinematicsError::NonUniform)?;
    let dt = 1.0 / rate;
    if !(dt > 1e-9) {
        return Err(KinematicsError::TinyInterval(dt));
    }
    Ok(dt)
}

/// Second-order derivative of a uniformly sampled vector series.
pub fn differentiate(series: &[Vec3], dt: f64) -> Result<Vec<Vec3>, KinematicsError> {
    let n = series.len();
    if n < 3 {
        return Err(KinematicsError::TooShort { needed: 3, got: n });
    }
    if !(dt > 1e-9) {
        return Err(KinematicsError::TinyInterval(dt));
    }
    let h2 = 2.0 * dt;
    let mut out = Vec::with_capacity(n);
    // differences first so constant input yields exact zeros
    out.push(((series[1] - series[0]).scale(3.0) - (series[2] - series[1])).scale(1.0 / h2));
    for i in 1..n - 1 {
        out.push((series[i + 1] - series[i - 1]).scale(1.0 / h2));
    }
    out.push(((series[n - 1] - series[n - 2]).scale(3.0) - (series[n - 2] - series[n - 3])).scale(1.0 / h2));
    Ok(out)
}

/// First, second and third derivative series.
pub type Derivatives = (Vec<Vec3>, Vec<Vec3>, Vec<Vec3>);

/// Linear velocity, acceleration and jerk of a uniform window.
pub fn linear_derivatives(window: &TelemetryWindow) -> Result<Derivatives, KinematicsError> {
    let dt = uniform_dt(window)?;
    if window.len() < 4 {
        return Err(KinematicsError::TooShort { needed: 4, got: window.len() });
    }
    let pos: Vec<Vec3> = window.samples().iter().map(|s| s.pos).collect();
    let vel = differentiate(&pos, dt)?;
    let acc = differentiate(&vel, dt)?;
    let jerk = differentiate(&acc, dt)?;
    Ok((vel, acc, jerk))
}

/// Body-frame angular velocity of a uniform window.
pub fn angular_velocity(window: &TelemetryWindow) -> Result<Vec<Vec3>, KinematicsError> {
    let dt = uniform_dt(window)?;
    let q: Vec<Quat> = window.samples().iter().map(|s| s.quat).collect();
    angular_velocity_of(&q, dt)
}

/// Body-frame angular velocity of a uniformly sampled orientation sequence.
pub fn angular_velocity_of(q: &[Quat], dt: f64) -> Result<Vec<Vec3>, KinematicsError> {
    let n = q.len();
    if n < 3 {
        return Err(KinematicsError::TooShort { needed: 3, got: n });
    }
    if !(dt > 1e-9) {
        return Err(KinematicsError::TinyInterval(dt));
    }
    // rotation vector of q_j seen from q_k
    let rel = |k: usize, j: usize| (q[k].inverse() * q[j]).log();
    let h2 = 2.0 * dt;
    let mut out = Vec::with_capacity(n);
    out.push((rel(0, 1).scale(4.0) - rel(0, 2)).scale(1.0 / h2));
    for k in 1..n - 1 {
        out.push((rel(k, k + 1) - rel(k, k - 1)).scale(1.0 / h2));
    }
    out.push((rel(n - 1, n - 3) - rel(n - 1, n - 2).scale(4.0)).scale(1.0 / h2));
    Ok(out)
}

/// Angular acceleration and jerk from a uniform angular-velocity series.
pub fn angular_derivatives(omega: &[Vec3], dt: f64) -> Result<(Vec<Vec3>, Vec<Vec3>), KinematicsError> {
    let acc = differentiate(omega, dt)?;
    let jerk = differentiate(&acc, dt)?;
    Ok((acc, jerk))
}

/// All six channels of a uniform window.
pub fn kinematic_series(window: &TelemetryWindow) -> Result<KinematicSeries, KinematicsError> {
    let dt = uniform_dt(window)?;
    let (lin_vel, lin_acc, lin_jerk) = linear_derivatives(window)?;
    let ang_vel = angular_velocity(window)?;
    let (ang_acc, ang_jerk) = angular_derivatives(&ang_vel, dt)?;
    Ok(KinematicSeries {
        t: window.samples().iter().map(|s| s.t).collect(),
        lin_vel,
        lin_acc,
        lin_jerk,
        ang_vel,
        ang_acc,
        ang_jerk,
    })
}

/// Mean, population standard deviation and maximum.
pub fn moments(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (mean, libm::sqrt(var), max)
}

/// Feature vector of a uniform window.
pub fn features(window: &TelemetryWindow) -> Result<FeatureVector, KinematicsError> {
    let series = kinematic_series(window)?;
    let mut out = [0.0; N_FEATURES];
    let mut mags = Vec::with_capacity(window.len());
    for (c, channel) in series.channels().iter().enumerate() {
        mags.clear();
        mags.extend(channel.iter().map(|v| v.norm()));
        let (mean, std, max) = moments(&mags);
        out[3 * c] = mean;
        out[3 * c + 1] = std;
        out[3 * c + 2] = max;
    }
    let fv = FeatureVector(out);
    if !fv.is_finite() {
        return Err(KinematicsError::NonFinite);
    }
    Ok(fv)
}
