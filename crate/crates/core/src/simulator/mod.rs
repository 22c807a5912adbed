//! Deterministic closed-loop session simulation.
//!
//! The world advances one head sample at a time. Frames are produced by the
//! [`FramerateModel`] on their own clock, and a [`SicknessModel`] integrates
//! a latent sickness level from the head's angular speed and the current
//! comfort parameters. Every `eval_period_s` the most recent window is
//! featurized, scored, and (when enabled) handed to the controller, whose
//! new parameters take effect from the next sample.

use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::controller::{Action, ComfortParams, ConfigError, Controller, ControllerConfig};
use crate::forest::{ForestError, ForestModel};
use crate::kinematics::{self, FeatureVector, KinematicsError};
use crate::telemetry::{FrameTiming, TelemetryError, TelemetryStream, DEFAULT_WINDOW_S};

mod models;
mod motion;
mod session;

pub use models::{FramerateModel, SicknessModel};
pub use motion::{generate_motion, MotionKind, MotionProfile, EYE_HEIGHT_M};
pub use session::{compare_sessions, Comparison, SessionLog, SessionRow, SessionSummary, DISABLED_REASON};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid motion profile: {0}")]
    Profile(&'static str),
    #[error("invalid simulation config: {0}")]
    Config(&'static str),
    #[error("session logs differ: {0}")]
    Mismatch(&'static str),
    #[error(transparent)]
    Controller(#[from] ConfigError),
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Forest(#[from] ForestError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub controller: ControllerConfig,
    pub framerate: FramerateModel,
    pub sickness: SicknessModel,
    pub window_s: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            controller: ControllerConfig::default(),
            framerate: FramerateModel::default(),
            sickness: SicknessModel::default(),
            window_s: DEFAULT_WINDOW_S,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        self.controller.validate()?;
        self.framerate.validate()?;
        self.sickness.validate()?;
        if !(self.window_s > 0.0) {
            return Err(SimError::Config("window must be positive"));
        }
        if (self.framerate.fov_max - self.controller.fov_max).abs() > 1e-9 {
            return Err(SimError::Config("framerate and controller fov_max differ"));
        }
        Ok(())
    }
}

/// What a score source sees at an evaluation tick.
#[derive(Debug, Clone, Copy)]
pub struct ScoreInput<'a> {
    pub tick: usize,
    pub t: f64,
    pub features: &'a FeatureVector,
    /// Ground-truth latent sickness.
    pub latent: f64,
}

/// Produces the cybersickness score the controller acts on.
pub trait ScoreSource {
    fn score(&mut self, input: &ScoreInput<'_>) -> Result<f64, SimError>;
}

/// Uses the simulator's latent sickness as the score.
#[derive(Debug, Clone, Copy, Default)]
pub struct Oracle;

impl ScoreSource for Oracle {
    fn score(&mut self, input: &ScoreInput<'_>) -> Result<f64, SimError> {
        Ok(input.latent)
    }
}

impl ScoreSource for &ForestModel {
    fn score(&mut self, input: &ScoreInput<'_>) -> Result<f64, SimError> {
        Ok(self.predict(&input.features.0)?)
    }
}

impl ScoreSource for ForestModel {
    fn score(&mut self, input: &ScoreInput<'_>) -> Result<f64, SimError> {
        Ok(self.predict(&input.features.0)?)
    }
}

/// Runs one session. The motion stream depends only on `seed`, so sessions
/// with and without the controller see the same head motion.
pub fn simulate_session(
    profile: &MotionProfile,
    cfg: &SimConfig,
    source: &mut dyn ScoreSource,
    controller_enabled: bool,
    seed: u64,
) -> Result<SessionLog, SimError> {
    cfg.validate()?;
    let motion = generate_motion(profile, seed)?;
    let mut frame_rng = ChaCha8Rng::seed_from_u64(seed);
    frame_rng.set_stream(1);

    let ccfg = cfg.controller;
    let period = ccfg.eval_period_s;
    let mut controller = Controller::new(ccfg)?;
    let mut params: ComfortParams = ccfg.defaults();
    let mut stream = TelemetryStream::new((cfg.window_s + 2.0 * period).max(10.0));

    let t0 = motion[0].t;
    let mut frame_clock = t0;
    let mut pending_dt = 1.0 / cfg.framerate.sample(&params, &mut frame_rng);
    let mut inst_fps = 1.0 / pending_dt;
    let mut latent = 0.0;
    let mut next_eval = t0 + cfg.window_s;
    let mut rows = Vec::new();

    for (i, sample) in motion.iter().enumerate() {
        let t = sample.t;
        if i > 0 {
            let prev = &motion[i - 1];
            let dt = t - prev.t;
            let omega = (prev.quat.inverse() * sample.quat).angle() / dt;
            let stim = SicknessModel::stimulus(omega, params.fov_deg, ccfg.fov_max, inst_fps, ccfg.fps_threshold);
            latent = cfg.sickness.advance(latent, stim, dt);
        }
        stream.push_head(*sample).map_err(|_| SimError::Profile("generated stream not monotone"))?;
        while frame_clock + pending_dt <= t + 1e-12 {
            frame_clock += pending_dt;
            stream
                .push_frame(FrameTiming { t: frame_clock, dt_ms: pending_dt * 1000.0 })
                .map_err(|_| SimError::Config("frame clock did not advance"))?;
            inst_fps = 1.0 / pending_dt;
            pending_dt = 1.0 / cfg.framerate.sample(&params, &mut frame_rng);
        }
        if t + 1e-9 < next_eval {
            continue;
        }
        next_eval += period;

        let window = stream.window(cfg.window_s)?.resample(profile.rate)?;
        let features = kinematics::features(&window)?;
        let fps = stream.current_fps(period)?;
        let score = source.score(&ScoreInput { tick: rows.len(), t, features: &features, latent })?;
        let (action, reason) = if controller_enabled {
            let (p, d) = controller.step(t, score, fps);
            params = p;
            (Some(d.action), String::from(d.reason))
        } else {
            (None, String::from(DISABLED_REASON))
        };
        rows.push(SessionRow { t, latent, score, fps, ffr: params.ffr_level, fov: params.fov_deg, action, reason });
    }
    Ok(SessionLog { rows })
}

/// Convenience wrapper: simulate with the latent sickness as the score.
pub fn oracle_mode(
    profile: &MotionProfile,
    cfg: &SimConfig,
    controller_enabled: bool,
    seed: u64,
) -> Result<SessionLog, SimError> {
    simulate_session(profile, cfg, &mut Oracle, controller_enabled, seed)
}

/// Count of escalating actions in a log.
pub fn escalations(log: &SessionLog) -> usize {
    log.rows.iter().filter(|r| r.action.is_some_and(Action::is_escalation)).count()
}
