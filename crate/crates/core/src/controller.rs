//! Rule-based comfort controller.
//!
//! Each evaluation tick maps the predicted sickness score and the measured
//! framerate to one action on two knobs: fixed-foveated-rendering level and
//! horizontal field of view. While the score is above threshold the
//! controller escalates, preferring FFR when the framerate is short and FOV
//! reduction when it is not. Once the score has stayed at least `hysteresis`
//! below threshold for `relax_dwell_s`, it undoes one notch per tick in the
//! reverse order (FOV first, then FFR).
//!
//! | score           | fps   | knobs                           | action      |
//! |-----------------|-------|---------------------------------|-------------|
//! | > S             | < F   | ffr < max                       | IncreaseFfr |
//! | > S             | < F   | ffr = max, fov > min            | ReduceFov   |
//! | > S             | >= F  | fov > min                       | ReduceFov   |
//! | > S             | >= F  | fov = min, ffr < max            | IncreaseFfr |
//! | > S             | any   | ffr = max, fov = min            | AtLimits    |
//! | <= S-h, dwell   | any   | not at defaults                 | Relax       |
//! | otherwise       |       |                                 | Hold        |

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    /// Sickness score above which the controller escalates (VRSQ scale).
    pub score_threshold: f64,
    /// Framerate below which FFR is preferred.
    pub fps_threshold: f64,
    pub ffr_max: u8,
    pub fov_max: f64,
    pub fov_min: f64,
    pub fov_step: f64,
    pub eval_period_s: f64,
    /// Score margin below threshold required before relaxing.
    pub hysteresis: f64,
    /// Time the score must stay below `threshold - hysteresis` before relaxing.
    pub relax_dwell_s: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            score_threshold: 30.0,
            fps_threshold: 65.0,
            ffr_max: 4,
            fov_max: 110.0,
            fov_min: 70.0,
            fov_step: 5.0,
            eval_period_s: 1.0,
            hysteresis: 5.0,
            relax_dwell_s: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("invalid controller config: {0}")]
pub struct ConfigError(pub &'static str);

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let all = [
            self.score_threshold,
            self.fps_threshold,
            self.fov_max,
            self.fov_min,
            self.fov_step,
            self.eval_period_s,
            self.hysteresis,
            self.relax_dwell_s,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError("non-finite value"));
        }
        if !(self.fov_min < self.fov_max) {
            return Err(ConfigError("fov_min must be below fov_max"));
        }
        if self.fov_min <= 0.0 {
            return Err(ConfigError("fov_min must be positive"));
        }
        if self.fov_step <= 0.0 || self.eval_period_s <= 0.0 {
            return Err(ConfigError("steps and periods must be positive"));
        }
        if self.ffr_max == 0 {
            return Err(ConfigError("ffr_max must be positive"));
        }
        if self.hysteresis < 0.0 || self.relax_dwell_s < 0.0 {
            return Err(ConfigError("hysteresis and dwell must be nonnegative"));
        }
        Ok(())
    }

    pub fn defaults(&self) -> ComfortParams {
        ComfortParams { ffr_level: 0, fov_deg: self.fov_max }
    }

    /// Adjustments needed to go from defaults to both limits.
    pub fn escalation_steps(&self) -> usize {
        self.ffr_max as usize + libm::ceil((self.fov_max - self.fov_min) / self.fov_step - 1e-9) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComfortParams {
    /// 0 = off, `ffr_max` = strongest.
    pub ffr_level: u8,
    pub fov_deg: f64,
}

impl ComfortParams {
    pub fn within(&self, cfg: &ControllerConfig) -> bool {
        self.ffr_level <= cfg.ffr_max && self.fov_deg >= cfg.fov_min && self.fov_deg <= cfg.fov_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    IncreaseFfr,
    ReduceFov,
    Hold,
    Relax,
    AtLimits,
}

impl Action {
    pub fn name(self) -> &'static str {
        match self {
            Action::IncreaseFfr => "increase_ffr",
            Action::ReduceFov => "reduce_fov",
            Action::Hold => "hold",
            Action::Relax => "relax",
            Action::AtLimits => "at_limits",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "increase_ffr" => Action::IncreaseFfr,
            "reduce_fov" => Action::ReduceFov,
            "hold" => Action::Hold,
            "relax" => Action::Relax,
            "at_limits" => Action::AtLimits,
            _ => return None,
        })
    }

    /// True for the two escalating actions.
    pub fn is_escalation(self) -> bool {
        matches!(self, Action::IncreaseFfr | Action::ReduceFov)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Why a rule fired. Stable strings, safe for CSV.
pub mod reason {
    pub const LOW_FPS_RAISE_FFR: &str = "score high and fps low: raise FFR";
    pub const FPS_OK_REDUCE_FOV: &str = "score high and fps ok: reduce FOV";
    pub const FFR_SATURATED_REDUCE_FOV: &str = "score high and fps low with FFR at max: reduce FOV";
    pub const FOV_SATURATED_RAISE_FFR: &str = "score high and fps ok with FOV at min: raise FFR";
    pub const AT_LIMITS: &str = "score high with FFR and FOV at limits";
    pub const RELAX_FOV: &str = "score low past dwell: restore FOV";
    pub const RELAX_FFR: &str = "score low past dwell: lower FFR";
    pub const HOLD: &str = "no change";
    pub const HOLD_DWELL: &str = "score low; waiting for dwell";
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub action: Action,
    pub reason: &'static str,
    pub score: f64,
    pub fps: f64,
}

/// Decision table. `low_for_s` is how long the score has continuously been
/// at or below `threshold - hysteresis` (0 when it is not).
pub fn decide(score: f64, fps: f64, params: &ComfortParams, cfg: &ControllerConfig, low_for_s: f64) -> Decision {
    let ffr_room = params.ffr_level < cfg.ffr_max;
    let fov_room = params.fov_deg > cfg.fov_min;
    let (action, reason) = if score > cfg.score_threshold {
        match (fps < cfg.fps_threshold, ffr_room, fov_room) {
            (true, true, _) => (Action::IncreaseFfr, reason::LOW_FPS_RAISE_FFR),
            (true, false, true) => (Action::ReduceFov, reason::FFR_SATURATED_REDUCE_FOV),
            (false, _, true) => (Action::ReduceFov, reason::FPS_OK_REDUCE_FOV),
            (false, true, false) => (Action::IncreaseFfr, reason::FOV_SATURATED_RAISE_FFR),
            (_, false, false) => (Action::AtLimits, reason::AT_LIMITS),
        }
    } else if *params == cfg.defaults() {
        (Action::Hold, reason::HOLD)
    } else if score <= cfg.score_threshold - cfg.hysteresis {
        if low_for_s >= cfg.relax_dwell_s - 1e-9 {
            if params.fov_deg < cfg.fov_max {
                (Action::Relax, reason::RELAX_FOV)
            } else {
                (Action::Relax, reason::RELAX_FFR)
            }
        } else {
            (Action::Hold, reason::HOLD_DWELL)
        }
    } else {
        (Action::Hold, reason::HOLD)
    };
    Decision { action, reason, score, fps }
}

/// Applies an action to the knobs, clamped to the configured bounds.
pub fn apply(action: Action, params: &ComfortParams, cfg: &ControllerConfig) -> ComfortParams {
    let mut p = *params;
    match action {
        Action::IncreaseFfr => p.ffr_level = (p.ffr_level + 1).min(cfg.ffr_max),
        Action::ReduceFov => p.fov_deg = (p.fov_deg - cfg.fov_step).max(cfg.fov_min),
        Action::Relax => {
            if p.fov_deg < cfg.fov_max {
                p.fov_deg = (p.fov_deg + cfg.fov_step).min(cfg.fov_max);
            } else {
                p.ffr_level = p.ffr_level.saturating_sub(1);
            }
        }
        Action::Hold | Action::AtLimits => {}
    }
    p
}

/// One row of controller history; `params` is the state after the action.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRecord {
    pub t: f64,
    pub score: f64,
    pub fps: f64,
    pub params: ComfortParams,
    pub action: Action,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Controller {
    config: ControllerConfig,
    params: ComfortParams,
    low_since: Option<f64>,
    history: Vec<DecisionRecord>,
}

impl Controller {
    pub fn new(config: ControllerConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        Ok(Controller { params: config.defaults(), config, low_since: None, history: Vec::new() })
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.config
    }

    pub fn params(&self) -> ComfortParams {
        self.params
    }

    pub fn history(&self) -> &[DecisionRecord] {
        &self.history
    }

    /// Time the score has been continuously low as of `t`.
    pub fn low_for(&self, t: f64) -> f64 {
        self.low_since.map_or(0.0, |s| t - s)
    }

    /// Evaluates one tick at time `t` and applies the resulting action.
    pub fn step(&mut self, t: f64, score: f64, fps: f64) -> (ComfortParams, Decision) {
        if score <= self.config.score_threshold - self.config.hysteresis {
            self.low_since.get_or_insert(t);
        } else {
            self.low_since = None;
        }
        let decision = decide(score, fps, &self.params, &self.config, self.low_for(t));
        self.params = apply(decision.action, &self.params, &self.config);
        self.history.push(DecisionRecord {
            t,
            score,
            fps,
            params: self.params,
            action: decision.action,
            reason: String::from(decision.reason),
        });
        (self.params, decision)
    }
}
