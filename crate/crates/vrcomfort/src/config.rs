//! `key = value` text files for the controller, the service and simulation
//! scenarios.
//!
//! Blank lines and `#` comments are ignored. Keys may appear once; unknown
//! keys are an error so typos do not silently fall back to defaults.
//!
//! Controller keys: `score_threshold`, `fps_threshold`, `ffr_max`,
//! `fov_max`, `fov_min`, `fov_step`, `eval_period`, `hysteresis`,
//! `relax_dwell`. Service files add `window`, `rate` and `queue_capacity`.
//! Scenario files add `profile`, `seed`, `model` (a path or `oracle`),
//! `controller` (`on`/`off`), motion overrides (`duration`, `rate`,
//! `angular_amp`, `pos_amp`, `freq`, `noise`), framerate model keys
//! (`base_fps`, `ffr_gain`, `fov_exponent`, `jitter`), sickness model keys
//! (`sickness_gain`, `sickness_decay`) and `window`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use vrcomfort_core::simulator::{MotionKind, MotionProfile, SimConfig};
use vrcomfort_core::telemetry::{DEFAULT_RATE_HZ, DEFAULT_WINDOW_S};
use vrcomfort_core::ControllerConfig;

use crate::error::{read_to_string, Error, Result};

/// Parsed `key = value` pairs that are consumed by typed getters.
#[derive(Debug)]
pub struct KeyValues {
    path: PathBuf,
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config { path: path.to_path_buf(), line, message };
            let Some((k, v)) = content.split_once('=') else {
                return Err(err(format!("expected `key = value`, found `{content}`")));
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(err(format!("invalid key `{k}`")));
            }
            if v.is_empty() {
                return Err(err(format!("missing value for `{k}`")));
            }
            if let Some((first, _)) = entries.insert(k.to_string(), (line, v.to_string())) {
                return Err(err(format!("`{k}` already set on line {first}")));
            }
        }
        Ok(KeyValues { path: path.to_path_buf(), entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(path, &read_to_string(path)?)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn error(&self, line: usize, message: String) -> Error {
        Error::Config { path: self.path.clone(), line, message }
    }

    pub fn take_str(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    pub fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => {
                v.parse().map(Some).map_err(|_| self.error(line, format!("`{key}`: cannot parse `{v}`")))
            }
        }
    }

    fn set<T: FromStr>(&mut self, key: &str, slot: &mut T) -> Result<()> {
        if let Some(v) = self.take(key)? {
            *slot = v;
        }
        Ok(())
    }

    pub fn take_switch(&mut self, key: &str) -> Result<Option<bool>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => match v.as_str() {
                "on" | "true" | "yes" => Ok(Some(true)),
                "off" | "false" | "no" => Ok(Some(false)),
                _ => Err(self.error(line, format!("`{key}`: expected on/off, found `{v}`"))),
            },
        }
    }

    /// Fails on the first key nobody consumed.
    pub fn finish(self) -> Result<()> {
        match self.entries.iter().min_by_key(|(_, (line, _))| *line) {
            None => Ok(()),
            Some((k, (line, _))) => Err(self.error(*line, format!("unknown key `{k}`"))),
        }
    }
}

fn invalid(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Invalid(format!("{}: {e}", path.display()))
}

/// Applies controller keys onto `cfg`.
pub fn apply_controller(kv: &mut KeyValues, cfg: &mut ControllerConfig) -> Result<()> {
    kv.set("score_threshold", &mut cfg.score_threshold)?;
    kv.set("fps_threshold", &mut cfg.fps_threshold)?;
    kv.set("ffr_max", &mut cfg.ffr_max)?;
    kv.set("fov_max", &mut cfg.fov_max)?;
    kv.set("fov_min", &mut cfg.fov_min)?;
    kv.set("fov_step", &mut cfg.fov_step)?;
    kv.set("eval_period", &mut cfg.eval_period_s)?;
    kv.set("hysteresis", &mut cfg.hysteresis)?;
    kv.set("relax_dwell", &mut cfg.relax_dwell_s)?;
    Ok(())
}

pub fn load_controller_config(path: &Path) -> Result<ControllerConfig> {
    let mut kv = KeyValues::load(path)?;
    let mut cfg = ControllerConfig::default();
    apply_controller(&mut kv, &mut cfg)?;
    kv.finish()?;
    cfg.validate().map_err(|e| invalid(path, e))?;
    Ok(cfg)
}

/// Controller keys in file order, suitable for writing a config file.
pub fn controller_config_text(cfg: &ControllerConfig) -> String {
    let mut s = String::new();
    for (k, v) in controller_pairs(cfg) {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

pub fn controller_pairs(cfg: &ControllerConfig) -> [(&'static str, String); 9] {
    [
        ("score_threshold", cfg.score_threshold.to_string()),
        ("fps_threshold", cfg.fps_threshold.to_string()),
        ("ffr_max", cfg.ffr_max.to_string()),
        ("fov_max", cfg.fov_max.to_string()),
        ("fov_min", cfg.fov_min.to_string()),
        ("fov_step", cfg.fov_step.to_string()),
        ("eval_period", cfg.eval_period_s.to_string()),
        ("hysteresis", cfg.hysteresis.to_string()),
        ("relax_dwell", cfg.relax_dwell_s.to_string()),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceConfig {
    pub controller: ControllerConfig,
    pub window_s: f64,
    /// Rate windows are resampled to before featurizing.
    pub rate_hz: f64,
    /// Inbound queue bound; the oldest record is dropped on overflow.
    pub queue_capacity: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            controller: ControllerConfig::default(),
            window_s: DEFAULT_WINDOW_S,
            rate_hz: DEFAULT_RATE_HZ,
            queue_capacity: 1024,
        }
    }
}

impl ServiceConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        self.controller.validate().map_err(|e| e.to_string())?;
        if !(self.window_s > 0.0 && self.window_s.is_finite()) {
            return Err("window must be positive".into());
        }
        if !(self.rate_hz > 0.0 && self.rate_hz.is_finite()) {
            return Err("rate must be positive".into());
        }
        if self.queue_capacity == 0 {
            return Err("queue_capacity must be positive".into());
        }
        Ok(())
    }
}

pub fn load_service_config(path: &Path) -> Result<ServiceConfig> {
    let mut kv = KeyValues::load(path)?;
    let mut cfg = ServiceConfig::default();
    apply_controller(&mut kv, &mut cfg.controller)?;
    kv.set("window", &mut cfg.window_s)?;
    kv.set("rate", &mut cfg.rate_hz)?;
    kv.set("queue_capacity", &mut cfg.queue_capacity)?;
    kv.finish()?;
    cfg.validate().map_err(|e| invalid(path, e))?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScoreModel {
    /// Use the simulator's latent sickness as the score.
    Oracle,
    Path(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub profile: MotionProfile,
    pub sim: SimConfig,
    pub seed: u64,
    pub model: ScoreModel,
    pub controller_enabled: bool,
}

/// Parses a scenario; a relative `model` path is resolved against the
/// scenario file's directory.
pub fn parse_scenario(kv: &mut KeyValues) -> Result<Scenario> {
    let (line, kind) = kv.take_str("profile").ok_or_else(|| kv.error(0, "missing `profile`".into()))?;
    let kind = MotionKind::parse(&kind)
        .ok_or_else(|| kv.error(line, format!("unknown profile `{kind}` (static, walk, spin, stress)")))?;
    let mut profile = MotionProfile::preset(kind);
    kv.set("duration", &mut profile.duration)?;
    kv.set("rate", &mut profile.rate)?;
    kv.set("angular_amp", &mut profile.angular_amp)?;
    kv.set("pos_amp", &mut profile.pos_amp)?;
    kv.set("freq", &mut profile.freq)?;
    kv.set("noise", &mut profile.noise)?;

    let mut sim = SimConfig::default();
    apply_controller(kv, &mut sim.controller)?;
    sim.framerate.fov_max = sim.controller.fov_max;
    kv.set("base_fps", &mut sim.framerate.base_fps)?;
    kv.set("ffr_gain", &mut sim.framerate.ffr_gain)?;
    kv.set("fov_exponent", &mut sim.framerate.fov_exponent)?;
    kv.set("jitter", &mut sim.framerate.jitter_std)?;
    kv.set("sickness_gain", &mut sim.sickness.gain)?;
    kv.set("sickness_decay", &mut sim.sickness.decay)?;
    kv.set("window", &mut sim.window_s)?;

    let seed = kv.take("seed")?.unwrap_or(0);
    let model = match kv.take_str("model") {
        None => ScoreModel::Oracle,
        Some((_, m)) if m == "oracle" => ScoreModel::Oracle,
        Some((_, m)) => {
            let p = PathBuf::from(m);
            let base = kv.path().parent().unwrap_or(Path::new(""));
            ScoreModel::Path(if p.is_relative() { base.join(p) } else { p })
        }
    };
    let controller_enabled = kv.take_switch("controller")?.unwrap_or(true);
    sim.validate().map_err(|e| invalid(kv.path(), e))?;
    Ok(Scenario { profile, sim, seed, model, controller_enabled })
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let mut kv = KeyValues::load(path)?;
    let s = parse_scenario(&mut kv)?;
    kv.finish()?;
    Ok(s)
}
