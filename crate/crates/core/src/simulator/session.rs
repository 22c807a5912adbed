use alloc::string::String;
use alloc::vec::Vec;

use super::SimError;
use crate::controller::{Action, ControllerConfig};

/// Reason string on rows of a session run without the controller.
pub const DISABLED_REASON: &str = "controller disabled";

/// One evaluation tick. `ffr`/`fov` are the parameters after the tick's
/// action; `action` is `None` when the controller is disabled.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionRow {
    pub t: f64,
    /// Synthetic latent sickness (ground truth of the simulator).
    pub latent: f64,
    /// Score the controller saw.
    pub score: f64,
    pub fps: f64,
    pub ffr: u8,
    pub fov: f64,
    pub action: Option<Action>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SessionLog {
    pub rows: Vec<SessionRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionSummary {
    pub ticks: usize,
    pub duration: f64,
    pub mean_latent: f64,
    pub max_latent: f64,
    pub final_latent: f64,
    pub fps_min: f64,
    pub fps_mean: f64,
    /// Ticks whose measured fps was below the threshold.
    pub fps_violations: usize,
    /// Mean fps over the ticks after the last escalating action; `None` if
    /// the controller never escalated or escalated on the last tick.
    pub fps_mean_post_escalation: Option<f64>,
    /// Ticks whose action changed the parameters.
    pub adjustments: usize,
    pub escalations: usize,
    /// Ticks with a restricted field of view (immersion proxy).
    pub restricted_ticks: usize,
    pub mean_fov: f64,
    pub min_fov: f64,
    pub max_ffr: u8,
}

impl SessionLog {
    pub fn summary(&self, cfg: &ControllerConfig) -> Result<SessionSummary, SimError> {
        let fps_threshold = cfg.fps_threshold;
        let rows = &self.rows;
        let (Some(first), Some(last)) = (rows.first(), rows.last()) else {
            return Err(SimError::Mismatch("empty session log"));
        };
        let n = rows.len() as f64;
        let last_escalation = rows.iter().rposition(|r| r.action.is_some_and(Action::is_escalation));
        let post: Vec<f64> = match last_escalation {
            Some(i) => rows[i + 1..].iter().map(|r| r.fps).collect(),
            None => Vec::new(),
        };
        Ok(SessionSummary {
            ticks: rows.len(),
            duration: last.t - first.t,
            mean_latent: rows.iter().map(|r| r.latent).sum::<f64>() / n,
            max_latent: rows.iter().map(|r| r.latent).fold(f64::NEG_INFINITY, f64::max),
            final_latent: last.latent,
            fps_min: rows.iter().map(|r| r.fps).fold(f64::INFINITY, f64::min),
            fps_mean: rows.iter().map(|r| r.fps).sum::<f64>() / n,
            fps_violations: rows.iter().filter(|r| r.fps < fps_threshold).count(),
            fps_mean_post_escalation: (!post.is_empty()).then(|| post.iter().sum::<f64>() / post.len() as f64),
            adjustments: rows
                .iter()
                .filter(|r| matches!(r.action, Some(Action::IncreaseFfr | Action::ReduceFov | Action::Relax)))
                .count(),
            escalations: rows.iter().filter(|r| r.action.is_some_and(Action::is_escalation)).count(),
            restricted_ticks: rows.iter().filter(|r| r.fov < cfg.fov_max).count(),
            mean_fov: rows.iter().map(|r| r.fov).sum::<f64>() / n,
            min_fov: rows.iter().map(|r| r.fov).fold(f64::INFINITY, f64::min),
            max_ffr: rows.iter().map(|r| r.ffr).max().unwrap_or(0),
        })
    }
}

/// Adaptive-minus-baseline deltas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub baseline: SessionSummary,
    pub adaptive: SessionSummary,
    pub delta_mean_latent: f64,
    pub delta_final_latent: f64,
    pub delta_max_latent: f64,
    pub delta_fps_min: f64,
    pub delta_fps_mean: f64,
    /// Relative reduction of final latent sickness, `1 - adaptive/baseline`
    /// (`None` when the baseline ends at zero).
    pub final_latent_reduction: Option<f64>,
}

pub fn compare_sessions(
    baseline: &SessionLog,
    adaptive: &SessionLog,
    cfg: &ControllerConfig,
) -> Result<Comparison, SimError> {
    if baseline.rows.len() != adaptive.rows.len() {
        return Err(SimError::Mismatch("tick counts differ"));
    }
    let b = baseline.summary(cfg)?;
    let a = adaptive.summary(cfg)?;
    if (a.duration - b.duration).abs() > 1e-9 {
        return Err(SimError::Mismatch("durations differ"));
    }
    Ok(Comparison {
        baseline: b,
        adaptive: a,
        delta_mean_latent: a.mean_latent - b.mean_latent,
        delta_final_latent: a.final_latent - b.final_latent,
        delta_max_latent: a.max_latent - b.max_latent,
        delta_fps_min: a.fps_min - b.fps_min,
        delta_fps_mean: a.fps_mean - b.fps_mean,
        final_latent_reduction: (b.final_latent > 0.0).then(|| 1.0 - a.final_latent / b.final_latent),
    })
}
