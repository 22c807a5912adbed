//! Head-tracking and frame-timing ingestion.
//!
//! A [`TelemetryStream`] keeps the most recent `capacity` seconds of head
//! samples and frame timings in ring buffers. Windows handed out by
//! [`TelemetryStream::window`] are owned snapshots, so they can be moved to
//! another execution context while ingestion continues.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::math::{Quat, Vec3};

/// Default evaluation window in seconds.
pub const DEFAULT_WINDOW_S: f64 = 3.0;
/// Default ring-buffer length in seconds.
pub const DEFAULT_CAPACITY_S: f64 = 10.0;
/// Nominal head-tracking rate (matches a 72 Hz headset refresh).
pub const DEFAULT_RATE_HZ: f64 = 72.0;
/// Minimum samples in a window (third derivative needs four points).
pub const MIN_WINDOW_SAMPLES: usize = 4;
/// Fraction of the requested window width that the samples must span.
pub const MIN_SPAN_FRACTION: f64 = 0.9;

const TIME_EPS: f64 = 1e-9;

/// Timestamped head pose. `quat` is stored unit-norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadSample {
    pub t: f64,
    pub pos: Vec3,
    pub quat: Quat,
}

impl HeadSample {
    pub fn new(t: f64, pos: Vec3, quat: Quat) -> Self {
        HeadSample { t, pos, quat }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTiming {
    pub t: f64,
    pub dt_ms: f64,
}

impl FrameTiming {
    pub fn fps(&self) -> f64 {
        1000.0 / self.dt_ms
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum Rejection {
    #[error("non-finite field `{0}`")]
    NonFinite(&'static str),
    #[error("timestamp does not exceed the previous sample")]
    NonMonotonic,
    #[error("zero-norm quaternion")]
    ZeroQuaternion,
    #[error("frame time must be positive")]
    NonPositiveFrameTime,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum TelemetryError {
    #[error(
        "insufficient data: {samples} samples spanning {span:.3} s (need {MIN_WINDOW_SAMPLES} spanning {needed:.3} s)"
    )]
    InsufficientData { samples: usize, span: f64, needed: f64 },
    #[error("no frame timings in window")]
    NoFrames,
    #[error("invalid parameter: {0}")]
    Parameter(&'static str),
}

/// Bounded buffers of head samples and frame timings.
#[derive(Debug, Clone)]
pub struct TelemetryStream {
    capacity_s: f64,
    head: VecDeque<HeadSample>,
    frames: VecDeque<FrameTiming>,
}

impl Default for TelemetryStream {
    fn default() -> Self {
        TelemetryStream::new(DEFAULT_CAPACITY_S)
    }
}

impl TelemetryStream {
    pub fn new(capacity_s: f64) -> Self {
        TelemetryStream { capacity_s, head: VecDeque::new(), frames: VecDeque::new() }
    }

    pub fn capacity_s(&self) -> f64 {
        self.capacity_s
    }

    pub fn head_len(&self) -> usize {
        self.head.len()
    }

    pub fn frame_len(&self) -> usize {
        self.frames.len()
    }

    pub fn head_samples(&self) -> impl Iterator<Item = &HeadSample> {
        self.head.iter()
    }

    pub fn last_head_t(&self) -> Option<f64> {
        self.head.back().map(|s| s.t)
    }

    pub fn clear(&mut self) {
        self.head.clear();
        self.frames.clear();
    }

    /// Appends a head sample after validation. The quaternion is normalized
    /// and its sign flipped if needed to stay on the same hemisphere as the
    /// previous sample.
    pub fn push_head(&mut self, sample: HeadSample) -> Result<(), Rejection> {
        if !sample.t.is_finite() {
            return Err(Rejection::NonFinite("t"));
        }
        if !sample.pos.is_finite() {
            return Err(Rejection::NonFinite("pos"));
        }
        if !sample.quat.is_finite() {
            return Err(Rejection::NonFinite("quat"));
        }
        if sample.quat.norm() == 0.0 {
            return Err(Rejection::ZeroQuaternion);
        }
        let mut quat = sample.quat.normalized();
        if let Some(prev) = self.head.back() {
            if sample.t <= prev.t {
                return Err(Rejection::NonMonotonic);
            }
            if prev.quat.dot(quat) < 0.0 {
                quat = -quat;
            }
        }
        self.head.push_back(HeadSample { quat, ..sample });
        while let (Some(front), Some(back)) = (self.head.front(), self.head.back()) {
            if back.t - front.t >= self.capacity_s - TIME_EPS {
                self.head.pop_front();
            } else {
                break;
            }
        }
        Ok(())
    }

    pub fn push_frame(&mut self, frame: FrameTiming) -> Result<(), Rejection> {
        if !frame.t.is_finite() {
            return Err(Rejection::NonFinite("t"));
        }
        if !frame.dt_ms.is_finite() {
            return Err(Rejection::NonFinite("dt_ms"));
        }
        if frame.dt_ms <= 0.0 {
            return Err(Rejection::NonPositiveFrameTime);
        }
        if let Some(prev) = self.frames.back() {
            if frame.t <= prev.t {
                return Err(Rejection::NonMonotonic);
            }
        }
        self.frames.push_back(frame);
        while let (Some(front), Some(back)) = (self.frames.front(), self.frames.back()) {
            if back.t - front.t >= self.capacity_s - TIME_EPS {
                self.frames.pop_front();
            } else {
                break;
            }
        }
        Ok(())
    }

    /// Snapshot of the samples in `(t_end - width, t_end]`, where `t_end` is
    /// the newest sample.
    pub fn window(&self, width: f64) -> Result<TelemetryWindow, TelemetryError> {
        if !(width > 0.0) {
            return Err(TelemetryError::Parameter("window width must be positive"));
        }
        let Some(last) = self.head.back() else {
            return Err(TelemetryError::InsufficientData { samples: 0, span: 0.0, needed: MIN_SPAN_FRACTION * width });
        };
        let t_end = last.t;
        let start = self.head.partition_point(|s| t_end - s.t >= width - TIME_EPS);
        let samples: Vec<HeadSample> = self.head.range(start..).copied().collect();
        TelemetryWindow::checked(samples, width)
    }

    /// Frames per second over the frames stamped in `(t_end - width, t_end]`,
    /// computed as frame count over summed frame time.
    pub fn current_fps(&self, width: f64) -> Result<f64, TelemetryError> {
        let Some(last) = self.frames.back() else {
            return Err(TelemetryError::NoFrames);
        };
        let t_end = last.t;
        let (count, total_ms) = self
            .frames
            .iter()
            .rev()
            .take_while(|f| t_end - f.t < width - TIME_EPS)
            .fold((0usize, 0.0), |(n, ms), f| (n + 1, ms + f.dt_ms));
        if count == 0 {
            return Err(TelemetryError::NoFrames);
        }
        Ok(count as f64 / (total_ms / 1000.0))
    }
}

/// Contiguous, time-ordered head samples. `rate` is `Some` only for windows
/// on a uniform grid (output of [`TelemetryWindow::resample`]).
#[derive(Debug, Clone, PartialEq)]
pub struct TelemetryWindow {
    samples: Vec<HeadSample>,
    width: f64,
    rate: Option<f64>,
}

impl TelemetryWindow {
    /// Builds a window from raw samples, enforcing ordering, sample count and
    /// span. Quaternions are normalized and sign-fixed along the sequence.
    pub fn from_samples(samples: Vec<HeadSample>, width: f64) -> Result<Self, TelemetryError> {
        if samples.windows(2).any(|p| !(p[1].t > p[0].t)) {
            return Err(TelemetryError::Parameter("timestamps must strictly increase"));
        }
        let mut samples = samples;
        sign_fix(&mut samples);
        TelemetryWindow::checked(samples, width)
    }

    fn checked(samples: Vec<HeadSample>, width: f64) -> Result<Self, TelemetryError> {
        let span = match (samples.first(), samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        };
        let needed = MIN_SPAN_FRACTION * width;
        if samples.len() < MIN_WINDOW_SAMPLES || span < needed - TIME_EPS {
            return Err(TelemetryError::InsufficientData { samples: samples.len(), span, needed });
        }
        Ok(TelemetryWindow { samples, width, rate: None })
    }

    /// Wraps samples that are already on a uniform grid at `rate`, without
    /// span checks. Used for synthetic trajectories and tests.
    pub fn uniform(samples: Vec<HeadSample>, rate: f64) -> Result<Self, TelemetryError> {
        if !(rate > 0.0) {
            return Err(TelemetryError::Parameter("rate must be positive"));
        }
        if samples.len() < MIN_WINDOW_SAMPLES {
            let span = samples.last().map_or(0.0, |b| b.t - samples[0].t);
            return Err(TelemetryError::InsufficientData { samples: samples.len(), span, needed: 0.0 });
        }
        let dt = 1.0 / rate;
        let t0 = samples[0].t;
        let on_grid = samples.iter().enumerate().all(|(i, s)| (s.t - (t0 + i as f64 * dt)).abs() <= 1e-6 * dt.max(1.0));
        if !on_grid {
            return Err(TelemetryError::Parameter("samples are not on a uniform grid"));
        }
        let mut samples = samples;
        sign_fix(&mut samples);
        let width = samples[samples.len() - 1].t - t0;
        Ok(TelemetryWindow { samples, width, rate: Some(rate) })
    }

    pub fn samples(&self) -> &[HeadSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn rate(&self) -> Option<f64> {
        self.rate
    }

    pub fn t_start(&self) -> f64 {
        self.samples[0].t
    }

    pub fn t_end(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    pub fn span(&self) -> f64 {
        self.t_end() - self.t_start()
    }

    /// Resamples onto a uniform grid starting at the first sample. Positions
    /// are linearly interpolated, orientations slerped along the shortest arc.
    pub fn resample(&self, rate: f64) -> Result<TelemetryWindow, TelemetryError> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(TelemetryError::Parameter("rate must be positive"));
        }
        let t0 = self.t_start();
        let n = libm::floor(self.span() * rate + 1e-6) as usize + 1;
        if n < MIN_WINDOW_SAMPLES {
            return Err(TelemetryError::InsufficientData {
                samples: n,
                span: self.span(),
                needed: (MIN_WINDOW_SAMPLES - 1) as f64 / rate,
            });
        }
        let src = &self.samples;
        let mut out = Vec::with_capacity(n);
        let mut j = 0usize;
        for k in 0..n {
            let t = t0 + k as f64 / rate;
            while j + 2 < src.len() && src[j + 1].t <= t {
                j += 1;
            }
            let (a, b) = (&src[j], &src[(j + 1).min(src.len() - 1)]);
            let u = if b.t > a.t { ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0) } else { 0.0 };
            out.push(HeadSample { t, pos: a.pos.lerp(b.pos, u), quat: a.quat.slerp(b.quat, u) });
        }
        sign_fix(&mut out);
        Ok(TelemetryWindow { samples: out, width: self.width, rate: Some(rate) })
    }
}

/// Normalizes quaternions and flips signs so consecutive samples have a
/// non-negative dot product.
pub fn sign_fix(samples: &mut [HeadSample]) {
    let mut prev: Option<Quat> = None;
    for s in samples.iter_mut() {
        let mut q = s.quat.normalized();
        if let Some(p) = prev {
            if p.dot(q) < 0.0 {
                q = -q;
            }
        }
        s.quat = q;
        prev = Some(q);
    }
}
