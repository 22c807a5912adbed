//! Labeled training data: window alignment, standardization, splitting and
//! the synthetic planted-signal generator.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::kinematics::{self, FeatureVector, KinematicsError, N_FEATURES};
use crate::telemetry::{HeadSample, TelemetryError, TelemetryWindow, DEFAULT_RATE_HZ, DEFAULT_WINDOW_S};

mod synth;

pub use synth::{synth_dataset, SynthConfig, SynthData};

const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("no VRSQ score for participant(s): {}", .0.join(", "))]
    MissingScores(Vec<String>),
    #[error("dataset is empty")]
    Empty,
    #[error("test fraction {0} not in (0, 1)")]
    Fraction(f64),
    #[error("split leaves one side empty ({0} rows or groups)")]
    DegenerateSplit(usize),
    #[error("target {0} outside [0, 100]")]
    Target(f64),
    #[error("row has {got} features, expected {expected}")]
    Arity { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    Config(&'static str),
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

/// One featurized window with its cybersickness label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledWindow {
    pub participant_id: String,
    /// Window end on the capture clock.
    pub t_end: f64,
    pub features: FeatureVector,
    pub target: f64,
}

/// Head-tracking capture of one participant.
#[derive(Debug, Clone, PartialEq)]
pub struct Capture {
    pub participant_id: String,
    pub samples: Vec<HeadSample>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignConfig {
    pub window_s: f64,
    pub stride_s: f64,
    pub rate_hz: f64,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig { window_s: DEFAULT_WINDOW_S, stride_s: 1.0, rate_hz: DEFAULT_RATE_HZ }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlignWarning {
    /// Capture shorter than one window.
    TooShort { participant_id: String, duration: f64 },
    /// A window inside the capture had a gap and was skipped.
    SkippedWindow { participant_id: String, t_end: f64 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Aligned {
    pub windows: Vec<LabeledWindow>,
    pub warnings: Vec<AlignWarning>,
}

/// Window ends `t0 + W + j·stride` that fit inside a capture of the given
/// first/last timestamps.
pub fn window_ends(t_first: f64, t_last: f64, window_s: f64, stride_s: f64) -> Vec<f64> {
    let mut ends = Vec::new();
    let mut j = 0usize;
    loop {
        let e = t_first + window_s + j as f64 * stride_s;
        if e > t_last + TIME_EPS {
            break;
        }
        ends.push(e);
        j += 1;
    }
    ends
}

/// Samples of `samples` (sorted by time) lying in `(end - width, end]`.
pub fn window_slice(samples: &[HeadSample], end: f64, width: f64) -> &[HeadSample] {
    let start = samples.partition_point(|s| end - s.t >= width - TIME_EPS);
    let stop = samples.partition_point(|s| s.t <= end + TIME_EPS);
    &samples[start..stop.max(start)]
}

/// Featurizes a raw (possibly jittered) window: resample, then features.
pub fn featurize(samples: &[HeadSample], width: f64, rate: f64) -> Result<FeatureVector, DatasetError> {
    let window = TelemetryWindow::from_samples(samples.to_vec(), width)?;
    let uniform = window.resample(rate)?;
    Ok(kinematics::features(&uniform)?)
}

/// Cuts every capture into overlapping windows and labels each with the
/// participant's VRSQ total. Output is sorted by participant, then time.
pub fn align(captures: &[Capture], scores: &BTreeMap<String, f64>, cfg: &AlignConfig) -> Result<Aligned, DatasetError> {
    if !(cfg.window_s > 0.0 && cfg.stride_s > 0.0 && cfg.rate_hz > 0.0) {
        return Err(DatasetError::Config("window, stride and rate must be positive"));
    }
    let missing: BTreeSet<String> =
        captures.iter().filter(|c| !scores.contains_key(&c.participant_id)).map(|c| c.participant_id.clone()).collect();
    if !missing.is_empty() {
        return Err(DatasetError::MissingScores(missing.into_iter().collect()));
    }
    let mut out = Aligned::default();
    for capture in captures {
        let target = scores[&capture.participant_id];
        if !(0.0..=100.0).contains(&target) {
            return Err(DatasetError::Target(target));
        }
        let (Some(first), Some(last)) = (capture.samples.first(), capture.samples.last()) else {
            out.warnings.push(AlignWarning::TooShort { participant_id: capture.participant_id.clone(), duration: 0.0 });
            continue;
        };
        let ends = window_ends(first.t, last.t, cfg.window_s, cfg.stride_s);
        if ends.is_empty() {
            out.warnings.push(AlignWarning::TooShort {
                participant_id: capture.participant_id.clone(),
                duration: last.t - first.t,
            });
            continue;
        }
        for end in ends {
            let slice = window_slice(&capture.samples, end, cfg.window_s);
            match featurize(slice, cfg.window_s, cfg.rate_hz) {
                Ok(features) => out.windows.push(LabeledWindow {
                    participant_id: capture.participant_id.clone(),
                    t_end: end,
                    features,
                    target,
                }),
                Err(DatasetError::Telemetry(TelemetryError::InsufficientData { .. })) => out
                    .warnings
                    .push(AlignWarning::SkippedWindow { participant_id: capture.participant_id.clone(), t_end: end }),
                Err(e) => return Err(e),
            }
        }
    }
    out.windows.sort_by(|a, b| {
        a.participant_id
            .cmp(&b.participant_id)
            .then(a.t_end.total_cmp(&b.t_end))
            .then_with(|| {
                a.features
                    .0
                    .iter()
                    .zip(&b.features.0)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(core::cmp::Ordering::Equal)
            })
            .then(a.target.total_cmp(&b.target))
    });
    Ok(out)
}

/// Dense row-major feature matrix with targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    n_features: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Table {
    pub fn new(n_features: usize) -> Self {
        Table { n_features, x: Vec::new(), y: Vec::new() }
    }

    pub fn push(&mut self, row: &[f64], target: f64) -> Result<(), DatasetError> {
        if row.len() != self.n_features {
            return Err(DatasetError::Arity { expected: self.n_features, got: row.len() });
        }
        self.x.extend_from_slice(row);
        self.y.push(target);
        Ok(())
    }

    pub fn from_rows<R: AsRef<[f64]>>(n_features: usize, rows: &[R], targets: &[f64]) -> Result<Self, DatasetError> {
        let mut t = Table::new(n_features);
        for (r, &y) in rows.iter().zip(targets) {
            t.push(r.as_ref(), y)?;
        }
        Ok(t)
    }

    pub fn from_windows(windows: &[LabeledWindow]) -> Self {
        let mut t = Table::new(N_FEATURES);
        for w in windows {
            t.x.extend_from_slice(&w.features.0);
            t.y.push(w.target);
        }
        t
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn value(&self, i: usize, feature: usize) -> f64 {
        self.x[i * self.n_features + feature]
    }

    pub fn target(&self, i: usize) -> f64 {
        self.y[i]
    }

    pub fn targets(&self) -> &[f64] {
        &self.y
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks(self.n_features.max(1)).take(self.y.len())
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Table {
        let mut t = Table::new(self.n_features);
        for &i in indices {
            t.x.extend_from_slice(self.row(i));
            t.y.push(self.y[i]);
        }
        t
    }
}

/// Per-feature z-scoring fitted on a training set. Zero-variance features
/// are flagged and passed through unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub degenerate: Vec<bool>,
}

impl Scaler {
    /// Scaler that leaves every value unchanged.
    pub fn identity(n_features: usize) -> Self {
        Scaler {
            mean: alloc::vec![0.0; n_features],
            std: alloc::vec![1.0; n_features],
            degenerate: alloc::vec![false; n_features],
        }
    }

    pub fn fit(table: &Table) -> Result<Self, DatasetError> {
        if table.is_empty() {
            return Err(DatasetError::Empty);
        }
        let n = table.len() as f64;
        let d = table.n_features();
        let mut mean = alloc::vec![0.0; d];
        for row in table.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = alloc::vec![0.0; d];
        for row in table.rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std: Vec<f64> = var.iter().map(|s| libm::sqrt(s / n)).collect();
        let degenerate = std.iter().zip(&mean).map(|(s, m)| *s <= 1e-12 * (1.0 + m.abs())).collect();
        Ok(Scaler { mean, std, degenerate })
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    #[inline]
    pub fn apply_one(&self, feature: usize, value: f64) -> f64 {
        if self.degenerate[feature] {
            value
        } else {
            (value - self.mean[feature]) / self.std[feature]
        }
    }

    pub fn transform_row(&self, row: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(row.iter().enumerate().map(|(f, &v)| self.apply_one(f, v)));
    }

    pub fn transform(&self, table: &Table) -> Table {
        let mut t = Table::new(table.n_features());
        for (row, &y) in table.rows().zip(table.targets()) {
            t.x.extend(row.iter().enumerate().map(|(f, &v)| self.apply_one(f, v)));
            t.y.push(y);
        }
        t
    }
}

/// Fits a scaler on `table` and returns the standardized copy.
pub fn standardize(table: &Table) -> Result<(Table, Scaler), DatasetError> {
    let scaler = Scaler::fit(table)?;
    Ok((scaler.transform(table), scaler))
}

/// Deterministic train/test partition of `n` rows, as sorted index lists.
///
/// With `groups`, whole groups are assigned to one side: the distinct group
/// labels are shuffled and `round(n_groups · test_fraction)` of them (at
/// least one, at most all but one) are held out.
pub fn split_indices(
    n: usize,
    test_fraction: f64,
    seed: u64,
    groups: Option<&[&str]>,
) -> Result<(Vec<usize>, Vec<usize>), DatasetError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DatasetError::Fraction(test_fraction));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    match groups {
        None => {
            if n < 2 {
                return Err(DatasetError::DegenerateSplit(n));
            }
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            let n_test = libm::round(n as f64 * test_fraction).clamp(1.0, (n - 1) as f64) as usize;
            test.extend_from_slice(&idx[..n_test]);
            train.extend_from_slice(&idx[n_test..]);
        }
        Some(labels) => {
            let distinct: BTreeSet<&str> = labels.iter().copied().collect();
            let mut ids: Vec<&str> = distinct.into_iter().collect();
            if ids.len() < 2 {
                return Err(DatasetError::DegenerateSplit(ids.len()));
            }
            ids.shuffle(&mut rng);
            let k = ids.len();
            let n_test = libm::round(k as f64 * test_fraction).clamp(1.0, (k - 1) as f64) as usize;
            let held: BTreeSet<&str> = ids[..n_test].iter().copied().collect();
            for (i, g) in labels.iter().enumerate().take(n) {
                if held.contains(g) {
                    test.push(i);
                } else {
                    train.push(i);
                }
            }
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Splits labeled windows, optionally keeping each participant on one side.
pub fn split(
    windows: &[LabeledWindow],
    test_fraction: f64,
    seed: u64,
    group_by_participant: bool,
) -> Result<(Vec<LabeledWindow>, Vec<LabeledWindow>), DatasetError> {
    let labels: Vec<&str> = windows.iter().map(|w| w.participant_id.as_str()).collect();
    let (train, test) =
        split_indices(windows.len(), test_fraction, seed, group_by_participant.then_some(labels.as_slice()))?;
    Ok((train.iter().map(|&i| windows[i].clone()).collect(), test.iter().map(|&i| windows[i].clone()).collect()))
}
