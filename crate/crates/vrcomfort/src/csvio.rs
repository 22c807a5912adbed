//! CSV formats: head and frame captures, VRSQ responses, labeled feature
//! datasets, predictions and session logs.
//!
//! All files carry a header row. Numbers use `.` as the decimal separator
//! and are written in shortest round-trip form, so write→read is lossless
//! and repeated writes of the same data are byte-identical.

use std::collections::BTreeMap;
use std::path::Path;

use csv::StringRecord;
use vrcomfort_core::controller::Action;
use vrcomfort_core::dataset::{Capture, LabeledWindow, Table};
use vrcomfort_core::kinematics::{FEATURE_NAMES, FEATURE_SET_VERSION, N_FEATURES};
use vrcomfort_core::simulator::{SessionLog, SessionRow};
use vrcomfort_core::vrsq::{VrsqResponse, N_ITEMS};
use vrcomfort_core::{FrameTiming, HeadSample, Quat, Vec3};

use crate::error::{read_to_string, write_file, Error, Result};

pub const HEAD_HEADER: [&str; 9] = ["participant_id", "t", "px", "py", "pz", "qw", "qx", "qy", "qz"];
pub const FRAME_HEADER: [&str; 3] = ["participant_id", "t", "dt_ms"];
pub const VRSQ_SCORE_COLUMNS: [&str; 3] = ["oculomotor", "disorientation", "total"];
pub const SESSION_HEADER: [&str; 8] = ["t", "score", "fps", "ffr", "fov", "decision", "reason", "latent"];
/// `decision` value of rows logged with the controller switched off.
pub const DISABLED_DECISION: &str = "disabled";

/// Column names `item1..item9`; the item order is `vrsq::ITEM_NAMES`.
pub fn vrsq_header() -> Vec<String> {
    std::iter::once("participant_id".to_string()).chain((1..=N_ITEMS).map(|i| format!("item{i}"))).collect()
}

pub fn dataset_header(with_target: bool) -> Vec<String> {
    let mut h = vec!["participant_id".to_string()];
    h.extend(FEATURE_NAMES.iter().map(|s| s.to_string()));
    if with_target {
        h.push("target".to_string());
    }
    h
}

fn num(v: f64) -> String {
    format!("{v}")
}

struct Rows<'a> {
    path: &'a Path,
    records: Vec<(u64, StringRecord)>,
}

/// Parses `text` as CSV, checking the header against one of `allowed`.
/// Returns the index of the header that matched. `line_offset` is added to
/// reported line numbers (for files with a preamble).
fn parse<'a>(path: &'a Path, text: &str, allowed: &[Vec<String>], line_offset: u64) -> Result<(usize, Rows<'a>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::csv(path, 1 + line_offset, e.to_string()))?.clone();
    let got: Vec<&str> = header.iter().collect();
    let Some(which) = allowed.iter().position(|h| h.iter().map(String::as_str).eq(got.iter().copied())) else {
        return Err(Error::csv(
            path,
            1 + line_offset,
            format!("expected header `{}`, found `{}`", allowed[0].join(","), got.join(",")),
        ));
    };
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::csv(path, line + line_offset, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line()) + line_offset;
        records.push((line, rec));
    }
    Ok((which, Rows { path, records }))
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

impl Rows<'_> {
    fn f64(&self, line: u64, rec: &StringRecord, i: usize, name: &str) -> Result<f64> {
        let raw = &rec[i];
        let v: f64 =
            raw.parse().map_err(|_| Error::csv(self.path, line, format!("{name}: `{raw}` is not a number")))?;
        if !v.is_finite() {
            return Err(Error::csv(self.path, line, format!("{name}: non-finite value")));
        }
        Ok(v)
    }

    fn int(&self, line: u64, rec: &StringRecord, i: usize, name: &str) -> Result<i64> {
        let raw = &rec[i];
        raw.parse().map_err(|_| Error::csv(self.path, line, format!("{name}: `{raw}` is not an integer")))
    }

    fn id(&self, line: u64, rec: &StringRecord) -> Result<String> {
        let id = &rec[0];
        if id.is_empty() {
            return Err(Error::csv(self.path, line, "empty participant_id"));
        }
        Ok(id.to_string())
    }
}

fn finish(path: &Path, wtr: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    wtr.into_inner().map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn put(path: &Path, wtr: &mut csv::Writer<Vec<u8>>, fields: &[String]) -> Result<()> {
    wtr.write_record(fields).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

/// Head captures grouped by participant in order of first appearance.
/// Quaternions are normalized; timestamps must increase per participant.
pub fn read_head_csv(path: &Path) -> Result<Vec<Capture>> {
    let text = read_to_string(path)?;
    let (_, rows) = parse(path, &text, &[header(&HEAD_HEADER)], 0)?;
    let mut order: Vec<String> = Vec::new();
    let mut by_id: BTreeMap<String, Vec<HeadSample>> = BTreeMap::new();
    for (line, rec) in &rows.records {
        let (line, rec) = (*line, rec);
        let id = rows.id(line, rec)?;
        let v: Vec<f64> = (1..9).map(|i| rows.f64(line, rec, i, HEAD_HEADER[i])).collect::<Result<_>>()?;
        let q = Quat::new(v[4], v[5], v[6], v[7]);
        if q.norm() < 1e-9 {
            return Err(Error::csv(path, line, "zero quaternion"));
        }
        let sample = HeadSample::new(v[0], Vec3::new(v[1], v[2], v[3]), q.normalized());
        let samples = by_id.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            Vec::new()
        });
        if samples.last().is_some_and(|p| sample.t <= p.t) {
            return Err(Error::csv(path, line, format!("timestamps of `{id}` must increase")));
        }
        samples.push(sample);
    }
    Ok(order
        .into_iter()
        .map(|id| {
            let samples = by_id.remove(&id).unwrap_or_default();
            Capture { participant_id: id, samples }
        })
        .collect())
}

pub fn head_csv(path: &Path, captures: &[Capture]) -> Result<Vec<u8>> {
    let mut w = writer();
    put(path, &mut w, &header(&HEAD_HEADER))?;
    for c in captures {
        for s in &c.samples {
            let [px, py, pz] = s.pos.0;
            let q = s.quat;
            let rec = [s.t, px, py, pz, q.w, q.x, q.y, q.z].map(num);
            let mut fields = vec![c.participant_id.clone()];
            fields.extend(rec);
            put(path, &mut w, &fields)?;
        }
    }
    finish(path, w)
}

pub fn write_head_csv(path: &Path, captures: &[Capture]) -> Result<()> {
    write_file(path, &head_csv(path, captures)?)
}

pub fn read_frames_csv(path: &Path) -> Result<Vec<(String, FrameTiming)>> {
    let text = read_to_string(path)?;
    let (_, rows) = parse(path, &text, &[header(&FRAME_HEADER)], 0)?;
    rows.records
        .iter()
        .map(|(line, rec)| {
            let id = rows.id(*line, rec)?;
            let t = rows.f64(*line, rec, 1, "t")?;
            let dt_ms = rows.f64(*line, rec, 2, "dt_ms")?;
            if dt_ms <= 0.0 {
                return Err(Error::csv(path, *line, "dt_ms must be positive"));
            }
            Ok((id, FrameTiming { t, dt_ms }))
        })
        .collect()
}

pub fn write_frames_csv(path: &Path, frames: &[(String, FrameTiming)]) -> Result<()> {
    let mut w = writer();
    put(path, &mut w, &header(&FRAME_HEADER))?;
    for (id, f) in frames {
        put(path, &mut w, &[id.clone(), num(f.t), num(f.dt_ms)])?;
    }
    write_file(path, &finish(path, w)?)
}

/// Reads `participant_id,item1..item9`, optionally followed by the scored
/// columns (which are recomputed, not trusted).
pub fn read_vrsq_csv(path: &Path) -> Result<Vec<(String, VrsqResponse)>> {
    let text = read_to_string(path)?;
    let plain = vrsq_header();
    let mut scored = plain.clone();
    scored.extend(VRSQ_SCORE_COLUMNS.iter().map(|s| s.to_string()));
    let (_, rows) = parse(path, &text, &[plain, scored], 0)?;
    let mut seen = std::collections::BTreeSet::new();
    rows.records
        .iter()
        .map(|(line, rec)| {
            let id = rows.id(*line, rec)?;
            if !seen.insert(id.clone()) {
                return Err(Error::csv(path, *line, format!("duplicate participant `{id}`")));
            }
            let mut items = [0i64; N_ITEMS];
            for (k, item) in items.iter_mut().enumerate() {
                *item = rows.int(*line, rec, k + 1, &format!("item{}", k + 1))?;
            }
            let response = VrsqResponse::new(items).map_err(|e| Error::csv(path, *line, e.to_string()))?;
            Ok((id, response))
        })
        .collect()
}

pub fn write_vrsq_csv(path: &Path, responses: &[(String, VrsqResponse)], with_scores: bool) -> Result<()> {
    let mut w = writer();
    let mut h = vrsq_header();
    if with_scores {
        h.extend(VRSQ_SCORE_COLUMNS.iter().map(|s| s.to_string()));
    }
    put(path, &mut w, &h)?;
    for (id, r) in responses {
        let mut fields = vec![id.clone()];
        fields.extend(r.items().iter().map(|i| i.to_string()));
        if with_scores {
            let s = r.score();
            fields.extend([s.oculomotor, s.disorientation, s.total].map(num));
        }
        put(path, &mut w, &fields)?;
    }
    write_file(path, &finish(path, w)?)
}

/// Feature rows keyed by participant. `table` targets are zero when the
/// file has no `target` column.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFile {
    pub ids: Vec<String>,
    pub table: Table,
    pub has_target: bool,
}

const VERSION_PREFIX: &str = "# feature_set_version=";

/// Reads a labeled (or unlabeled) feature CSV. An optional first line
/// `# feature_set_version=N` must match the compiled feature set.
pub fn read_dataset_csv(path: &Path) -> Result<DatasetFile> {
    let text = read_to_string(path)?;
    let (body, offset) = match text.strip_prefix(VERSION_PREFIX) {
        Some(rest) => {
            let (v, body) = rest.split_once('\n').unwrap_or((rest, ""));
            let v: u32 = v.trim().parse().map_err(|_| Error::csv(path, 1, "malformed feature_set_version"))?;
            if v != FEATURE_SET_VERSION {
                return Err(Error::csv(
                    path,
                    1,
                    format!("feature set version {v}, this build reads {FEATURE_SET_VERSION}"),
                ));
            }
            (body, 1)
        }
        None => (text.as_str(), 0),
    };
    let (which, rows) = parse(path, body, &[dataset_header(true), dataset_header(false)], offset)?;
    let has_target = which == 0;
    let mut ids = Vec::with_capacity(rows.records.len());
    let mut table = Table::new(N_FEATURES);
    let mut x = [0.0; N_FEATURES];
    for (line, rec) in &rows.records {
        ids.push(rows.id(*line, rec)?);
        for (f, v) in x.iter_mut().enumerate() {
            *v = rows.f64(*line, rec, f + 1, FEATURE_NAMES[f])?;
        }
        let y = if has_target { rows.f64(*line, rec, N_FEATURES + 1, "target")? } else { 0.0 };
        table.push(&x, y)?;
    }
    Ok(DatasetFile { ids, table, has_target })
}

pub fn dataset_csv(path: &Path, ids: &[String], table: &Table) -> Result<Vec<u8>> {
    let mut w = writer();
    put(path, &mut w, &dataset_header(true))?;
    for (i, id) in ids.iter().enumerate() {
        let mut fields = vec![id.clone()];
        fields.extend(table.row(i).iter().map(|&v| num(v)));
        fields.push(num(table.target(i)));
        put(path, &mut w, &fields)?;
    }
    let mut out = format!("{VERSION_PREFIX}{FEATURE_SET_VERSION}\n").into_bytes();
    out.extend(finish(path, w)?);
    Ok(out)
}

pub fn write_dataset_csv(path: &Path, ids: &[String], table: &Table) -> Result<()> {
    write_file(path, &dataset_csv(path, ids, table)?)
}

pub fn write_windows_csv(path: &Path, windows: &[LabeledWindow]) -> Result<()> {
    let ids: Vec<String> = windows.iter().map(|w| w.participant_id.clone()).collect();
    write_dataset_csv(path, &ids, &Table::from_windows(windows))
}

/// `participant_id,score[,target]`.
pub fn predictions_csv(path: &Path, ids: &[String], scores: &[f64], targets: Option<&[f64]>) -> Result<Vec<u8>> {
    let mut w = writer();
    let mut h = vec!["participant_id".to_string(), "score".to_string()];
    if targets.is_some() {
        h.push("target".to_string());
    }
    put(path, &mut w, &h)?;
    for (i, (id, s)) in ids.iter().zip(scores).enumerate() {
        let mut fields = vec![id.clone(), num(*s)];
        if let Some(t) = targets {
            fields.push(num(t[i]));
        }
        put(path, &mut w, &fields)?;
    }
    finish(path, w)
}

pub fn session_csv(path: &Path, log: &SessionLog) -> Result<Vec<u8>> {
    let mut w = writer();
    put(path, &mut w, &header(&SESSION_HEADER))?;
    for r in &log.rows {
        let decision = r.action.map_or(DISABLED_DECISION, Action::name);
        let fields = [
            num(r.t),
            num(r.score),
            num(r.fps),
            r.ffr.to_string(),
            num(r.fov),
            decision.to_string(),
            r.reason.clone(),
            num(r.latent),
        ];
        put(path, &mut w, &fields)?;
    }
    finish(path, w)
}

pub fn write_session_csv(path: &Path, log: &SessionLog) -> Result<()> {
    write_file(path, &session_csv(path, log)?)
}

pub fn read_session_csv(path: &Path) -> Result<SessionLog> {
    let text = read_to_string(path)?;
    let (_, rows) = parse(path, &text, &[header(&SESSION_HEADER)], 0)?;
    let mut out = SessionLog::default();
    for (line, rec) in &rows.records {
        let line = *line;
        let ffr = rows.int(line, rec, 3, "ffr")?;
        let ffr = u8::try_from(ffr).map_err(|_| Error::csv(path, line, "ffr out of range"))?;
        let action = match &rec[5] {
            DISABLED_DECISION => None,
            name => {
                Some(Action::parse(name).ok_or_else(|| Error::csv(path, line, format!("unknown decision `{name}`")))?)
            }
        };
        let row = SessionRow {
            t: rows.f64(line, rec, 0, "t")?,
            score: rows.f64(line, rec, 1, "score")?,
            fps: rows.f64(line, rec, 2, "fps")?,
            ffr,
            fov: rows.f64(line, rec, 4, "fov")?,
            action,
            reason: rec[6].to_string(),
            latent: rows.f64(line, rec, 7, "latent")?,
        };
        if out.rows.last().is_some_and(|p| row.t <= p.t) {
            return Err(Error::csv(path, line, "rows must be time-ordered"));
        }
        out.rows.push(row);
    }
    Ok(out)
}
