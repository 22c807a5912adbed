//! Newline-delimited JSON records exchanged with the sidecar service.
//!
//! Inbound (client → service), discriminated by `type`:
//! `hello {version}`, `head {t, pos[3], quat[4]}` (quaternion scalar-first),
//! `frame {t, dt_ms}`, `vrsq {items[9]}`.
//!
//! Outbound: `ack {version, config}`, `score {t, value}`,
//! `adjust {t, ffr, fov, reason}` (absolute state, sent only on change),
//! `error {code, message}` and a final `stats` record.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use vrcomfort_core::vrsq::{VrsqResponse, N_ITEMS};
use vrcomfort_core::{FrameTiming, HeadSample, Quat, Vec3};

pub const PROTOCOL_VERSION: &str = "1.0";
const PROTOCOL_MAJOR: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Not a JSON object, or a known type with missing/mistyped fields.
    Parse,
    UnknownType,
    /// Well-formed but rejected: non-finite numbers, zero quaternion,
    /// out-of-order timestamps, out-of-range questionnaire items.
    Invalid,
    Version,
    /// An evaluation tick could not produce a score.
    Evaluation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolError {
    pub code: ErrorCode,
    pub message: String,
}

impl ProtocolError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ProtocolError { code, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Inbound {
    Hello { version: String },
    Head(HeadSample),
    Frame(FrameTiming),
    Vrsq(VrsqResponse),
}

#[derive(Deserialize)]
struct HelloMsg {
    version: Value,
}

#[derive(Deserialize)]
struct HeadMsg {
    t: f64,
    pos: [f64; 3],
    quat: [f64; 4],
}

#[derive(Deserialize)]
struct FrameMsg {
    t: f64,
    dt_ms: f64,
}

#[derive(Deserialize)]
struct VrsqMsg {
    items: [i64; N_ITEMS],
}

fn fields<T: for<'de> Deserialize<'de>>(kind: &str, v: Value) -> Result<T, ProtocolError> {
    serde_json::from_value(v).map_err(|e| ProtocolError::new(ErrorCode::Parse, format!("{kind}: {e}")))
}

fn invalid(message: impl Into<String>) -> ProtocolError {
    ProtocolError::new(ErrorCode::Invalid, message)
}

/// Major version of a `hello` version string (`"1"`, `"1.2"`).
pub fn major(version: &str) -> &str {
    version.split('.').next().unwrap_or(version)
}

pub fn version_supported(version: &str) -> bool {
    major(version) == PROTOCOL_MAJOR
}

pub fn parse_line(line: &str) -> Result<Inbound, ProtocolError> {
    let v: Value =
        serde_json::from_str(line).map_err(|e| ProtocolError::new(ErrorCode::Parse, format!("malformed JSON: {e}")))?;
    let kind = match v.get("type") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(ProtocolError::new(ErrorCode::Parse, "`type` must be a string")),
        None => return Err(ProtocolError::new(ErrorCode::Parse, "missing `type`")),
    };
    match kind.as_str() {
        "hello" => {
            let m: HelloMsg = fields("hello", v)?;
            let version = match m.version {
                Value::String(s) => s,
                Value::Number(n) => n.to_string(),
                _ => return Err(ProtocolError::new(ErrorCode::Parse, "hello: version must be a string")),
            };
            Ok(Inbound::Hello { version })
        }
        "head" => {
            let m: HeadMsg = fields("head", v)?;
            let [w, x, y, z] = m.quat;
            let q = Quat::new(w, x, y, z);
            let pos = Vec3::new(m.pos[0], m.pos[1], m.pos[2]);
            if !(m.t.is_finite() && pos.is_finite() && q.is_finite()) {
                return Err(invalid("head: non-finite value"));
            }
            if q.norm() < 1e-9 {
                return Err(invalid("head: zero quaternion"));
            }
            Ok(Inbound::Head(HeadSample::new(m.t, pos, q)))
        }
        "frame" => {
            let m: FrameMsg = fields("frame", v)?;
            if !(m.t.is_finite() && m.dt_ms.is_finite() && m.dt_ms > 0.0) {
                return Err(invalid("frame: need finite t and positive dt_ms"));
            }
            Ok(Inbound::Frame(FrameTiming { t: m.t, dt_ms: m.dt_ms }))
        }
        "vrsq" => {
            let m: VrsqMsg = fields("vrsq", v)?;
            VrsqResponse::new(m.items).map(Inbound::Vrsq).map_err(|e| invalid(format!("vrsq: {e}")))
        }
        other => Err(ProtocolError::new(ErrorCode::UnknownType, format!("unknown type `{other}`"))),
    }
}

/// Service settings echoed in `ack`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AckConfig {
    pub window: f64,
    pub rate: f64,
    pub eval_period: f64,
    pub score_threshold: f64,
    pub fps_threshold: f64,
    pub ffr_max: u8,
    pub fov_max: f64,
    pub fov_min: f64,
    pub fov_step: f64,
    pub hysteresis: f64,
    pub relax_dwell: f64,
    pub queue_capacity: usize,
    pub n_trees: usize,
    pub feature_set_version: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    /// Inbound lines read.
    pub received: u64,
    /// Lines discarded by the drop-oldest queue.
    pub drops: u64,
    pub evaluations: u64,
    pub adjusts: u64,
    pub errors: u64,
    pub labels: u64,
    pub latency_p50_ms: f64,
    pub latency_p99_ms: f64,
    pub latency_max_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Outbound {
    Ack { version: String, config: AckConfig },
    Score { t: f64, value: f64 },
    Adjust { t: f64, ffr: u8, fov: f64, reason: String },
    Error { code: ErrorCode, message: String },
    Stats(Stats),
}

impl Outbound {
    pub fn error(e: &ProtocolError) -> Self {
        Outbound::Error { code: e.code, message: e.message.clone() }
    }

    /// One JSON record terminated by `\n`.
    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).unwrap_or_else(|e| {
            format!(r#"{{"type":"error","code":"evaluation","message":"unserializable record: {e}"}}"#)
        });
        s.push('\n');
        s
    }
}

/// Client-side helpers for building inbound records.
pub fn head_line(s: &HeadSample) -> String {
    let q = s.quat;
    serde_json::json!({
        "type": "head",
        "t": s.t,
        "pos": s.pos.0,
        "quat": [q.w, q.x, q.y, q.z],
    })
    .to_string()
}

pub fn frame_line(f: &FrameTiming) -> String {
    serde_json::json!({ "type": "frame", "t": f.t, "dt_ms": f.dt_ms }).to_string()
}

pub fn hello_line(version: &str) -> String {
    serde_json::json!({ "type": "hello", "version": version }).to_string()
}

pub fn parse_outbound(line: &str) -> Result<Outbound, serde_json::Error> {
    serde_json::from_str(line)
}
