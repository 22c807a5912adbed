//! Sidecar service: one ingestion thread and one evaluation thread per
//! session, joined by a bounded drop-oldest queue.
//!
//! The ingestion thread only reads and parses lines, so it never waits on
//! scoring. The evaluation thread owns the telemetry buffers, the
//! controller and the output stream. Evaluation is driven by telemetry
//! time: the first tick fires once a head sample reaches `t0 + window`,
//! then every `eval_period` seconds of telemetry.

use std::collections::VecDeque;
use std::io::{self, BufRead, Write};
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::thread;
use std::time::Instant;

use vrcomfort_core::controller::Controller;
use vrcomfort_core::forest::ForestModel;
use vrcomfort_core::kinematics::{self, FEATURE_SET_VERSION};
use vrcomfort_core::telemetry::{TelemetryStream, DEFAULT_CAPACITY_S};

use crate::config::ServiceConfig;
use crate::protocol::{
    parse_line, version_supported, AckConfig, ErrorCode, Inbound, Outbound, ProtocolError, Stats, PROTOCOL_VERSION,
};

struct QueueState<T> {
    items: VecDeque<T>,
    closed: bool,
    pushed: u64,
    drops: u64,
}

/// Bounded MPSC-style queue that discards its oldest entry when full.
pub struct DropOldestQueue<T> {
    state: Mutex<QueueState<T>>,
    ready: Condvar,
    capacity: usize,
}

impl<T> DropOldestQueue<T> {
    pub fn new(capacity: usize) -> Self {
        DropOldestQueue {
            state: Mutex::new(QueueState {
                items: VecDeque::with_capacity(capacity.min(4096)),
                closed: false,
                pushed: 0,
                drops: 0,
            }),
            ready: Condvar::new(),
            capacity: capacity.max(1),
        }
    }

    fn lock(&self) -> MutexGuard<'_, QueueState<T>> {
        self.state.lock().unwrap_or_else(|p| p.into_inner())
    }

    /// Enqueues `item`; returns true if an older item was dropped for it.
    pub fn push(&self, item: T) -> bool {
        let mut s = self.lock();
        s.pushed += 1;
        let dropped = s.items.len() >= self.capacity;
        if dropped {
            s.items.pop_front();
            s.drops += 1;
        }
        s.items.push_back(item);
        drop(s);
        self.ready.notify_one();
        dropped
    }

    /// No more pushes; `pop` drains what is left, then returns `None`.
    pub fn close(&self) {
        self.lock().closed = true;
        self.ready.notify_all();
    }

    pub fn pop(&self) -> Option<T> {
        let mut s = self.lock();
        loop {
            if let Some(item) = s.items.pop_front() {
                return Some(item);
            }
            if s.closed {
                return None;
            }
            s = self.ready.wait(s).unwrap_or_else(|p| p.into_inner());
        }
    }

    pub fn pushed(&self) -> u64 {
        self.lock().pushed
    }

    pub fn drops(&self) -> u64 {
        self.lock().drops
    }
}

/// A parsed inbound line and when it arrived.
pub struct Event {
    pub received: Instant,
    pub message: Result<Inbound, ProtocolError>,
}

/// Per-session evaluation state.
pub struct Engine<'m> {
    model: &'m ForestModel,
    cfg: ServiceConfig,
    stream: TelemetryStream,
    controller: Controller,
    next_eval: Option<f64>,
    evaluations: u64,
    adjusts: u64,
    errors: u64,
    labels: u64,
    latencies_ms: Vec<f64>,
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

impl<'m> Engine<'m> {
    pub fn new(model: &'m ForestModel, cfg: ServiceConfig) -> Result<Self, String> {
        cfg.validate()?;
        let controller = Controller::new(cfg.controller).map_err(|e| e.to_string())?;
        let capacity = DEFAULT_CAPACITY_S.max(cfg.window_s + 2.0 * cfg.controller.eval_period_s);
        Ok(Engine {
            model,
            cfg,
            stream: TelemetryStream::new(capacity),
            controller,
            next_eval: None,
            evaluations: 0,
            adjusts: 0,
            errors: 0,
            labels: 0,
            latencies_ms: Vec::new(),
        })
    }

    fn ack(&self) -> Outbound {
        let c = &self.cfg.controller;
        Outbound::Ack {
            version: PROTOCOL_VERSION.to_string(),
            config: AckConfig {
                window: self.cfg.window_s,
                rate: self.cfg.rate_hz,
                eval_period: c.eval_period_s,
                score_threshold: c.score_threshold,
                fps_threshold: c.fps_threshold,
                ffr_max: c.ffr_max,
                fov_max: c.fov_max,
                fov_min: c.fov_min,
                fov_step: c.fov_step,
                hysteresis: c.hysteresis,
                relax_dwell: c.relax_dwell_s,
                queue_capacity: self.cfg.queue_capacity,
                n_trees: self.model.trees().len(),
                feature_set_version: FEATURE_SET_VERSION,
            },
        }
    }

    fn emit(&mut self, out: &mut impl Write, rec: &Outbound) -> io::Result<()> {
        match rec {
            Outbound::Error { .. } => self.errors += 1,
            Outbound::Adjust { .. } => self.adjusts += 1,
            _ => {}
        }
        out.write_all(rec.to_line().as_bytes())?;
        out.flush()
    }

    fn fail(&mut self, out: &mut impl Write, code: ErrorCode, message: impl Into<String>) -> io::Result<()> {
        self.emit(out, &Outbound::error(&ProtocolError::new(code, message)))
    }

    /// Handles one inbound record, writing any responses to `out`.
    pub fn handle(&mut self, event: Event, out: &mut impl Write) -> io::Result<()> {
        let msg = match event.message {
            Ok(m) => m,
            Err(e) => return self.emit(out, &Outbound::error(&e)),
        };
        match msg {
            Inbound::Hello { version } => {
                if version_supported(&version) {
                    let ack = self.ack();
                    self.emit(out, &ack)
                } else {
                    self.fail(
                        out,
                        ErrorCode::Version,
                        format!("protocol {version} not supported (service speaks {PROTOCOL_VERSION})"),
                    )
                }
            }
            Inbound::Frame(f) => match self.stream.push_frame(f) {
                Ok(()) => Ok(()),
                Err(r) => self.fail(out, ErrorCode::Invalid, format!("frame: {r}")),
            },
            Inbound::Vrsq(_) => {
                self.labels += 1;
                Ok(())
            }
            Inbound::Head(sample) => {
                if let Err(r) = self.stream.push_head(sample) {
                    return self.fail(out, ErrorCode::Invalid, format!("head: {r}"));
                }
                let t = sample.t;
                let due = *self.next_eval.get_or_insert(t + self.cfg.window_s);
                if t + 1e-9 < due {
                    return Ok(());
                }
                let period = self.cfg.controller.eval_period_s;
                let mut next = due + period;
                while next <= t + 1e-9 {
                    next += period;
                }
                self.next_eval = Some(next);
                self.evaluate(t, event.received, out)
            }
        }
    }

    fn evaluate(&mut self, t: f64, received: Instant, out: &mut impl Write) -> io::Result<()> {
        let scored = self
            .stream
            .window(self.cfg.window_s)
            .and_then(|w| w.resample(self.cfg.rate_hz))
            .map_err(|e| e.to_string())
            .and_then(|w| kinematics::features(&w).map_err(|e| e.to_string()))
            .and_then(|f| self.model.predict(&f.0).map_err(|e| e.to_string()));
        let score = match scored {
            Ok(s) => s,
            Err(e) => return self.fail(out, ErrorCode::Evaluation, format!("t={t}: {e}")),
        };
        // without frame timing the framerate is taken to meet the threshold
        let fps =
            self.stream.current_fps(self.cfg.controller.eval_period_s).unwrap_or(self.cfg.controller.fps_threshold);
        let before = self.controller.params();
        let (params, decision) = self.controller.step(t, score, fps);
        self.evaluations += 1;
        self.emit(out, &Outbound::Score { t, value: score })?;
        if params != before {
            let adjust =
                Outbound::Adjust { t, ffr: params.ffr_level, fov: params.fov_deg, reason: decision.reason.to_string() };
            self.emit(out, &adjust)?;
        }
        self.latencies_ms.push(received.elapsed().as_secs_f64() * 1000.0);
        Ok(())
    }

    pub fn stats(&self, received: u64, drops: u64) -> Stats {
        let mut lat = self.latencies_ms.clone();
        lat.sort_by(f64::total_cmp);
        Stats {
            received,
            drops,
            evaluations: self.evaluations,
            adjusts: self.adjusts,
            errors: self.errors,
            labels: self.labels,
            latency_p50_ms: percentile(&lat, 0.5),
            latency_p99_ms: percentile(&lat, 0.99),
            latency_max_ms: lat.last().copied().unwrap_or(0.0),
        }
    }
}

fn ingest<R: BufRead>(mut reader: R, queue: &DropOldestQueue<Event>) {
    let mut buf = Vec::new();
    loop {
        buf.clear();
        match reader.read_until(b'\n', &mut buf) {
            Ok(0) => break,
            Ok(_) => {
                let received = Instant::now();
                let message = match std::str::from_utf8(&buf) {
                    Ok(line) => parse_line(line.trim()),
                    Err(_) => Err(ProtocolError::new(ErrorCode::Parse, "line is not UTF-8")),
                };
                queue.push(Event { received, message });
            }
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(_) => break,
        }
    }
    queue.close();
}

/// Runs one session until the reader reaches end of input, then writes a
/// `stats` record and returns it.
pub fn serve_session<R, W>(reader: R, mut writer: W, model: &ForestModel, cfg: &ServiceConfig) -> io::Result<Stats>
where
    R: BufRead + Send,
    W: Write,
{
    let mut engine = Engine::new(model, *cfg).map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
    let queue = DropOldestQueue::new(cfg.queue_capacity);
    thread::scope(|s| {
        s.spawn(|| ingest(reader, &queue));
        while let Some(event) = queue.pop() {
            if let Err(e) = engine.handle(event, &mut writer) {
                // output gone: stop reading as well
                queue.close();
                while queue.pop().is_some() {}
                return Err(e);
            }
        }
        let stats = engine.stats(queue.pushed(), queue.drops());
        writer.write_all(Outbound::Stats(stats.clone()).to_line().as_bytes())?;
        writer.flush()?;
        Ok(stats)
    })
}

pub fn serve_stdio(model: &ForestModel, cfg: &ServiceConfig) -> io::Result<Stats> {
    serve_session(io::BufReader::new(io::stdin()), io::BufWriter::new(io::stdout()), model, cfg)
}

/// Accepts TCP clients, one session thread pair each. Stops after
/// `max_sessions` connections when given.
pub fn serve_tcp(
    listener: std::net::TcpListener,
    model: Arc<ForestModel>,
    cfg: ServiceConfig,
    max_sessions: Option<usize>,
) -> io::Result<()> {
    let mut handles = Vec::new();
    for (n, conn) in listener.incoming().enumerate() {
        let stream = conn?;
        stream.set_nodelay(true)?;
        let reader = io::BufReader::new(stream.try_clone()?);
        let model = Arc::clone(&model);
        handles.push(thread::spawn(move || {
            let peer = stream.peer_addr().map(|a| a.to_string()).unwrap_or_default();
            let result = serve_session(reader, io::BufWriter::new(stream), &model, &cfg);
            log_session(&peer, &result);
        }));
        if max_sessions.is_some_and(|m| n + 1 >= m) {
            break;
        }
    }
    for h in handles {
        let _ = h.join();
    }
    Ok(())
}

#[cfg(unix)]
pub fn serve_unix(
    listener: std::os::unix::net::UnixListener,
    model: Arc<ForestModel>,
    cfg: ServiceConfig,
    max_sessions: Option<usize>,
) -> io::Result<()> {
    let mut handles = Vec::new();
    for (n, conn) in listener.incoming().enumerate() {
        let stream = conn?;
        let reader = io::BufReader::new(stream.try_clone()?);
        let model = Arc::clone(&model);
        handles.push(thread::spawn(move || {
            let result = serve_session(reader, io::BufWriter::new(stream), &model, &cfg);
            log_session("unix client", &result);
        }));
        if max_sessions.is_some_and(|m| n + 1 >= m) {
            break;
        }
    }
    for h in handles {
        let _ = h.join();
    }
    Ok(())
}

fn log_session(peer: &str, result: &io::Result<Stats>) {
    match result {
        Ok(s) => eprintln!(
            "session {peer} closed: received={} drops={} evaluations={} adjusts={} errors={} p99={:.3}ms",
            s.received, s.drops, s.evaluations, s.adjusts, s.errors, s.latency_p99_ms
        ),
        Err(e) => eprintln!("session {peer} aborted: {e}"),
    }
}
