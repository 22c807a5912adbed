//! Helpers shared by the integration test targets.

#![allow(dead_code)]

use std::io::{BufRead, BufReader, Write};
use std::net::{Shutdown, TcpListener, TcpStream};
use std::sync::{Arc, OnceLock};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use vrcomfort::config::ServiceConfig;
use vrcomfort::parallel::train_parallel;
use vrcomfort::protocol::{frame_line, head_line, hello_line, parse_outbound, Outbound, Stats, PROTOCOL_VERSION};
use vrcomfort::service::serve_tcp;
use vrcomfort_core::dataset::{align, synth_dataset, AlignConfig, SynthConfig, Table};
use vrcomfort_core::forest::{ForestModel, HyperParams};
use vrcomfort_core::simulator::{generate_motion, MotionKind, MotionProfile};
use vrcomfort_core::{FrameTiming, HeadSample};

pub const DATA_SEED: u64 = 3;
pub const TRAIN_SEED: u64 = 3;

/// Windows of the default synthetic dataset.
pub fn synthetic_table() -> &'static (Vec<String>, Table) {
    static TABLE: OnceLock<(Vec<String>, Table)> = OnceLock::new();
    TABLE.get_or_init(|| {
        let data = synth_dataset(&SynthConfig::default(), DATA_SEED).unwrap();
        let aligned = align(&data.captures, &data.scores(), &AlignConfig::default()).unwrap();
        let ids = aligned.windows.iter().map(|w| w.participant_id.clone()).collect();
        (ids, Table::from_windows(&aligned.windows))
    })
}

/// Default-hyperparameter forest on the full synthetic dataset.
pub fn synthetic_model() -> Arc<ForestModel> {
    static MODEL: OnceLock<Arc<ForestModel>> = OnceLock::new();
    MODEL
        .get_or_init(|| Arc::new(train_parallel(&synthetic_table().1, &HyperParams::default(), TRAIN_SEED).unwrap()))
        .clone()
}

pub fn motion(kind: MotionKind, seconds: f64, seed: u64) -> Vec<HeadSample> {
    let profile = MotionProfile { duration: seconds, ..MotionProfile::preset(kind) };
    generate_motion(&profile, seed).unwrap()
}

/// Frames at a constant rate covering `[0, seconds]`.
pub fn frames(fps: f64, seconds: f64) -> Vec<FrameTiming> {
    let n = (seconds * fps).floor() as usize;
    (1..=n).map(|k| FrameTiming { t: k as f64 / fps, dt_ms: 1000.0 / fps }).collect()
}

pub struct Server {
    pub addr: std::net::SocketAddr,
    handle: JoinHandle<()>,
}

/// Serves exactly one TCP session on an ephemeral loopback port.
pub fn start_server(model: Arc<ForestModel>, cfg: ServiceConfig) -> Server {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let handle = std::thread::spawn(move || serve_tcp(listener, model, cfg, Some(1)).unwrap());
    Server { addr, handle }
}

impl Server {
    pub fn join(self) {
        self.handle.join().unwrap();
    }
}

#[derive(Debug, Default)]
pub struct Transcript {
    pub records: Vec<Outbound>,
    /// Client-side time from sending an evaluation-triggering sample to
    /// receiving its `score`.
    pub round_trips_ms: Vec<f64>,
}

impl Transcript {
    pub fn scores(&self) -> Vec<(f64, f64)> {
        self.records
            .iter()
            .filter_map(|r| match r {
                Outbound::Score { t, value } => Some((*t, *value)),
                _ => None,
            })
            .collect()
    }

    pub fn adjusts(&self) -> Vec<(f64, u8, f64)> {
        self.records
            .iter()
            .filter_map(|r| match r {
                Outbound::Adjust { t, ffr, fov, .. } => Some((*t, *ffr, *fov)),
                _ => None,
            })
            .collect()
    }

    pub fn errors(&self) -> usize {
        self.records.iter().filter(|r| matches!(r, Outbound::Error { .. })).count()
    }

    pub fn stats(&self) -> Option<&Stats> {
        self.records.iter().find_map(|r| match r {
            Outbound::Stats(s) => Some(s),
            _ => None,
        })
    }
}

pub struct Client {
    writer: TcpStream,
    reader: BufReader<TcpStream>,
    pub transcript: Transcript,
}

impl Client {
    pub fn connect(addr: std::net::SocketAddr) -> Self {
        let writer = TcpStream::connect(addr).unwrap();
        writer.set_nodelay(true).unwrap();
        writer.set_read_timeout(Some(Duration::from_secs(30))).unwrap();
        let reader = BufReader::new(writer.try_clone().unwrap());
        Client { writer, reader, transcript: Transcript::default() }
    }

    pub fn send(&mut self, line: &str) {
        self.writer.write_all(line.as_bytes()).unwrap();
        self.writer.write_all(b"\n").unwrap();
    }

    /// Reads one record; `None` at end of stream.
    pub fn recv(&mut self) -> Option<Outbound> {
        let mut line = String::new();
        if self.reader.read_line(&mut line).unwrap() == 0 {
            return None;
        }
        let rec = parse_outbound(line.trim_end()).unwrap_or_else(|e| panic!("bad record {line:?}: {e}"));
        self.transcript.records.push(rec.clone());
        Some(rec)
    }

    /// Reads until a record matching `pred` arrives.
    pub fn recv_until(&mut self, pred: impl Fn(&Outbound) -> bool) -> Outbound {
        loop {
            let rec = self.recv().expect("stream closed early");
            if pred(&rec) {
                return rec;
            }
        }
    }

    pub fn hello(&mut self) -> Outbound {
        self.send(&hello_line(PROTOCOL_VERSION));
        self.recv_until(|_| true)
    }

    /// Streams samples and frames in time order. After every sample that
    /// completes an evaluation period the client waits for the `score`;
    /// after each injected line it waits for the `error`.
    pub fn stream(
        &mut self,
        samples: &[HeadSample],
        frames: &[FrameTiming],
        cfg: &ServiceConfig,
        inject: &[(usize, &str)],
    ) {
        let period = cfg.controller.eval_period_s;
        let mut due = samples[0].t + cfg.window_s;
        let mut next_frame = 0;
        for (i, s) in samples.iter().enumerate() {
            for (_, line) in inject.iter().filter(|(at, _)| *at == i) {
                self.send(line);
                self.recv_until(|r| matches!(r, Outbound::Error { .. }));
            }
            while next_frame < frames.len() && frames[next_frame].t <= s.t {
                self.send(&frame_line(&frames[next_frame]));
                next_frame += 1;
            }
            let sent = Instant::now();
            self.send(&head_line(s));
            if s.t + 1e-9 >= due {
                due += period;
                while due <= s.t + 1e-9 {
                    due += period;
                }
                self.recv_until(|r| matches!(r, Outbound::Score { .. }));
                self.transcript.round_trips_ms.push(sent.elapsed().as_secs_f64() * 1000.0);
            }
        }
    }

    /// Half-closes the connection and reads everything up to the `stats`
    /// record and end of stream.
    pub fn finish(mut self) -> Transcript {
        self.writer.shutdown(Shutdown::Write).unwrap();
        while self.recv().is_some() {}
        self.transcript
    }
}

pub fn percentile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = (p * v.len() as f64).ceil() as usize;
    v[rank.clamp(1, v.len()) - 1]
}
