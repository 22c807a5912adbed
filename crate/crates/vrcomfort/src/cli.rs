//! The `vrcomfort` command line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vrcomfort_core::dataset::{self, split_indices, AlignConfig, AlignWarning, SynthConfig};
use vrcomfort_core::forest::{evaluate, Grid, HyperParams};
use vrcomfort_core::simulator::{compare_sessions, simulate_session, Oracle, ScoreSource};
use vrcomfort_core::ControllerConfig;

use crate::config::{self, ScoreModel, ServiceConfig};
use crate::error::{write_file, Error, Result};
use crate::{csvio, model_file, parallel, report, service};

#[derive(Debug, Parser)]
#[command(name = "vrcomfort", version, about = "Cybersickness scoring and comfort control")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset: head.csv, vrsq.csv and dataset.csv.
    GenData(GenDataArgs),
    /// Cut head captures into labeled feature windows.
    Featurize(FeaturizeArgs),
    /// Score questionnaire responses.
    Vrsq(VrsqArgs),
    /// Train a forest and report held-out metrics.
    Train(TrainArgs),
    /// Report metrics of a model on a labeled dataset.
    Eval(EvalArgs),
    /// Write per-window scores.
    Predict(PredictArgs),
    /// Run a simulated session from a scenario file.
    Simulate(SimulateArgs),
    /// Compare a baseline and an adaptive session log.
    Compare(CompareArgs),
    /// Run the sidecar service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub participants: Option<usize>,
    /// Capture length per participant in seconds.
    #[arg(long)]
    pub duration: Option<f64>,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    #[arg(long, default_value_t = AlignConfig::default().window_s)]
    pub window: f64,
    #[arg(long, default_value_t = AlignConfig::default().stride_s)]
    pub stride: f64,
    #[arg(long, default_value_t = AlignConfig::default().rate_hz)]
    pub rate: f64,
}

impl WindowArgs {
    fn config(&self) -> AlignConfig {
        AlignConfig { window_s: self.window, stride_s: self.stride, rate_hz: self.rate }
    }
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    #[arg(long)]
    pub head: PathBuf,
    #[arg(long)]
    pub vrsq: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub window: WindowArgs,
}

#[derive(Debug, Args)]
pub struct VrsqArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct HyperArgs {
    #[arg(long)]
    pub n_trees: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub min_samples_leaf: Option<usize>,
    #[arg(long)]
    pub m_try: Option<usize>,
    #[arg(long)]
    pub no_bootstrap: bool,
}

impl HyperArgs {
    fn apply(&self, mut hp: HyperParams) -> HyperParams {
        hp.n_trees = self.n_trees.unwrap_or(hp.n_trees);
        hp.max_depth = self.max_depth.unwrap_or(hp.max_depth);
        hp.min_samples_leaf = self.min_samples_leaf.unwrap_or(hp.min_samples_leaf);
        hp.m_try = self.m_try.unwrap_or(hp.m_try);
        hp.bootstrap &= !self.no_bootstrap;
        hp
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labeled dataset CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Model file to write (trained on the window-random split).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub split_seed: u64,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    /// Also write the random-split test rows here.
    #[arg(long)]
    pub test_out: Option<PathBuf>,
    /// Pick hyperparameters by grid search on the training rows.
    #[arg(long)]
    pub grid: bool,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Defaults to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file.
    #[arg(long)]
    pub config: PathBuf,
    /// Score with this model instead of the scenario's.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub controller: Option<Switch>,
    /// Session log CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub baseline: PathBuf,
    pub adaptive: PathBuf,
    /// Controller config used to classify fps violations.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Service config (controller keys plus window, rate, queue_capacity).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `HOST:PORT`, or `unix:PATH` for a local socket.
    #[arg(long, conflicts_with = "stdio", required_unless_present = "stdio")]
    pub listen: Option<String>,
    #[arg(long)]
    pub stdio: bool,
    /// Exit after this many client sessions.
    #[arg(long)]
    pub max_sessions: Option<usize>,
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::GenData(a) => gen_data(&a),
        Command::Featurize(a) => featurize(&a),
        Command::Vrsq(a) => {
            let responses = csvio::read_vrsq_csv(&a.data)?;
            csvio::write_vrsq_csv(&a.out, &responses, true)
        }
        Command::Train(a) => train(&a),
        Command::Eval(a) => eval(&a),
        Command::Predict(a) => predict(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Compare(a) => compare(&a),
        Command::Serve(a) => serve(&a),
    }
}

fn stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes()).and_then(|()| out.flush()).map_err(|e| Error::io(Path::new("<stdout>"), e))
}

fn warn(warnings: &[AlignWarning]) {
    for w in warnings {
        match w {
            AlignWarning::TooShort { participant_id, duration } => {
                eprintln!("warning: {participant_id}: capture too short ({duration:.3} s)")
            }
            AlignWarning::SkippedWindow { participant_id, t_end } => {
                eprintln!("warning: {participant_id}: skipped window ending at {t_end:.3} s")
            }
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn gen_data(a: &GenDataArgs) -> Result<()> {
    let mut cfg = SynthConfig::default();
    cfg.participants = a.participants.unwrap_or(cfg.participants);
    cfg.duration_s = a.duration.unwrap_or(cfg.duration_s);
    let data = dataset::synth_dataset(&cfg, a.seed)?;
    let aligned = dataset::align(&data.captures, &data.scores(), &AlignConfig::default())?;
    warn(&aligned.warnings);
    create_dir(&a.out)?;
    csvio::write_head_csv(&a.out.join("head.csv"), &data.captures)?;
    csvio::write_vrsq_csv(&a.out.join("vrsq.csv"), &data.responses, true)?;
    csvio::write_windows_csv(&a.out.join("dataset.csv"), &aligned.windows)?;
    stdout(&format!(
        "participants = {}\nwindows = {}\nout = {}\n",
        data.captures.len(),
        aligned.windows.len(),
        a.out.display()
    ))
}

fn featurize(a: &FeaturizeArgs) -> Result<()> {
    let captures = csvio::read_head_csv(&a.head)?;
    let scores = csvio::read_vrsq_csv(&a.vrsq)?.into_iter().map(|(id, r)| (id, r.score().total)).collect();
    let aligned = dataset::align(&captures, &scores, &a.window.config())?;
    warn(&aligned.warnings);
    csvio::write_windows_csv(&a.out, &aligned.windows)?;
    stdout(&format!("windows = {}\n", aligned.windows.len()))
}

fn labeled(path: &Path) -> Result<csvio::DatasetFile> {
    let file = csvio::read_dataset_csv(path)?;
    if !file.has_target {
        return Err(Error::Invalid(format!("{}: dataset has no target column", path.display())));
    }
    Ok(file)
}

fn train(a: &TrainArgs) -> Result<()> {
    let file = labeled(&a.data)?;
    let n = file.table.len();
    let mut hp = a.hyper.apply(HyperParams::default());
    let mut text = String::new();

    let (train_idx, test_idx) = split_indices(n, a.test_fraction, a.split_seed, None)?;
    let train_rows = file.table.subset(&train_idx);
    let test_rows = file.table.subset(&test_idx);
    if a.grid {
        let grid = Grid { m_try: hp.m_try, bootstrap: hp.bootstrap, ..Grid::default() };
        let result = parallel::grid_search_parallel(&train_rows, &grid.cells(), a.folds, a.seed)?;
        text.push_str(&report::grid(&result));
        hp = result.best;
    }
    let started = Instant::now();
    let model = parallel::train_parallel(&train_rows, &hp, a.seed)?;
    let elapsed = started.elapsed();
    text.push_str(&format!("train.n = {}\ntest.n = {}\n", train_rows.len(), test_rows.len()));
    text.push_str(&report::metrics("random.", &evaluate(&model, &test_rows)?));

    let groups: Vec<&str> = file.ids.iter().map(String::as_str).collect();
    let (g_train, g_test) = split_indices(n, a.test_fraction, a.split_seed, Some(&groups))?;
    let grouped = parallel::train_parallel(&file.table.subset(&g_train), &hp, a.seed)?;
    text.push_str(&report::metrics("grouped.", &evaluate(&grouped, &file.table.subset(&g_test))?));

    model_file::save_model(&a.out, &model)?;
    if let Some(path) = &a.test_out {
        let ids: Vec<String> = test_idx.iter().map(|&i| file.ids[i].clone()).collect();
        csvio::write_dataset_csv(path, &ids, &test_rows)?;
    }
    eprintln!("trained {} trees in {:.3} s", hp.n_trees, elapsed.as_secs_f64());
    stdout(&text)
}

fn eval(a: &EvalArgs) -> Result<()> {
    let model = model_file::load_model(&a.model)?;
    let file = labeled(&a.data)?;
    stdout(&report::metrics("", &evaluate(&model, &file.table)?))
}

fn predict(a: &PredictArgs) -> Result<()> {
    let model = model_file::load_model(&a.model)?;
    let file = csvio::read_dataset_csv(&a.data)?;
    let scores = model.predict_table(&file.table)?;
    let targets = file.has_target.then(|| file.table.targets());
    match &a.out {
        Some(path) => write_file(path, &csvio::predictions_csv(path, &file.ids, &scores, targets)?),
        None => {
            let bytes = csvio::predictions_csv(Path::new("<stdout>"), &file.ids, &scores, targets)?;
            stdout(&String::from_utf8_lossy(&bytes))
        }
    }
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let mut scenario = config::load_scenario(&a.config)?;
    if let Some(m) = &a.model {
        scenario.model = ScoreModel::Path(m.clone());
    }
    let seed = a.seed.unwrap_or(scenario.seed);
    let enabled = a.controller.map_or(scenario.controller_enabled, |s| s == Switch::On);
    let loaded;
    let mut oracle = Oracle;
    let source: &mut dyn ScoreSource = match &scenario.model {
        ScoreModel::Oracle => &mut oracle,
        ScoreModel::Path(p) => {
            loaded = model_file::load_model(p)?;
            &mut &loaded
        }
    };
    let log = simulate_session(&scenario.profile, &scenario.sim, source, enabled, seed)?;
    if let Some(out) = &a.out {
        csvio::write_session_csv(out, &log)?;
    }
    let summary = log.summary(&scenario.sim.controller)?;
    stdout(&report::summary("", &summary))
}

fn compare(a: &CompareArgs) -> Result<()> {
    let cfg = match &a.config {
        Some(p) => config::load_controller_config(p)?,
        None => ControllerConfig::default(),
    };
    let base = csvio::read_session_csv(&a.baseline)?;
    let adaptive = csvio::read_session_csv(&a.adaptive)?;
    stdout(&report::comparison(&compare_sessions(&base, &adaptive, &cfg)?))
}

fn serve(a: &ServeArgs) -> Result<()> {
    let cfg = match &a.config {
        Some(p) => config::load_service_config(p)?,
        None => ServiceConfig::default(),
    };
    let model = model_file::load_model(&a.model)?;
    if a.stdio {
        service::serve_stdio(&model, &cfg).map_err(|e| Error::io(Path::new("<stdio>"), e))?;
        return Ok(());
    }
    let addr = a.listen.as_deref().unwrap_or_default();
    let model = Arc::new(model);
    if let Some(path) = addr.strip_prefix("unix:") {
        return serve_unix(Path::new(path), model, cfg, a.max_sessions);
    }
    let listener = std::net::TcpListener::bind(addr).map_err(|e| Error::io(Path::new(addr), e))?;
    let local = listener.local_addr().map_err(|e| Error::io(Path::new(addr), e))?;
    eprintln!("listening on {local}");
    service::serve_tcp(listener, model, cfg, a.max_sessions).map_err(|e| Error::io(Path::new(addr), e))
}

#[cfg(unix)]
fn serve_unix(
    path: &Path,
    model: Arc<vrcomfort_core::ForestModel>,
    cfg: ServiceConfig,
    max_sessions: Option<usize>,
) -> Result<()> {
    let listener = std::os::unix::net::UnixListener::bind(path).map_err(|e| Error::io(path, e))?;
    eprintln!("listening on unix:{}", path.display());
    service::serve_unix(listener, model, cfg, max_sessions).map_err(|e| Error::io(path, e))
}

#[cfg(not(unix))]
fn serve_unix(path: &Path, _: Arc<vrcomfort_core::ForestModel>, _: ServiceConfig, _: Option<usize>) -> Result<()> {
    Err(Error::Invalid(format!("{}: local sockets are unsupported on this platform", path.display())))
}
