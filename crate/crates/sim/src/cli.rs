//! Command-line front end.

use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pneutouch_core::replay::ReplayError;
use pneutouch_core::session::{MAX_TICK_RATE_HZ, MIN_TICK_RATE_HZ};
use pneutouch_core::{CalibrationTables, SessionFault};

use crate::calib_file::{bundled_calibration, load_calibration};
use crate::diag::FormatError;
use crate::live::{self, LiveConfig, DEFAULT_DECIMATION, DEFAULT_PORT};
use crate::run::{run_bench, run_replay, RunError, P99_BUDGET_US};
use crate::scene_file::{resolve_scene, BUNDLED_SCENES};
use crate::telemetry::summary_line;
use crate::trace_file::resolve_trace;

pub const EXIT_OK: u8 = 0;
pub const EXIT_RUNTIME: u8 = 1;
pub const EXIT_IO: u8 = 3;
pub const EXIT_SCHEMA: u8 = 4;
pub const EXIT_SAFETY: u8 = 5;

#[derive(Debug, Parser)]
#[command(name = "pneutouch", version, about = "Pneumatic fingertip actuator simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Replay a finger trace and write per-tick telemetry.
    Replay(ReplayArgs),
    /// Run live sessions over WebSocket.
    Serve(ServeArgs),
    /// Time the tick pipeline.
    Bench(BenchArgs),
    /// Check scene, trace and calibration files.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Calibration file. Defaults to the bundled calibration.
    #[arg(long)]
    pub calib: Option<PathBuf>,
    /// Control tick rate in Hz.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u32).range(MIN_TICK_RATE_HZ as i64..=MAX_TICK_RATE_HZ as i64))]
    pub tick_rate: u32,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Bundled scene name or scene file.
    #[arg(long)]
    pub scene: String,
    /// Bundled trace name or trace file.
    #[arg(long)]
    pub trace: String,
    /// Telemetry output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Scenes offered to clients (bundled names or files); the first is
    /// active on connect. Defaults to every bundled scene.
    #[arg(long)]
    pub scene: Vec<String>,
    #[arg(long, env = "PNEUTOUCH_PORT", default_value_t = DEFAULT_PORT)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: IpAddr,
    /// Send a telemetry frame every this many ticks.
    #[arg(long, default_value_t = DEFAULT_DECIMATION, value_parser = clap::value_parser!(u32).range(1..))]
    pub decimation: u32,
    /// Record each session's received positions and telemetry here.
    #[arg(long)]
    pub record_dir: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "abrasive_ice")]
    pub scene: String,
    #[arg(long, default_value_t = 20_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub ticks: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("input").required(true).multiple(true))]
pub struct ValidateArgs {
    #[arg(long, group = "input")]
    pub scene: Option<String>,
    #[arg(long, group = "input")]
    pub trace: Option<String>,
    #[arg(long, group = "input")]
    pub calib: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        let code = match e {
            FormatError::Io { .. } => EXIT_IO,
            FormatError::Invalid(_) => EXIT_SCHEMA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        let code = match &e {
            RunError::Replay(ReplayError::Fault(SessionFault::Safety { .. })) => EXIT_SAFETY,
            RunError::Replay(ReplayError::Fault(_)) => EXIT_RUNTIME,
            RunError::Replay(_) | RunError::Session(_) => EXIT_SCHEMA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    }
}

fn with_context(what: &str, arg: &str) -> impl FnOnce(FormatError) -> Failure {
    let (what, arg) = (what.to_string(), arg.to_string());
    move |e| {
        let mut f = Failure::from(e);
        if matches!(f.code, EXIT_SCHEMA) {
            f.message = format!("{what} {arg}: {}", f.message);
        }
        f
    }
}

fn tables(calib: Option<&Path>) -> Result<CalibrationTables, Failure> {
    match calib {
        Some(path) => load_calibration(path).map_err(with_context("calibration", &path.display().to_string())),
        None => Ok(bundled_calibration()),
    }
}

/// Runs one command and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    let result = match cli.command {
        Command::Replay(a) => replay(a),
        Command::Serve(a) => serve(a),
        Command::Bench(a) => bench(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn replay(a: ReplayArgs) -> Result<(), Failure> {
    let tables = tables(a.common.calib.as_deref())?;
    let scene = resolve_scene(&a.scene).map_err(with_context("scene", &a.scene))?;
    let trace = resolve_trace(&a.trace).map_err(with_context("trace", &a.trace))?;
    let (doc, summary) = run_replay(&tables, &scene, &trace, a.common.tick_rate)?;
    match &a.out {
        Some(path) => write_atomically(path, doc.as_bytes())?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(doc.as_bytes()).map_err(|e| io_failure(Path::new("<stdout>"), e))?;
        }
    }
    eprintln!("{}", summary_line(&summary));
    Ok(())
}

/// Writes through a sibling temporary file so readers never see a partial
/// document.
fn write_atomically(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.partial"));
    std::fs::write(&tmp, bytes).map_err(|e| io_failure(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        io_failure(path, e)
    })
}

fn serve(a: ServeArgs) -> Result<(), Failure> {
    let tables = tables(a.common.calib.as_deref())?;
    let names: Vec<String> = if a.scene.is_empty() {
        BUNDLED_SCENES.iter().map(|(n, _)| n.to_string()).collect()
    } else {
        a.scene.clone()
    };
    let mut scenes = Vec::new();
    for n in &names {
        let scene = resolve_scene(n).map_err(with_context("scene", n))?;
        crate::run::new_session(&tables, &scene, a.common.tick_rate).map_err(|e| Failure {
            code: EXIT_SCHEMA,
            message: format!("scene {n}: {e}"),
        })?;
        scenes.push(scene);
    }
    let mut config = LiveConfig::new(tables, scenes);
    config.tick_rate_hz = a.common.tick_rate;
    config.decimation = a.decimation;
    config.record_dir = a.record_dir;

    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure {
        code: EXIT_RUNTIME,
        message: e.to_string(),
    })?;
    let addr = SocketAddr::new(a.bind, a.port);
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| Failure {
            code: EXIT_IO,
            message: format!("cannot listen on {addr}: {e}"),
        })?;
        let local = listener.local_addr().map_err(|e| io_failure(Path::new("<socket>"), e))?;
        eprintln!("listening on ws://{local}/ws");
        live::serve(listener, config).await.map_err(|e| Failure {
            code: EXIT_IO,
            message: e.to_string(),
        })
    })
}

fn bench(a: BenchArgs) -> Result<(), Failure> {
    let tables = tables(a.common.calib.as_deref())?;
    let scene = resolve_scene(&a.scene).map_err(with_context("scene", &a.scene))?;
    let report = run_bench(&tables, &scene, a.common.tick_rate, a.ticks as usize).map_err(|e| Failure {
        code: EXIT_SCHEMA,
        message: e.to_string(),
    })?;
    println!(
        "ticks={} p50_us={:.2} p99_us={:.2} max_us={:.2}",
        report.ticks, report.p50_us, report.p99_us, report.max_us
    );
    if !report.within_budget() {
        eprintln!("warning: p99 tick time {:.2} us is over the {P99_BUDGET_US} us budget", report.p99_us);
    }
    Ok(())
}

fn validate(a: ValidateArgs) -> Result<(), Failure> {
    if let Some(path) = &a.calib {
        let t = tables(Some(path))?;
        println!("calibration {}: ok (revision {})", path.display(), t.data().revision);
    }
    if let Some(s) = &a.scene {
        let scene = resolve_scene(s).map_err(with_context("scene", s))?;
        println!("scene {s}: ok ({} meshes)", scene.meshes.len());
    }
    if let Some(t) = &a.trace {
        let trace = resolve_trace(t).map_err(with_context("trace", t))?;
        println!("trace {t}: ok ({} samples, {} s)", trace.samples.len(), trace.duration_s());
    }
    Ok(())
}
