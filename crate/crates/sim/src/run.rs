//! Batch replay and the tick-loop self-benchmark.

use std::time::Instant;

use pneutouch_core::replay::ReplayError;
use pneutouch_core::session::SessionError;
use pneutouch_core::{
    replay, CalibrationTables, ControllerConfig, RenderConfig, Scene, Session, TelemetrySummary, Trace, Vec3,
};

use crate::telemetry::TelemetryLog;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
}

pub fn new_session(tables: &CalibrationTables, scene: &Scene, tick_rate_hz: u32) -> Result<Session, SessionError> {
    let config = ControllerConfig {
        tick_rate_hz,
        ..ControllerConfig::default()
    };
    Session::new(tables.clone(), scene.clone(), config, RenderConfig::default())
}

/// Replays `trace` and returns the complete telemetry document. Nothing is
/// returned for a run that faults.
pub fn run_replay(
    tables: &CalibrationTables,
    scene: &Scene,
    trace: &Trace,
    tick_rate_hz: u32,
) -> Result<(String, TelemetrySummary), RunError> {
    let mut session = new_session(tables, scene, tick_rate_hz)?;
    let mut log = TelemetryLog::default();
    let summary = replay(trace, &mut session, |r| log.push(r))?;
    Ok((log.finish(&summary), summary))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchReport {
    pub ticks: usize,
    pub p50_us: f64,
    pub p99_us: f64,
    pub max_us: f64,
}

/// Tick budget at 1 kHz, in microseconds.
pub const P99_BUDGET_US: f64 = 200.0;

impl BenchReport {
    pub fn within_budget(&self) -> bool {
        self.p99_us < P99_BUDGET_US
    }
}

/// Times `ticks` session steps of a finger sweeping back and forth across
/// the scene at a fixed depth.
pub fn run_bench(tables: &CalibrationTables, scene: &Scene, tick_rate_hz: u32, ticks: usize) -> Result<BenchReport, SessionError> {
    let mut session = new_session(tables, scene, tick_rate_hz)?;
    let (origin, extent) = scene
        .meshes
        .first()
        .map(|m| (m.region.origin_mm, m.region.extent_mm))
        .unwrap_or(([0.0, 0.0], [80.0, 60.0]));
    let depth = scene.meshes.first().map_or(0.0, |m| m.region.surface_height_mm) - 0.5;
    let mut times = Vec::with_capacity(ticks);
    for k in 0..ticks {
        let phase = (k % 2000) as f64 / 2000.0;
        let tri = if phase < 0.5 { 2.0 * phase } else { 2.0 - 2.0 * phase };
        let p = Vec3::new(
            origin[0] + extent[0] * (0.05 + 0.9 * tri),
            origin[1] + extent[1] * 0.5,
            depth,
        );
        let start = Instant::now();
        let r = session.step(Some(p));
        times.push(start.elapsed().as_secs_f64() * 1e6);
        if r.is_err() {
            session.reset();
        }
    }
    if times.is_empty() {
        return Ok(BenchReport {
            ticks: 0,
            p50_us: 0.0,
            p99_us: 0.0,
            max_us: 0.0,
        });
    }
    times.sort_by(f64::total_cmp);
    let pick = |q: f64| times[((times.len() - 1) as f64 * q).round() as usize];
    Ok(BenchReport {
        ticks,
        p50_us: pick(0.50),
        p99_us: pick(0.99),
        max_us: *times.last().unwrap_or(&0.0),
    })
}
