//! Live sessions over WebSocket.
//!
//! Each connection gets its own tick-loop thread running the full pipeline
//! on a monotonic clock. The socket reader only writes the latest-position
//! register and queues control requests; the tick loop hands frames to the
//! socket writer with `try_send` and counts what it has to drop.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc as std_mpsc;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use pneutouch_core::{CalibrationTables, Scene, TelemetryRecord, TelemetrySummary, Vec3};
use tokio::net::TcpListener;
use tokio::sync::mpsc;

use crate::run::new_session;
use crate::telemetry::{header, summary_line, write_record};
use crate::wire::{ClientMessage, ErrorCode, FrameAccumulator, ServerMessage, PROTOCOL_VERSION};

pub const DEFAULT_PORT: u16 = 8765;
pub const DEFAULT_DECIMATION: u32 = 10;

#[derive(Debug, Clone)]
pub struct LiveConfig {
    pub tables: CalibrationTables,
    /// Scenes clients may select. The first one is active on connect.
    pub scenes: Vec<Scene>,
    pub tick_rate_hz: u32,
    pub decimation: u32,
    /// Outbound frames buffered per connection before frames are dropped.
    pub queue_capacity: usize,
    /// Where to write each session's received positions and telemetry.
    pub record_dir: Option<PathBuf>,
}

impl LiveConfig {
    pub fn new(tables: CalibrationTables, scenes: Vec<Scene>) -> Self {
        Self {
            tables,
            scenes,
            tick_rate_hz: 1000,
            decimation: DEFAULT_DECIMATION,
            queue_capacity: 256,
            record_dir: None,
        }
    }
}

#[derive(Clone)]
struct AppState {
    config: Arc<LiveConfig>,
    next_id: Arc<AtomicU64>,
}

pub fn router(config: LiveConfig) -> Router {
    let state = AppState {
        config: Arc::new(config),
        next_id: Arc::new(AtomicU64::new(0)),
    };
    Router::new().route("/ws", get(upgrade)).with_state(state)
}

pub async fn serve(listener: TcpListener, config: LiveConfig) -> io::Result<()> {
    axum::serve(listener, router(config)).await
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| connection(socket, state))
}

enum Control {
    Select(Scene),
    Reset,
}

async fn connection(socket: WebSocket, state: AppState) {
    let config = state.config.clone();
    let (mut sink, mut stream) = socket.split();
    let (out_tx, mut out_rx) = mpsc::channel::<ServerMessage>(config.queue_capacity.max(1));
    let writer = tokio::spawn(async move {
        let mut seq = 0;
        while let Some(mut msg) = out_rx.recv().await {
            msg.set_seq(seq);
            seq += 1;
            let text = serde_json::to_string(&msg).expect("server frames serialize");
            if sink.send(Message::Text(text)).await.is_err() {
                break;
            }
        }
        let _ = sink.close().await;
    });

    if handshake(&mut stream, &out_tx, &config).await {
        let scene = config.scenes.first().cloned().unwrap_or_else(|| Scene {
            name: "empty".into(),
            ambient_c: config.tables.ambient_c(),
            meshes: Vec::new(),
        });
        let _ = out_tx.send(ServerMessage::scene_info(&scene)).await;
        let id = state.next_id.fetch_add(1, Ordering::Relaxed);
        let register = Arc::new(Mutex::new(None));
        let (ctl_tx, ctl_rx) = std_mpsc::sync_channel(16);
        let tick_thread = {
            let (config, register, out) = (config.clone(), register.clone(), out_tx.clone());
            thread::spawn(move || tick_loop(id, &config, scene, &register, ctl_rx, out))
        };
        intake(&mut stream, &out_tx, &config, &register, &ctl_tx).await;
        drop(ctl_tx);
        let _ = tokio::task::spawn_blocking(move || tick_thread.join()).await;
    }
    drop(out_tx);
    let _ = writer.await;
}

async fn handshake(
    stream: &mut futures_util::stream::SplitStream<WebSocket>,
    out: &mpsc::Sender<ServerMessage>,
    config: &LiveConfig,
) -> bool {
    while let Some(Ok(frame)) = stream.next().await {
        let text = match frame {
            Message::Text(t) => t,
            Message::Close(_) => return false,
            Message::Binary(_) => String::new(),
            _ => continue,
        };
        let reply = match serde_json::from_str::<ClientMessage>(&text) {
            Ok(ClientMessage::Hello { version, .. }) if version == PROTOCOL_VERSION => {
                let _ = out
                    .send(ServerMessage::Hello {
                        seq: 0,
                        version: PROTOCOL_VERSION,
                        tick_rate_Hz: config.tick_rate_hz,
                        decimation: config.decimation,
                        scenes: config.scenes.iter().map(|s| s.name.clone()).collect(),
                    })
                    .await;
                return true;
            }
            Ok(ClientMessage::Hello { version, .. }) => ServerMessage::error(
                ErrorCode::VersionMismatch,
                format!("server speaks protocol {PROTOCOL_VERSION}, client sent {version}"),
            ),
            _ => ServerMessage::error(ErrorCode::ExpectedHello, "first frame must be hello"),
        };
        let _ = out.send(reply).await;
        return false;
    }
    false
}

async fn intake(
    stream: &mut futures_util::stream::SplitStream<WebSocket>,
    out: &mpsc::Sender<ServerMessage>,
    config: &LiveConfig,
    register: &Mutex<Option<Vec3>>,
    control: &std_mpsc::SyncSender<Control>,
) {
    let mut last_seq: Option<u64> = None;
    while let Some(Ok(frame)) = stream.next().await {
        let text = match frame {
            Message::Text(t) => t,
            Message::Close(_) => break,
            Message::Binary(_) => {
                let _ = out.send(ServerMessage::error(ErrorCode::Malformed, "binary frames are not accepted")).await;
                continue;
            }
            _ => continue,
        };
        let msg = match serde_json::from_str::<ClientMessage>(&text) {
            Ok(m) => m,
            Err(e) => {
                let _ = out.send(ServerMessage::error(ErrorCode::Malformed, e.to_string())).await;
                continue;
            }
        };
        let stale = last_seq.is_some_and(|s| msg.seq() <= s);
        last_seq = Some(last_seq.map_or(msg.seq(), |s| s.max(msg.seq())));
        match msg {
            ClientMessage::Finger { x, y, z, .. } => {
                if stale {
                    continue;
                }
                let p = Vec3::new(x, y, z);
                if !p.is_finite() {
                    let _ = out.send(ServerMessage::error(ErrorCode::Malformed, "finger position is not finite")).await;
                    continue;
                }
                *register.lock().expect("register lock") = Some(p);
            }
            ClientMessage::SelectScene { name, .. } => match config.scenes.iter().find(|s| s.name == name) {
                Some(scene) => {
                    if control.try_send(Control::Select(scene.clone())).is_ok() {
                        let _ = out.send(ServerMessage::scene_info(scene)).await;
                    } else {
                        let _ = out.send(ServerMessage::error(ErrorCode::Busy, "control queue full")).await;
                    }
                }
                None => {
                    let _ = out
                        .send(ServerMessage::error(ErrorCode::UnknownScene, format!("no scene named `{name}`")))
                        .await;
                }
            },
            ClientMessage::Reset { .. } => {
                if control.try_send(Control::Reset).is_err() {
                    let _ = out.send(ServerMessage::error(ErrorCode::Busy, "control queue full")).await;
                }
            }
            ClientMessage::Hello { .. } => {}
        }
    }
}

enum RecEvent {
    Begin { segment: u32, scene: String },
    Tick { record: TelemetryRecord, finger: Option<Vec3> },
    End,
}

fn tick_loop(
    id: u64,
    config: &LiveConfig,
    scene: Scene,
    register: &Mutex<Option<Vec3>>,
    control: std_mpsc::Receiver<Control>,
    out: mpsc::Sender<ServerMessage>,
) {
    let rate = config.tick_rate_hz;
    let mut session = new_session(&config.tables, &scene, rate).expect("live scenes are validated at startup");
    let recorder = config.record_dir.clone().map(|dir| {
        let (tx, rx) = std_mpsc::channel();
        let handle = thread::spawn(move || recorder(dir, id, rate, rx));
        (tx, handle)
    });
    let record = |ev: RecEvent| {
        if let Some((tx, _)) = &recorder {
            let _ = tx.send(ev);
        }
    };
    let mut segment = 0;
    record(RecEvent::Begin {
        segment,
        scene: scene.name.clone(),
    });

    let period = Duration::from_secs_f64(1.0 / rate as f64);
    let decimation = config.decimation.max(1) as u64;
    let start = Instant::now();
    let mut elapsed_ticks: u32 = 0;
    let mut acc = FrameAccumulator::default();
    let mut dropped = 0u64;
    let emit = |msg: ServerMessage, dropped: &mut u64| {
        if out.try_send(msg).is_err() {
            *dropped += 1;
        }
    };

    'run: loop {
        loop {
            let next = match control.try_recv() {
                Ok(c) => c,
                Err(std_mpsc::TryRecvError::Empty) => break,
                Err(std_mpsc::TryRecvError::Disconnected) => break 'run,
            };
            record(RecEvent::End);
            segment += 1;
            match next {
                Control::Select(s) => {
                    record(RecEvent::Begin {
                        segment,
                        scene: s.name.clone(),
                    });
                    session = new_session(&config.tables, &s, rate).expect("live scenes are validated at startup");
                }
                Control::Reset => {
                    record(RecEvent::Begin {
                        segment,
                        scene: session.scene().name.clone(),
                    });
                    session.reset();
                }
            }
            acc = FrameAccumulator::default();
        }

        let finger = *register.lock().expect("register lock");
        match session.step(finger) {
            Ok(r) => {
                acc.add(&r);
                if (r.tick + 1) % decimation == 0 {
                    let frame = acc.frame(&r, dropped);
                    emit(frame, &mut dropped);
                }
                record(RecEvent::Tick { record: r, finger });
            }
            Err(fault) => {
                let code = match fault {
                    pneutouch_core::SessionFault::Safety { .. } => ErrorCode::Safety,
                    _ => ErrorCode::Fault,
                };
                emit(ServerMessage::error(code, format!("{fault}; session reset")), &mut dropped);
                record(RecEvent::End);
                segment += 1;
                record(RecEvent::Begin {
                    segment,
                    scene: session.scene().name.clone(),
                });
                session.reset();
                acc = FrameAccumulator::default();
            }
        }

        elapsed_ticks = elapsed_ticks.wrapping_add(1);
        let deadline = start + period * elapsed_ticks;
        let now = Instant::now();
        if deadline > now {
            thread::sleep(deadline - now);
        }
    }

    record(RecEvent::End);
    if let Some((tx, handle)) = recorder {
        drop(tx);
        let _ = handle.join();
    }
}

/// Name stem of a recorded segment; the trace and telemetry share it.
pub fn segment_stem(id: u64, segment: u32, scene: &str) -> String {
    format!("session-{id}-{segment}-{scene}")
}

struct SegmentFiles {
    trace: BufWriter<File>,
    telemetry: BufWriter<File>,
    summary: TelemetrySummary,
}

fn recorder(dir: PathBuf, id: u64, rate: u32, events: std_mpsc::Receiver<RecEvent>) -> io::Result<()> {
    std::fs::create_dir_all(&dir)?;
    let mut current: Option<SegmentFiles> = None;
    let close = |seg: SegmentFiles| -> io::Result<()> {
        let SegmentFiles {
            mut trace,
            mut telemetry,
            summary,
        } = seg;
        writeln!(telemetry, "{}", summary_line(&summary))?;
        trace.flush()?;
        telemetry.flush()
    };
    for ev in events {
        match ev {
            RecEvent::Begin { segment, scene } => {
                if let Some(seg) = current.take() {
                    close(seg)?;
                }
                let stem = segment_stem(id, segment, &scene);
                let mut trace = BufWriter::new(File::create(dir.join(format!("{stem}.trace")))?);
                write!(trace, "name = {stem}\nsample_rate_Hz = {rate}\nunit = mm\nt x y z\n")?;
                let mut telemetry = BufWriter::new(File::create(dir.join(format!("{stem}.csv")))?);
                writeln!(telemetry, "{}", header())?;
                current = Some(SegmentFiles {
                    trace,
                    telemetry,
                    summary: TelemetrySummary::default(),
                });
            }
            RecEvent::Tick { record, finger } => {
                if let Some(seg) = current.as_mut() {
                    if let Some(p) = finger {
                        writeln!(seg.trace, "{} {} {} {}", record.time_s, p.x, p.y, p.z)?;
                    }
                    let mut row = String::new();
                    write_record(&mut row, &record);
                    seg.telemetry.write_all(row.as_bytes())?;
                    seg.summary.record(&record);
                }
            }
            RecEvent::End => {
                if let Some(seg) = current.take() {
                    close(seg)?;
                }
            }
        }
    }
    if let Some(seg) = current.take() {
        close(seg)?;
    }
    Ok(())
}
