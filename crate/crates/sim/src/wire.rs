//! Live session wire protocol: JSON text frames tagged by `type`.
//!
//! Every frame carries `seq`. Clients number their frames; the server drops
//! finger frames whose `seq` is not above the highest seen so far. Server
//! frames are numbered per connection from 0.

use pneutouch_core::render::{GridAxis, MaterialKind};
use pneutouch_core::{Scene, TelemetryRecord, ValveBank};
use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Hello { seq: u64, version: u32 },
    Finger { seq: u64, t: f64, x: f64, y: f64, z: f64 },
    SelectScene { seq: u64, name: String },
    Reset { seq: u64 },
}

impl ClientMessage {
    pub fn seq(&self) -> u64 {
        match *self {
            ClientMessage::Hello { seq, .. }
            | ClientMessage::Finger { seq, .. }
            | ClientMessage::SelectScene { seq, .. }
            | ClientMessage::Reset { seq } => seq,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Valves {
    pub pv_lower: bool,
    pub nv_lower: bool,
    pub pv_upper: bool,
    pub nv_upper: bool,
}

impl From<ValveBank> for Valves {
    fn from(b: ValveBank) -> Self {
        Self {
            pv_lower: b.pv_lower,
            nv_lower: b.nv_lower,
            pv_upper: b.pv_upper,
            nv_upper: b.nv_upper,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct CommandInfo {
    pub target_force_N: f64,
    pub vib_frequency_Hz: f64,
    pub thermal_target_C: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct MeshInfo {
    pub name: String,
    pub kind: String,
    pub origin_mm: [f64; 2],
    pub extent_mm: [f64; 2],
    pub surface_height_mm: f64,
    pub temperature_C: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stiffness_k_N_per_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_pitch_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_axis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub click_height_mm: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    Malformed,
    VersionMismatch,
    ExpectedHello,
    UnknownScene,
    Busy,
    Safety,
    Fault,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
#[allow(non_snake_case)]
pub enum ServerMessage {
    Hello {
        seq: u64,
        version: u32,
        tick_rate_Hz: u32,
        decimation: u32,
        scenes: Vec<String>,
    },
    Telemetry {
        seq: u64,
        tick: u64,
        time_s: f64,
        force_N: f64,
        temp_C: f64,
        valves: Valves,
        /// Bursts requested since the previous frame.
        vib_event: u32,
        /// Any tick since the previous frame was force-clamped.
        clamped: bool,
        command: CommandInfo,
        /// Frames dropped so far because the client fell behind.
        dropped: u64,
    },
    SceneInfo {
        seq: u64,
        name: String,
        ambient_C: f64,
        meshes: Vec<MeshInfo>,
    },
    Error {
        seq: u64,
        code: ErrorCode,
        message: String,
    },
}

impl ServerMessage {
    pub fn set_seq(&mut self, n: u64) {
        match self {
            ServerMessage::Hello { seq, .. }
            | ServerMessage::Telemetry { seq, .. }
            | ServerMessage::SceneInfo { seq, .. }
            | ServerMessage::Error { seq, .. } => *seq = n,
        }
    }

    pub fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        ServerMessage::Error {
            seq: 0,
            code,
            message: message.into(),
        }
    }

    pub fn scene_info(scene: &Scene) -> Self {
        ServerMessage::SceneInfo {
            seq: 0,
            name: scene.name.clone(),
            ambient_C: scene.ambient_c,
            meshes: scene
                .meshes
                .iter()
                .map(|m| {
                    let mut info = MeshInfo {
                        name: m.name.clone(),
                        kind: String::new(),
                        origin_mm: m.region.origin_mm,
                        extent_mm: m.region.extent_mm,
                        surface_height_mm: m.region.surface_height_mm,
                        temperature_C: m.material.temperature_c,
                        stiffness_k_N_per_mm: None,
                        grid_pitch_mm: None,
                        grid_axis: None,
                        click_height_mm: None,
                    };
                    match m.material.kind {
                        MaterialKind::Stiffness { stiffness_k_n_per_mm } => {
                            info.kind = "stiffness_surface".into();
                            info.stiffness_k_N_per_mm = Some(stiffness_k_n_per_mm);
                        }
                        MaterialKind::Texture {
                            grid_pitch_mm, grid_axis, ..
                        } => {
                            info.kind = "textured_surface".into();
                            info.grid_pitch_mm = Some(grid_pitch_mm);
                            info.grid_axis = Some(match grid_axis {
                                GridAxis::X => "x".into(),
                                GridAxis::Y => "y".into(),
                            });
                        }
                        MaterialKind::Button { click_height_mm } => {
                            info.kind = "button".into();
                            info.click_height_mm = Some(click_height_mm);
                        }
                    }
                    info
                })
                .collect(),
        }
    }
}

/// Folds decimated ticks into one telemetry frame.
#[derive(Debug, Clone, Default)]
pub struct FrameAccumulator {
    bursts: u32,
    clamped: bool,
}

impl FrameAccumulator {
    pub fn add(&mut self, r: &TelemetryRecord) {
        self.bursts = self.bursts.saturating_add(r.vib_event);
        self.clamped |= r.clamped;
    }

    /// Frame for `r`, the last tick of the window; resets the window.
    pub fn frame(&mut self, r: &TelemetryRecord, dropped: u64) -> ServerMessage {
        let frame = ServerMessage::Telemetry {
            seq: 0,
            tick: r.tick,
            time_s: r.time_s,
            force_N: r.membrane_force_n,
            temp_C: r.contact_temp_c,
            valves: r.bank.into(),
            vib_event: self.bursts,
            clamped: self.clamped,
            command: CommandInfo {
                target_force_N: r.command.target_force_n,
                vib_frequency_Hz: r.command.vib_frequency_hz,
                thermal_target_C: r.command.thermal_target_c,
            },
            dropped,
        };
        *self = Self::default();
        frame
    }
}
