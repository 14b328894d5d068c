//! Simulation core for a pneumatic multi-mode fingertip actuator.
//!
//! The crate is `no_std` (with `alloc`). It holds the calibrated plant model,
//! the valve controller, the haptic renderer and the per-tick session
//! pipeline. File formats, the CLI and the live server live in
//! `pneutouch-sim`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod actuator;
pub mod calibration;
pub mod controller;
#[cfg(any(test, feature = "fixtures"))]
pub mod fixtures;
pub mod interp;
pub mod limits;
pub mod render;
pub mod replay;
pub mod scene;
pub mod session;

pub use calibration::{CalibError, CalibrationData, CalibrationTables, ForceSeries, ThermalCurve};
pub use controller::{Controller, ControllerConfig, HapticCommand, RegulatorSetpoints, ValveBank};
pub use render::{FingerSample, RenderConfig, Renderer, Vec3};
pub use replay::{replay, Trace};
pub use scene::Scene;
pub use session::{Session, SessionFault, TelemetryRecord, TelemetrySummary};
