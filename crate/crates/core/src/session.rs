//! The per-tick pipeline: renderer, controller, plant.

use crate::actuator::{exhaust_step, inflate_step, seal, thermal_step, vibration_amplitude, ForceState, ModelError, ThermalState};
use crate::calibration::CalibrationTables;
use crate::controller::{
    CommandError, ControlError, Controller, ControllerConfig, HapticCommand, PlanError, RegulatorSetpoints, SafetyViolation,
    ValveBank,
};
use crate::render::{RenderConfig, Renderer, Vec3};
use crate::scene::{Scene, SceneError};

pub const MIN_TICK_RATE_HZ: u32 = 100;
pub const MAX_TICK_RATE_HZ: u32 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SessionError {
    #[error("tick rate {0} Hz is outside [100, 2000] Hz")]
    TickRate(u32),
    #[error("scene ambient {scene} °C does not match calibration ambient {calibration} °C")]
    Ambient { scene: f64, calibration: f64 },
    #[error("invalid scene: {0}")]
    Scene(#[from] SceneError),
}

/// A tick that could not complete.
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SessionFault {
    #[error("safety interlock at tick {tick}: {violation}")]
    Safety { tick: u64, violation: SafetyViolation },
    #[error("tick {tick}: {source}")]
    Command { tick: u64, source: CommandError },
    #[error("tick {tick}: {source}")]
    Plan { tick: u64, source: PlanError },
    #[error("tick {tick}: plant model: {source}")]
    Model { tick: u64, source: ModelError },
}

impl SessionFault {
    pub fn tick(&self) -> u64 {
        match *self {
            SessionFault::Safety { tick, .. }
            | SessionFault::Command { tick, .. }
            | SessionFault::Plan { tick, .. }
            | SessionFault::Model { tick, .. } => tick,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelemetryRecord {
    pub tick: u64,
    pub time_s: f64,
    pub command: HapticCommand,
    pub bank: ValveBank,
    pub setpoints: RegulatorSetpoints,
    pub membrane_force_n: f64,
    pub contact_temp_c: f64,
    /// Vibration bursts requested on this tick.
    pub vib_event: u32,
    /// Peak acceleration of the running vibration cycle, 0 when idle.
    pub vib_amplitude_g: f64,
    /// The rendered force hit the actuator maximum.
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TelemetrySummary {
    pub ticks: u64,
    pub bursts: u64,
    pub clamped_ticks: u64,
    /// 0 when no tick ran.
    pub min_temp_c: f64,
    pub max_force_n: f64,
}

impl TelemetrySummary {
    pub fn record(&mut self, r: &TelemetryRecord) {
        if self.ticks == 0 {
            self.min_temp_c = r.contact_temp_c;
            self.max_force_n = r.membrane_force_n;
        } else {
            self.min_temp_c = self.min_temp_c.min(r.contact_temp_c);
            self.max_force_n = self.max_force_n.max(r.membrane_force_n);
        }
        self.ticks += 1;
        self.bursts += r.vib_event as u64;
        self.clamped_ticks += r.clamped as u64;
    }
}

/// One simulated device driven by one finger over one scene.
#[derive(Debug, Clone)]
pub struct Session {
    tables: CalibrationTables,
    controller_config: ControllerConfig,
    renderer: Renderer,
    controller: Controller,
    thermal: ThermalState,
    force: ForceState,
}

impl Session {
    pub fn new(
        tables: CalibrationTables,
        scene: Scene,
        controller_config: ControllerConfig,
        render_config: RenderConfig,
    ) -> Result<Self, SessionError> {
        let rate = controller_config.tick_rate_hz;
        if !(MIN_TICK_RATE_HZ..=MAX_TICK_RATE_HZ).contains(&rate) {
            return Err(SessionError::TickRate(rate));
        }
        scene.validate()?;
        if libm::fabs(scene.ambient_c - tables.ambient_c()) > 1e-9 {
            return Err(SessionError::Ambient {
                scene: scene.ambient_c,
                calibration: tables.ambient_c(),
            });
        }
        let renderer = Renderer::new(scene, render_config, tables.peak_vibration_hz());
        let controller = Controller::new(&tables, controller_config);
        let thermal = ThermalState::ambient(&tables);
        Ok(Self {
            tables,
            controller_config,
            renderer,
            controller,
            thermal,
            force: ForceState::default(),
        })
    }

    pub fn tables(&self) -> &CalibrationTables {
        &self.tables
    }

    pub fn scene(&self) -> &Scene {
        self.renderer.scene()
    }

    pub fn tick_rate_hz(&self) -> u32 {
        self.controller_config.tick_rate_hz
    }

    /// Index of the next tick.
    pub fn tick_index(&self) -> u64 {
        self.controller.tick_index()
    }

    pub fn tick_time_s(&self, tick: u64) -> f64 {
        tick as f64 / self.tick_rate_hz() as f64
    }

    /// Back to tick zero with the device at rest.
    pub fn reset(&mut self) {
        let scene = self.renderer.scene().clone();
        let render_config = *self.renderer.config();
        self.renderer = Renderer::new(scene, render_config, self.tables.peak_vibration_hz());
        self.controller = Controller::new(&self.tables, self.controller_config);
        self.thermal = ThermalState::ambient(&self.tables);
        self.force = ForceState::default();
    }

    /// Runs one tick with the finger at `finger` (`None`: no position known).
    ///
    /// On a safety fault the plant sees the forced all-exhaust bank before
    /// the fault is returned.
    pub fn step(&mut self, finger: Option<Vec3>) -> Result<TelemetryRecord, SessionFault> {
        let tick = self.controller.tick_index();
        let time_s = self.tick_time_s(tick);
        let dt_s = 1.0 / self.tick_rate_hz() as f64;
        let rendered = self.renderer.step(time_s, finger);

        let out = match self.controller.tick(&self.tables, &rendered.command) {
            Ok(out) => out,
            Err(ControlError::Safety { tick, violation }) => {
                self.force = exhaust_step(self.force, &self.tables, dt_s);
                return Err(SessionFault::Safety { tick, violation });
            }
            Err(ControlError::Command(source)) => return Err(SessionFault::Command { tick, source }),
            Err(ControlError::Plan(source)) => return Err(SessionFault::Plan { tick, source }),
        };

        let model = |source| SessionFault::Model { tick, source };
        self.force = if out.bank.pv_lower {
            inflate_step(self.force, &self.tables, self.controller_config.chamber_supply_psi, dt_s).map_err(model)?
        } else if out.bank.nv_lower {
            exhaust_step(self.force, &self.tables, dt_s)
        } else {
            seal(self.force)
        };
        self.thermal.input_pressure_bar = out.setpoints.vortex_supply_bar;
        self.thermal = thermal_step(self.thermal, &self.tables, dt_s).map_err(model)?;
        let vib_amplitude_g = match out.vib_cycle_hz {
            Some(hz) => vibration_amplitude(&self.tables, hz).map_err(model)?,
            None => 0.0,
        };

        Ok(TelemetryRecord {
            tick,
            time_s,
            command: rendered.command,
            bank: out.bank,
            setpoints: out.setpoints,
            membrane_force_n: self.force.membrane_force_n,
            contact_temp_c: self.thermal.contact_temp_c,
            vib_event: rendered.command.bursts,
            vib_amplitude_g,
            clamped: rendered.clamped,
        })
    }
}
