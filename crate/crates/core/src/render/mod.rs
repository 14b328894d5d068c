//! Haptic rendering: finger motion over scene surfaces to [`HapticCommand`]s.
//!
//! Stiffness surfaces render a contact pressure plus a spring term on the
//! press depth. Textured surfaces render contact pressure plus one vibration
//! burst per grating line crossed. Buttons render contact pressure plus a
//! single click pulse per press. Every surface also sets its cooling target.

pub mod button;
pub mod geometry;
pub mod texture;

use alloc::collections::VecDeque;
use alloc::vec::Vec;

pub use button::{render_button, ButtonTracker, DEFAULT_REARM_MARGIN_MM};
pub use geometry::{is_touched, FingerSample, GridAxis, MaterialKind, Mesh, Region, SurfaceMaterial, Vec3};
pub use texture::{burst_frequency_hz, crossings, estimate_velocity, VelocityError};

use crate::controller::HapticCommand;
use crate::limits::{CHAMBER_MAX_PSI, MAX_FORCE_N};
use crate::scene::Scene;

/// Contact pressure applied on every touched surface.
pub const CONTACT_FORCE_N: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndentationMode {
    /// Press depth along the surface normal; lateral sliding adds nothing.
    #[default]
    SurfaceNormal,
    /// Straight-line distance from the first contact point.
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderConfig {
    pub indentation: IndentationMode,
    pub contact_force_n: f64,
    pub max_force_n: f64,
    /// Samples used for the velocity estimate.
    pub velocity_window: usize,
    pub rearm_margin_mm: f64,
    /// Supply for button click pulses.
    pub click_supply_psi: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            indentation: IndentationMode::SurfaceNormal,
            contact_force_n: CONTACT_FORCE_N,
            max_force_n: MAX_FORCE_N,
            velocity_window: 5,
            rearm_margin_mm: DEFAULT_REARM_MARGIN_MM,
            click_supply_psi: CHAMBER_MAX_PSI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactState {
    pub mesh: usize,
    /// Position at first contact.
    pub p_initial: Vec3,
    /// Previous in-contact sample (the current one on first contact).
    pub last_sample: FingerSample,
    pub velocity_mm_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOutput {
    pub command: HapticCommand,
    /// The stiffness force hit the actuator maximum.
    pub clamped: bool,
    pub touched: Option<usize>,
}

pub fn indentation(contact: &ContactState, p: Vec3, mode: IndentationMode) -> f64 {
    match mode {
        IndentationMode::SurfaceNormal => (contact.p_initial.z - p.z).max(0.0),
        IndentationMode::Euclidean => p.sub(contact.p_initial).norm(),
    }
}

/// Contact pressure plus `k·d` on a stiffness surface, clamped to the
/// actuator maximum.
pub fn render_stiffness(contact: &ContactState, sample: &FingerSample, mesh: &Mesh, config: &RenderConfig) -> RenderOutput {
    let k = match mesh.material.kind {
        MaterialKind::Stiffness { stiffness_k_n_per_mm } => stiffness_k_n_per_mm,
        _ => 0.0,
    };
    let d = indentation(contact, sample.position, config.indentation);
    let raw = config.contact_force_n + k * d;
    let clamped = raw > config.max_force_n;
    RenderOutput {
        command: HapticCommand {
            target_force_n: if clamped { config.max_force_n } else { raw },
            thermal_target_c: mesh.material.temperature_c,
            ..HapticCommand::null(mesh.material.temperature_c)
        },
        clamped,
        touched: Some(contact.mesh),
    }
}

/// Contact pressure plus one burst per grating line crossed since the
/// previous sample. Burst rate follows finger speed.
pub fn render_texture(contact: &ContactState, sample: &FingerSample, mesh: &Mesh, config: &RenderConfig) -> RenderOutput {
    let mut command = HapticCommand {
        target_force_n: config.contact_force_n,
        ..HapticCommand::null(mesh.material.temperature_c)
    };
    if let MaterialKind::Texture {
        grid_pitch_mm,
        grid_axis,
        burst_supply_psi,
    } = mesh.material.kind
    {
        let n = crossings(contact.last_sample.position, sample.position, grid_pitch_mm, grid_axis);
        if n > 0 {
            command.bursts = n;
            command.vib_frequency_hz = burst_frequency_hz(contact.velocity_mm_s, grid_pitch_mm);
            command.vib_supply_psi = burst_supply_psi;
        }
    }
    RenderOutput {
        command,
        clamped: false,
        touched: Some(contact.mesh),
    }
}

/// Stateful renderer for one scene and one finger.
#[derive(Debug, Clone)]
pub struct Renderer {
    scene: Scene,
    config: RenderConfig,
    click_hz: f64,
    contact: Option<ContactState>,
    history: VecDeque<FingerSample>,
    buttons: Vec<Option<ButtonTracker>>,
}

impl Renderer {
    /// `click_hz` is the cycle rate of button pulses; the session uses the
    /// frequency of peak vibration amplitude.
    pub fn new(scene: Scene, config: RenderConfig, click_hz: f64) -> Self {
        let buttons = scene
            .meshes
            .iter()
            .map(|m| ButtonTracker::for_mesh(m, config.rearm_margin_mm))
            .collect();
        Self {
            scene,
            config,
            click_hz,
            contact: None,
            history: VecDeque::with_capacity(config.velocity_window.max(2)),
            buttons,
        }
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn config(&self) -> &RenderConfig {
        &self.config
    }

    pub fn contact(&self) -> Option<&ContactState> {
        self.contact.as_ref()
    }

    pub fn null_command(&self) -> HapticCommand {
        HapticCommand::null(self.scene.ambient_c)
    }

    /// Renders one tick. `None` means no finger position is known.
    pub fn step(&mut self, t: f64, finger: Option<Vec3>) -> RenderOutput {
        let Some(p) = finger else {
            self.release();
            return self.silent();
        };

        let mut clicks = 0u32;
        for (mesh, tracker) in self.scene.meshes.iter().zip(self.buttons.iter_mut()) {
            if let Some(tracker) = tracker {
                if tracker.update(p.z, mesh.region.contains_xy(p)) {
                    clicks += 1;
                }
            }
        }

        let Some(idx) = self.scene.meshes.iter().position(|m| is_touched(p, m)) else {
            self.release();
            return self.silent();
        };
        let sample = FingerSample { t, position: p };
        if self.contact.is_none_or(|c| c.mesh != idx) {
            self.history.clear();
            self.contact = Some(ContactState {
                mesh: idx,
                p_initial: p,
                last_sample: sample,
                velocity_mm_s: 0.0,
            });
        }
        if self.history.len() == self.config.velocity_window.max(2) {
            self.history.pop_front();
        }
        self.history.push_back(sample);
        let window = self.history.make_contiguous();
        let velocity = if window.len() >= 2 {
            estimate_velocity(window).unwrap_or(0.0)
        } else {
            0.0
        };

        let contact = self.contact.as_mut().expect("contact set above");
        contact.velocity_mm_s = velocity;
        let snapshot = *contact;
        contact.last_sample = sample;

        let mesh = &self.scene.meshes[idx];
        let mut out = match mesh.material.kind {
            MaterialKind::Stiffness { .. } => render_stiffness(&snapshot, &sample, mesh, &self.config),
            MaterialKind::Texture { .. } => render_texture(&snapshot, &sample, mesh, &self.config),
            MaterialKind::Button { .. } => RenderOutput {
                command: HapticCommand {
                    target_force_n: self.config.contact_force_n,
                    ..HapticCommand::null(mesh.material.temperature_c)
                },
                clamped: false,
                touched: Some(idx),
            },
        };
        if clicks > 0 {
            out.command.bursts += clicks;
            out.command.vib_frequency_hz = self.click_hz;
            out.command.vib_supply_psi = self.config.click_supply_psi;
        }
        out
    }

    fn release(&mut self) {
        self.contact = None;
        self.history.clear();
    }

    fn silent(&self) -> RenderOutput {
        RenderOutput {
            command: self.null_command(),
            clamped: false,
            touched: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;
    use alloc::vec;

    fn mesh(kind: MaterialKind) -> Mesh {
        Mesh {
            name: String::from("m"),
            region: Region {
                origin_mm: [0.0, 0.0],
                extent_mm: [80.0, 60.0],
                surface_height_mm: 0.0,
            },
            material: SurfaceMaterial {
                kind,
                temperature_c: 13.0,
            },
        }
    }

    fn scene(kind: MaterialKind) -> Scene {
        Scene {
            name: String::from("s"),
            ambient_c: 26.0,
            meshes: vec![mesh(kind)],
        }
    }

    fn contact_at(p: Vec3) -> ContactState {
        ContactState {
            mesh: 0,
            p_initial: p,
            last_sample: FingerSample { t: 0.0, position: p },
            velocity_mm_s: 0.0,
        }
    }

    fn at(t: f64, p: Vec3) -> FingerSample {
        FingerSample { t, position: p }
    }

    #[test]
    fn stiffness_examples() {
        let cfg = RenderConfig::default();
        let p0 = Vec3::new(40.0, 30.0, 0.0);
        let soft = mesh(MaterialKind::Stiffness { stiffness_k_n_per_mm: 0.5 });
        let out = render_stiffness(&contact_at(p0), &at(0.0, p0), &soft, &cfg);
        assert_eq!(out.command.target_force_n, 3.0);
        assert_eq!(out.command.thermal_target_c, 13.0);
        assert_eq!(out.command.vib_frequency_hz, 0.0);

        let out = render_stiffness(&contact_at(p0), &at(0.1, Vec3::new(40.0, 30.0, -4.0)), &soft, &cfg);
        assert_eq!(out.command.target_force_n, 5.0);
        assert!(!out.clamped);

        let hard = mesh(MaterialKind::Stiffness { stiffness_k_n_per_mm: 2.0 });
        let out = render_stiffness(&contact_at(p0), &at(0.1, Vec3::new(40.0, 30.0, -10.0)), &hard, &cfg);
        assert_eq!(out.command.target_force_n, 8.0);
        assert!(out.clamped);
    }

    #[test]
    fn lateral_slide_is_not_indentation() {
        let p0 = Vec3::new(40.0, 30.0, -1.0);
        let moved = Vec3::new(50.0, 30.0, -1.0);
        let c = contact_at(p0);
        assert_eq!(indentation(&c, moved, IndentationMode::SurfaceNormal), 0.0);
        assert_eq!(indentation(&c, moved, IndentationMode::Euclidean), 10.0);
        // Rising above the first contact point is not negative depth.
        assert_eq!(indentation(&c, Vec3::new(40.0, 30.0, -0.5), IndentationMode::SurfaceNormal), 0.0);
    }

    #[test]
    fn stationary_finger_on_texture() {
        let texture = MaterialKind::Texture {
            grid_pitch_mm: 2.0,
            grid_axis: GridAxis::X,
            burst_supply_psi: 5.0,
        };
        let mut r = Renderer::new(scene(texture), RenderConfig::default(), 80.0);
        for i in 0..50 {
            let out = r.step(i as f64 * 1e-3, Some(Vec3::new(10.0, 10.0, -0.5)));
            assert_eq!(out.command.target_force_n, 3.0);
            assert_eq!(out.command.bursts, 0);
            assert_eq!(out.command.thermal_target_c, 13.0);
        }
    }

    #[test]
    fn stroke_emits_one_burst_per_line() {
        let texture = MaterialKind::Texture {
            grid_pitch_mm: 2.0,
            grid_axis: GridAxis::X,
            burst_supply_psi: 5.0,
        };
        let mut r = Renderer::new(scene(texture), RenderConfig::default(), 80.0);
        // 1.0 -> 11.0 mm at 20 mm/s crosses the lines at 2, 4, 6, 8, 10.
        let bursts: u32 = (0..=500)
            .map(|i| {
                let t = i as f64 * 1e-3;
                r.step(t, Some(Vec3::new(1.0 + 20.0 * t, 10.0, -0.5))).command.bursts
            })
            .sum();
        assert_eq!(bursts, 5);
    }

    #[test]
    fn faster_stroke_bursts_harder() {
        let texture = MaterialKind::Texture {
            grid_pitch_mm: 2.0,
            grid_axis: GridAxis::X,
            burst_supply_psi: 5.0,
        };
        let burst_rate = |speed: f64| -> f64 {
            let mut r = Renderer::new(scene(texture), RenderConfig::default(), 80.0);
            let mut hz = 0.0;
            let mut t = 0.0;
            while 1.0 + speed * t < 11.0 {
                let out = r.step(t, Some(Vec3::new(1.0 + speed * t, 10.0, -0.5)));
                if out.command.bursts > 0 {
                    hz = out.command.vib_frequency_hz;
                }
                t += 1e-3;
            }
            hz
        };
        assert!(burst_rate(60.0) > burst_rate(30.0));
    }

    #[test]
    fn off_surface_is_silent() {
        let mut r = Renderer::new(scene(MaterialKind::Stiffness { stiffness_k_n_per_mm: 1.0 }), RenderConfig::default(), 80.0);
        for p in [None, Some(Vec3::new(40.0, 30.0, 2.0)), Some(Vec3::new(-5.0, 30.0, -2.0))] {
            let out = r.step(0.0, p);
            assert!(out.command.is_null(26.0));
            assert_eq!(out.touched, None);
        }
    }

    #[test]
    fn button_press_sends_one_click() {
        let mut r = Renderer::new(scene(MaterialKind::Button { click_height_mm: 2.0 }), RenderConfig::default(), 80.0);
        let mut clicks = 0;
        for i in 0..400 {
            let z = 1.0 - 0.01 * i as f64;
            let out = r.step(i as f64 * 1e-3, Some(Vec3::new(40.0, 30.0, z)));
            clicks += out.command.bursts;
            if out.command.bursts > 0 {
                assert_eq!(out.command.vib_frequency_hz, 80.0);
                assert_eq!(out.command.vib_supply_psi, 10.0);
            }
            if z <= 0.0 {
                assert_eq!(out.command.target_force_n, 3.0);
            }
        }
        assert_eq!(clicks, 1);
    }

    #[test]
    fn recontact_resets_initial_point() {
        let mut r = Renderer::new(scene(MaterialKind::Stiffness { stiffness_k_n_per_mm: 1.0 }), RenderConfig::default(), 80.0);
        r.step(0.0, Some(Vec3::new(40.0, 30.0, -1.0)));
        let out = r.step(0.001, Some(Vec3::new(40.0, 30.0, -3.0)));
        assert_eq!(out.command.target_force_n, 5.0);
        r.step(0.002, Some(Vec3::new(40.0, 30.0, 1.0)));
        let out = r.step(0.003, Some(Vec3::new(40.0, 30.0, -3.0)));
        assert_eq!(out.command.target_force_n, 3.0);
    }
}
