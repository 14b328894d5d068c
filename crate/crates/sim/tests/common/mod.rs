#![allow(dead_code)]

use std::path::{Path, PathBuf};

use pneutouch_core::render::{GridAxis, MaterialKind, Mesh, Region, SurfaceMaterial};
use pneutouch_core::{FingerSample, Scene, Trace, Vec3};
use pneutouch_sim::scene_file::scene_to_string;
use pneutouch_sim::trace_file::trace_to_string;

pub const BIN: &str = env!("CARGO_BIN_EXE_pneutouch");

/// A 10 psi texture stroked at the speed whose burst inlet half-cycle is
/// 260 ticks at 1 kHz, just past the 250 ms continuous-open limit.
pub fn unsafe_stroke() -> (Scene, Trace) {
    let pitch = 2.0;
    let scene = Scene {
        name: "hot_grid".into(),
        ambient_c: 26.0,
        meshes: vec![Mesh {
            name: "grid".into(),
            region: Region {
                origin_mm: [0.0, 0.0],
                extent_mm: [100.0, 60.0],
                surface_height_mm: 0.0,
            },
            material: SurfaceMaterial {
                kind: MaterialKind::Texture {
                    grid_pitch_mm: pitch,
                    grid_axis: GridAxis::X,
                    burst_supply_psi: 10.0,
                },
                temperature_c: 20.0,
            },
        }],
    };
    let speed = pitch * 1000.0 / 520.0;
    let rate = 120.0;
    let samples = (0..=480)
        .map(|i| {
            let t = i as f64 / rate;
            FingerSample {
                t,
                position: Vec3::new(1.0 + speed * t, 30.0, -0.5),
            }
        })
        .collect();
    let trace = Trace {
        name: "unsafe_stroke".into(),
        sample_rate_hz: rate,
        samples,
    };
    (scene, trace)
}

pub fn write_case(dir: &Path, scene: &Scene, trace: &Trace) -> (PathBuf, PathBuf) {
    let s = dir.join(format!("{}.toml", scene.name));
    let t = dir.join(format!("{}.trace", trace.name));
    std::fs::write(&s, scene_to_string(scene)).unwrap();
    std::fs::write(&t, trace_to_string(trace)).unwrap();
    (s, t)
}
