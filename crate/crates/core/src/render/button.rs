//! Virtual push button: one click per downward pass through the click plane.

use alloc::vec::Vec;

use super::geometry::{FingerSample, MaterialKind, Mesh};

pub const DEFAULT_REARM_MARGIN_MM: f64 = 0.5;

/// Click detector with hysteresis. After a click it stays disarmed until the
/// finger rises `rearm_margin_mm` above the click plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ButtonTracker {
    click_z: f64,
    rearm_margin_mm: f64,
    armed: bool,
}

impl ButtonTracker {
    /// `None` when `mesh` is not a button.
    pub fn for_mesh(mesh: &Mesh, rearm_margin_mm: f64) -> Option<Self> {
        match mesh.material.kind {
            MaterialKind::Button { click_height_mm } => Some(Self {
                click_z: mesh.region.surface_height_mm - click_height_mm,
                rearm_margin_mm,
                armed: true,
            }),
            _ => None,
        }
    }

    pub fn click_z(&self) -> f64 {
        self.click_z
    }

    pub fn is_armed(&self) -> bool {
        self.armed
    }

    /// Feeds one fingertip height; `inside` is lateral containment in the
    /// button. Returns whether a click fires on this sample.
    pub fn update(&mut self, z: f64, inside: bool) -> bool {
        if self.armed {
            if inside && z <= self.click_z {
                self.armed = false;
                return true;
            }
        } else if z > self.click_z + self.rearm_margin_mm {
            self.armed = true;
        }
        false
    }
}

/// Indices of the samples at which `mesh` clicks.
pub fn render_button(samples: &[FingerSample], mesh: &Mesh, rearm_margin_mm: f64) -> Vec<usize> {
    let Some(mut tracker) = ButtonTracker::for_mesh(mesh, rearm_margin_mm) else {
        return Vec::new();
    };
    samples
        .iter()
        .enumerate()
        .filter_map(|(i, s)| tracker.update(s.position.z, mesh.region.contains_xy(s.position)).then_some(i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::geometry::{Region, SurfaceMaterial, Vec3};
    use alloc::string::String;
    use alloc::vec;

    fn button() -> Mesh {
        Mesh {
            name: String::from("button"),
            region: Region {
                origin_mm: [30.0, 20.0],
                extent_mm: [20.0, 20.0],
                surface_height_mm: 0.0,
            },
            material: SurfaceMaterial {
                kind: MaterialKind::Button { click_height_mm: 2.0 },
                temperature_c: 26.0,
            },
        }
    }

    fn path(zs: &[f64]) -> Vec<FingerSample> {
        zs.iter()
            .enumerate()
            .map(|(i, &z)| FingerSample {
                t: i as f64 * 0.01,
                position: Vec3::new(40.0, 30.0, z),
            })
            .collect()
    }

    /// Replays heights against the declared margin, independent of the
    /// tracker's state machine.
    fn hysteresis_oracle(zs: &[f64], click_z: f64, margin: f64) -> usize {
        let mut events = 0;
        let mut below_since_rearm = false;
        for &z in zs {
            if z > click_z + margin {
                below_since_rearm = false;
            } else if z <= click_z && !below_since_rearm {
                events += 1;
                below_since_rearm = true;
            }
        }
        events
    }

    #[test]
    fn monotone_press_clicks_once() {
        let zs: Vec<f64> = (0..60).map(|i| 3.0 - 0.1 * i as f64).collect();
        assert_eq!(render_button(&path(&zs), &button(), 0.5).len(), 1);
    }

    #[test]
    fn shallow_press_never_clicks() {
        let zs: Vec<f64> = (0..40).map(|i| 1.0 - 0.07 * i as f64).collect();
        assert!(zs.iter().all(|&z| z > -2.0));
        assert!(render_button(&path(&zs), &button(), 0.5).is_empty());
    }

    #[test]
    fn jitter_below_margin_does_not_reclick() {
        let mut zs: Vec<f64> = (0..30).map(|i| 1.0 - 0.1 * i as f64).collect();
        for i in 0..20 {
            zs.push(if i % 2 == 0 { -1.9 } else { -2.1 });
        }
        zs.extend((0..30).map(|i| -2.0 + 0.15 * i as f64));
        zs.extend((0..30).map(|i| 2.0 - 0.15 * i as f64));
        let events = render_button(&path(&zs), &button(), 0.5);
        assert_eq!(events.len(), 2);
        assert_eq!(events.len(), hysteresis_oracle(&zs, -2.0, 0.5));
    }

    #[test]
    fn replay_count_scales() {
        let press: Vec<f64> = (0..40)
            .map(|i| 2.0 - 0.12 * i as f64)
            .chain((0..40).map(|i| -2.68 + 0.12 * i as f64))
            .collect();
        let once = render_button(&path(&press), &button(), 0.5).len();
        let mut many = vec![];
        for _ in 0..5 {
            many.extend_from_slice(&press);
        }
        assert_eq!(once, 1);
        assert_eq!(render_button(&path(&many), &button(), 0.5).len(), 5 * once);
    }

    #[test]
    fn outside_the_button_nothing_fires() {
        let mut samples = path(&[1.0, -3.0, -3.0]);
        for s in &mut samples {
            s.position.x = 10.0;
        }
        assert!(render_button(&samples, &button(), 0.5).is_empty());
    }
}
