//! Virtual scenes: named sets of non-overlapping surface patches.

use alloc::string::String;
use alloc::vec::Vec;

use crate::limits::{CHAMBER_MAX_PSI, COLDEST_TARGET_C};
use crate::render::geometry::{MaterialKind, Mesh};

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub name: String,
    pub ambient_c: f64,
    pub meshes: Vec<Mesh>,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SceneViolation {
    #[error("value is not finite")]
    NotFinite,
    #[error("must be positive, got {0}")]
    NotPositive(f64),
    #[error("must be non-negative, got {0}")]
    Negative(f64),
    #[error("{0} °C is outside [13, ambient]")]
    Temperature(f64),
    #[error("{0} psi is outside (0, 10]")]
    Supply(f64),
    #[error("overlaps mesh {0}")]
    Overlap(usize),
}

/// A rejected scene field. `mesh` is `None` for scene-level fields.
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("{}: {reason}", Path(*.mesh, .field))]
pub struct SceneError {
    pub mesh: Option<usize>,
    pub field: &'static str,
    pub reason: SceneViolation,
}

struct Path<'a>(Option<usize>, &'a str);

impl core::fmt::Display for Path<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self.0 {
            Some(i) => write!(f, "meshes[{i}].{}", self.1),
            None => f.write_str(self.1),
        }
    }
}

fn fail<T>(mesh: Option<usize>, field: &'static str, reason: SceneViolation) -> Result<T, SceneError> {
    Err(SceneError { mesh, field, reason })
}

fn positive(mesh: usize, field: &'static str, v: f64) -> Result<(), SceneError> {
    if !v.is_finite() {
        return fail(Some(mesh), field, SceneViolation::NotFinite);
    }
    if v <= 0.0 {
        return fail(Some(mesh), field, SceneViolation::NotPositive(v));
    }
    Ok(())
}

fn finite(mesh: usize, field: &'static str, v: f64) -> Result<(), SceneError> {
    if v.is_finite() {
        Ok(())
    } else {
        fail(Some(mesh), field, SceneViolation::NotFinite)
    }
}

impl Scene {
    /// Checks every material and geometry invariant. An empty scene is valid.
    pub fn validate(&self) -> Result<(), SceneError> {
        if !self.ambient_c.is_finite() {
            return fail(None, "ambient_C", SceneViolation::NotFinite);
        }
        for (i, m) in self.meshes.iter().enumerate() {
            let r = &m.region;
            finite(i, "region.origin_mm", r.origin_mm[0])?;
            finite(i, "region.origin_mm", r.origin_mm[1])?;
            positive(i, "region.extent_mm", r.extent_mm[0])?;
            positive(i, "region.extent_mm", r.extent_mm[1])?;
            finite(i, "region.surface_height_mm", r.surface_height_mm)?;

            let t = m.material.temperature_c;
            finite(i, "material.temperature_C", t)?;
            if !(COLDEST_TARGET_C..=self.ambient_c).contains(&t) {
                return fail(Some(i), "material.temperature_C", SceneViolation::Temperature(t));
            }
            match m.material.kind {
                MaterialKind::Stiffness { stiffness_k_n_per_mm: k } => {
                    finite(i, "material.stiffness_k_N_per_mm", k)?;
                    if k < 0.0 {
                        return fail(Some(i), "material.stiffness_k_N_per_mm", SceneViolation::Negative(k));
                    }
                }
                MaterialKind::Texture {
                    grid_pitch_mm,
                    burst_supply_psi,
                    ..
                } => {
                    positive(i, "material.grid_pitch_mm", grid_pitch_mm)?;
                    finite(i, "material.burst_supply_psi", burst_supply_psi)?;
                    if !(burst_supply_psi > 0.0 && burst_supply_psi <= CHAMBER_MAX_PSI) {
                        return fail(Some(i), "material.burst_supply_psi", SceneViolation::Supply(burst_supply_psi));
                    }
                }
                MaterialKind::Button { click_height_mm } => positive(i, "material.click_height_mm", click_height_mm)?,
            }
        }
        for (i, a) in self.meshes.iter().enumerate() {
            if let Some(j) = self.meshes[..i].iter().position(|b| a.region.overlaps(&b.region)) {
                return fail(Some(i), "region", SceneViolation::Overlap(j));
            }
        }
        Ok(())
    }

    pub fn mesh_index(&self, name: &str) -> Option<usize> {
        self.meshes.iter().position(|m| m.name == name)
    }
}
