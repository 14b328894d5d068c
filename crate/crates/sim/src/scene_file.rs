//! Scene documents (TOML).

use std::path::Path;

use pneutouch_core::render::{GridAxis, MaterialKind, Mesh, Region, SurfaceMaterial};
use pneutouch_core::Scene;
use serde::{Deserialize, Serialize};

use crate::diag::{read_file, toml_diagnostic, Diagnostic, FormatError};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_BURST_SUPPLY_PSI: f64 = pneutouch_core::controller::DEFAULT_VIB_SUPPLY_PSI;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct SceneDoc {
    schema_version: u32,
    name: String,
    ambient_C: f64,
    #[serde(default)]
    meshes: Vec<MeshDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshDoc {
    name: String,
    region: RegionDoc,
    material: MaterialDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionDoc {
    origin_mm: [f64; 2],
    extent_mm: [f64; 2],
    surface_height_mm: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum KindDoc {
    StiffnessSurface,
    TexturedSurface,
    Button,
}

impl KindDoc {
    fn name(self) -> &'static str {
        match self {
            KindDoc::StiffnessSurface => "stiffness_surface",
            KindDoc::TexturedSurface => "textured_surface",
            KindDoc::Button => "button",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum AxisDoc {
    X,
    Y,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct MaterialDoc {
    kind: KindDoc,
    temperature_C: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stiffness_k_N_per_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid_pitch_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid_axis: Option<AxisDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    burst_supply_psi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    click_height_mm: Option<f64>,
}

impl MaterialDoc {
    fn to_material(&self, path: &str) -> Result<SurfaceMaterial, Diagnostic> {
        let kind = self.kind;
        let required = |v: Option<f64>, field: &str| {
            v.ok_or_else(|| Diagnostic::new(format!("required for {}", kind.name())).at_field(format!("{path}.{field}")))
        };
        let present = [
            ("stiffness_k_N_per_mm", self.stiffness_k_N_per_mm.is_some()),
            ("grid_pitch_mm", self.grid_pitch_mm.is_some()),
            ("grid_axis", self.grid_axis.is_some()),
            ("burst_supply_psi", self.burst_supply_psi.is_some()),
            ("click_height_mm", self.click_height_mm.is_some()),
        ];
        let allowed: &[&str] = match kind {
            KindDoc::StiffnessSurface => &["stiffness_k_N_per_mm"],
            KindDoc::TexturedSurface => &["grid_pitch_mm", "grid_axis", "burst_supply_psi"],
            KindDoc::Button => &["click_height_mm"],
        };
        if let Some((field, _)) = present.iter().find(|(f, set)| *set && !allowed.contains(f)) {
            return Err(Diagnostic::new(format!("not valid for {}", kind.name())).at_field(format!("{path}.{field}")));
        }
        let kind = match kind {
            KindDoc::StiffnessSurface => MaterialKind::Stiffness {
                stiffness_k_n_per_mm: required(self.stiffness_k_N_per_mm, "stiffness_k_N_per_mm")?,
            },
            KindDoc::TexturedSurface => MaterialKind::Texture {
                grid_pitch_mm: required(self.grid_pitch_mm, "grid_pitch_mm")?,
                grid_axis: match self.grid_axis {
                    Some(AxisDoc::Y) => GridAxis::Y,
                    _ => GridAxis::X,
                },
                burst_supply_psi: self.burst_supply_psi.unwrap_or(DEFAULT_BURST_SUPPLY_PSI),
            },
            KindDoc::Button => MaterialKind::Button {
                click_height_mm: required(self.click_height_mm, "click_height_mm")?,
            },
        };
        Ok(SurfaceMaterial {
            kind,
            temperature_c: self.temperature_C,
        })
    }

    fn from_material(m: &SurfaceMaterial) -> Self {
        let mut doc = MaterialDoc {
            kind: KindDoc::Button,
            temperature_C: m.temperature_c,
            stiffness_k_N_per_mm: None,
            grid_pitch_mm: None,
            grid_axis: None,
            burst_supply_psi: None,
            click_height_mm: None,
        };
        match m.kind {
            MaterialKind::Stiffness { stiffness_k_n_per_mm } => {
                doc.kind = KindDoc::StiffnessSurface;
                doc.stiffness_k_N_per_mm = Some(stiffness_k_n_per_mm);
            }
            MaterialKind::Texture {
                grid_pitch_mm,
                grid_axis,
                burst_supply_psi,
            } => {
                doc.kind = KindDoc::TexturedSurface;
                doc.grid_pitch_mm = Some(grid_pitch_mm);
                doc.grid_axis = Some(match grid_axis {
                    GridAxis::X => AxisDoc::X,
                    GridAxis::Y => AxisDoc::Y,
                });
                doc.burst_supply_psi = Some(burst_supply_psi);
            }
            MaterialKind::Button { click_height_mm } => doc.click_height_mm = Some(click_height_mm),
        }
        doc
    }
}

/// Parses a scene document and enforces every scene invariant.
pub fn parse_scene(src: &str) -> Result<Scene, Diagnostic> {
    let de = toml::Deserializer::new(src);
    let doc: SceneDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let d = toml_diagnostic(src, e.inner());
        if path == "." {
            d
        } else {
            d.at_field(path)
        }
    })?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Diagnostic::new(format!(
            "unsupported schema_version {}, expected {SCHEMA_VERSION}",
            doc.schema_version
        ))
        .at_field("schema_version"));
    }
    let meshes = doc
        .meshes
        .iter()
        .enumerate()
        .map(|(i, m)| {
            Ok(Mesh {
                name: m.name.clone(),
                region: Region {
                    origin_mm: m.region.origin_mm,
                    extent_mm: m.region.extent_mm,
                    surface_height_mm: m.region.surface_height_mm,
                },
                material: m.material.to_material(&format!("meshes[{i}].material"))?,
            })
        })
        .collect::<Result<Vec<_>, Diagnostic>>()?;
    let scene = Scene {
        name: doc.name,
        ambient_c: doc.ambient_C,
        meshes,
    };
    scene.validate().map_err(|e| {
        let field = match e.mesh {
            Some(i) => format!("meshes[{i}].{}", e.field),
            None => e.field.to_string(),
        };
        Diagnostic::new(e.reason.to_string()).at_field(field)
    })?;
    Ok(scene)
}

/// Serializes a scene. Texture defaults are written out explicitly.
pub fn scene_to_string(scene: &Scene) -> String {
    let doc = SceneDoc {
        schema_version: SCHEMA_VERSION,
        name: scene.name.clone(),
        ambient_C: scene.ambient_c,
        meshes: scene
            .meshes
            .iter()
            .map(|m| MeshDoc {
                name: m.name.clone(),
                region: RegionDoc {
                    origin_mm: m.region.origin_mm,
                    extent_mm: m.region.extent_mm,
                    surface_height_mm: m.region.surface_height_mm,
                },
                material: MaterialDoc::from_material(&m.material),
            })
            .collect(),
    };
    toml::to_string(&doc).expect("scene documents always serialize")
}

pub fn load_scene(path: &Path) -> Result<Scene, FormatError> {
    let src = read_file(path)?;
    Ok(parse_scene(&src)?)
}

pub const BUNDLED_SCENES: &[(&str, &str)] = &[
    ("frozen_meat", include_str!("../assets/scenes/frozen_meat.toml")),
    ("abrasive_ice", include_str!("../assets/scenes/abrasive_ice.toml")),
    ("button", include_str!("../assets/scenes/button.toml")),
];

pub fn bundled_scene(name: &str) -> Option<Scene> {
    BUNDLED_SCENES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| parse_scene(src).expect("bundled scenes are valid"))
}

/// A bundled scene name, or else a path to a scene file.
pub fn resolve_scene(arg: &str) -> Result<Scene, FormatError> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(scene) = bundled_scene(arg) {
            return Ok(scene);
        }
    }
    load_scene(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenes_load() {
        for (name, _) in BUNDLED_SCENES {
            let s = bundled_scene(name).unwrap();
            assert_eq!(&s.name, name);
        }
        let meat = bundled_scene("frozen_meat").unwrap();
        assert_eq!(meat.meshes.len(), 1);
        assert_eq!(meat.meshes[0].material.temperature_c, 13.0);
        assert!(matches!(meat.meshes[0].material.kind, MaterialKind::Stiffness { .. }));
    }

    #[test]
    fn empty_mesh_list_is_valid() {
        let s = parse_scene("schema_version = 1\nname = \"void\"\nambient_C = 26.0\n").unwrap();
        assert!(s.meshes.is_empty());
    }

    fn ice(extra: &str) -> String {
        format!(
            "schema_version = 1\nname = \"x\"\nambient_C = 26.0\n\n[[meshes]]\nname = \"ice\"\n\
             [meshes.region]\norigin_mm = [0.0, 0.0]\nextent_mm = [80.0, 60.0]\nsurface_height_mm = 0.0\n\
             [meshes.material]\nkind = \"textured_surface\"\ntemperature_C = 13.0\n{extra}"
        )
    }

    #[test]
    fn zero_pitch_names_the_field() {
        let err = parse_scene(&ice("grid_pitch_mm = 0.0\n")).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("meshes[0].material.grid_pitch_mm"));
    }

    #[test]
    fn missing_and_foreign_fields() {
        let err = parse_scene(&ice("")).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("meshes[0].material.grid_pitch_mm"));
        let err = parse_scene(&ice("grid_pitch_mm = 2.0\nclick_height_mm = 1.0\n")).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("meshes[0].material.click_height_mm"));
        let err = parse_scene(&ice("grid_pitch_mm = 2.0\ncolour = 1\n")).unwrap_err();
        assert!(err.line.is_some());
        assert!(err.field.as_deref().unwrap().starts_with("meshes[0].material"), "{err}");
    }

    #[test]
    fn wrong_type_reports_line_and_path() {
        let err = parse_scene(&ice("grid_pitch_mm = \"two\"\n")).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("meshes[0].material.grid_pitch_mm"));
        assert_eq!(err.line, Some(14));
    }
}
