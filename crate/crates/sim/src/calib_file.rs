//! Calibration documents (TOML).

use std::ops::Range;
use std::path::Path;

use pneutouch_core::calibration::CalibSite;
use pneutouch_core::{CalibrationData, CalibrationTables, ForceSeries, ThermalCurve};
use serde::Deserialize;
use toml::Spanned;

use crate::diag::{line_of, read_file, toml_diagnostic, Diagnostic, FormatError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct CalibDoc {
    schema_version: Spanned<u32>,
    revision: String,
    ambient_C: Spanned<f64>,
    recovery_factor: Spanned<f64>,
    flow_rate_m3_per_h: Option<Spanned<[f64; 2]>>,
    exhaust_decay_ms: Spanned<[f64; 2]>,
    thermal: Vec<Spanned<ThermalDoc>>,
    force: Vec<Spanned<ForceDoc>>,
    vibration: Spanned<VibrationDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ThermalDoc {
    supply_bar: f64,
    samples: Vec<Spanned<[f64; 2]>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ForceDoc {
    source_psi: f64,
    plateau_verified: bool,
    samples: Vec<Spanned<[f64; 2]>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VibrationDoc {
    anchors: Vec<Spanned<[f64; 2]>>,
}

fn pairs(v: &[Spanned<[f64; 2]>]) -> Vec<(f64, f64)> {
    v.iter().map(|s| (s.get_ref()[0], s.get_ref()[1])).collect()
}

impl CalibDoc {
    fn data(&self) -> CalibrationData {
        CalibrationData {
            revision: self.revision.clone(),
            ambient_c: *self.ambient_C.get_ref(),
            recovery_factor: *self.recovery_factor.get_ref(),
            flow_rate_m3_per_h: self.flow_rate_m3_per_h.as_ref().map(|s| (s.get_ref()[0], s.get_ref()[1])),
            thermal: self
                .thermal
                .iter()
                .map(|c| ThermalCurve {
                    supply_bar: c.get_ref().supply_bar,
                    samples: pairs(&c.get_ref().samples),
                })
                .collect(),
            force: self
                .force
                .iter()
                .map(|s| ForceSeries {
                    source_psi: s.get_ref().source_psi,
                    samples: pairs(&s.get_ref().samples),
                    plateau_verified: s.get_ref().plateau_verified,
                })
                .collect(),
            vibration: pairs(&self.vibration.get_ref().anchors),
            exhaust_decay_ms: (self.exhaust_decay_ms.get_ref()[0], self.exhaust_decay_ms.get_ref()[1]),
        }
    }

    /// Source span and field path of a validation site.
    fn locate(&self, site: CalibSite) -> (Option<Range<usize>>, String) {
        match site {
            CalibSite::Ambient => (Some(self.ambient_C.span()), "ambient_C".into()),
            CalibSite::RecoveryFactor => (Some(self.recovery_factor.span()), "recovery_factor".into()),
            CalibSite::FlowRate => (self.flow_rate_m3_per_h.as_ref().map(Spanned::span), "flow_rate_m3_per_h".into()),
            CalibSite::ExhaustDecay => (Some(self.exhaust_decay_ms.span()), "exhaust_decay_ms".into()),
            CalibSite::Thermal { curve, sample } => {
                let c = self.thermal.get(curve);
                match sample {
                    Some(s) => (
                        c.and_then(|c| c.get_ref().samples.get(s)).map(Spanned::span),
                        format!("thermal[{curve}].samples[{s}]"),
                    ),
                    None => (c.map(Spanned::span), format!("thermal[{curve}]")),
                }
            }
            CalibSite::Force { series, sample } => {
                let c = self.force.get(series);
                match sample {
                    Some(s) => (
                        c.and_then(|c| c.get_ref().samples.get(s)).map(Spanned::span),
                        format!("force[{series}].samples[{s}]"),
                    ),
                    None => (c.map(Spanned::span), format!("force[{series}]")),
                }
            }
            CalibSite::Vibration { anchor } => match anchor {
                Some(a) => (
                    self.vibration.get_ref().anchors.get(a).map(Spanned::span),
                    format!("vibration.anchors[{a}]"),
                ),
                None => (Some(self.vibration.span()), "vibration".into()),
            },
        }
    }
}

/// Parses and validates a calibration document.
pub fn parse_calibration(src: &str) -> Result<CalibrationTables, Diagnostic> {
    let doc: CalibDoc = toml::from_str(src).map_err(|e| toml_diagnostic(src, &e))?;
    if *doc.schema_version.get_ref() != SCHEMA_VERSION {
        return Err(Diagnostic::new(format!(
            "unsupported schema_version {}, expected {SCHEMA_VERSION}",
            doc.schema_version.get_ref()
        ))
        .at_line(line_of(src, doc.schema_version.span().start))
        .at_field("schema_version"));
    }
    CalibrationTables::new(doc.data()).map_err(|e| {
        let (span, field) = doc.locate(e.site);
        let d = Diagnostic::new(e.reason.to_string()).at_field(field);
        match span {
            Some(span) => d.at_line(line_of(src, span.start)),
            None => d,
        }
    })
}

pub fn load_calibration(path: &Path) -> Result<CalibrationTables, FormatError> {
    let src = read_file(path)?;
    Ok(parse_calibration(&src)?)
}

pub const BUNDLED_CALIBRATION: &str = include_str!("../assets/calibration/v1.toml");

pub fn bundled_calibration() -> CalibrationTables {
    parse_calibration(BUNDLED_CALIBRATION).expect("bundled calibration is valid")
}
