//! Finger trace documents.
//!
//! A `key = value` header (`name`, `sample_rate_Hz`, `unit = mm`), the column
//! line `t x y z`, then one whitespace-separated sample per line. Blank lines
//! and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use pneutouch_core::replay::TraceError;
use pneutouch_core::{FingerSample, Trace, Vec3};

use crate::diag::{read_file, Diagnostic, FormatError};

const COLUMNS: &str = "t x y z";

pub fn parse_trace(src: &str) -> Result<Trace, Diagnostic> {
    let mut name = None;
    let mut rate = None;
    let mut unit = None;
    let mut samples = Vec::new();
    let mut sample_lines = Vec::new();
    let mut in_body = false;

    for (i, raw) in src.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Diagnostic::new(msg).at_line(line_no);
        if !in_body {
            if line.split_whitespace().eq(COLUMNS.split_whitespace()) {
                in_body = true;
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value` or `{COLUMNS}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let slot = match key {
                "name" => &mut name,
                "sample_rate_Hz" => &mut rate,
                "unit" => &mut unit,
                _ => return Err(err(format!("unknown header key `{key}`")).at_field(key.to_string())),
            };
            if slot.replace((value.to_string(), line_no)).is_some() {
                return Err(err("duplicate header key".into()).at_field(key.to_string()));
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(err(format!("expected 4 columns, found {}", fields.len())));
        }
        let mut v = [0.0; 4];
        for (slot, (f, col)) in v.iter_mut().zip(fields.iter().zip(["t", "x", "y", "z"])) {
            *slot = f
                .parse()
                .map_err(|_| err(format!("`{f}` is not a number")).at_field(col.to_string()))?;
        }
        samples.push(FingerSample {
            t: v[0],
            position: Vec3::new(v[1], v[2], v[3]),
        });
        sample_lines.push(line_no);
    }

    let missing = |key: &str| Diagnostic::new("missing header key").at_field(key.to_string());
    let (name, _) = name.ok_or_else(|| missing("name"))?;
    let (rate, rate_line) = rate.ok_or_else(|| missing("sample_rate_Hz"))?;
    let (unit, unit_line) = unit.ok_or_else(|| missing("unit"))?;
    if unit != "mm" {
        return Err(Diagnostic::new(format!("unit must be mm, found `{unit}`"))
            .at_line(unit_line)
            .at_field("unit"));
    }
    let sample_rate_hz: f64 = rate.parse().map_err(|_| {
        Diagnostic::new(format!("`{rate}` is not a number"))
            .at_line(rate_line)
            .at_field("sample_rate_Hz")
    })?;
    if !in_body {
        return Err(Diagnostic::new(format!("missing column line `{COLUMNS}`")));
    }

    let trace = Trace {
        name,
        sample_rate_hz,
        samples,
    };
    trace.validate().map_err(|e| {
        let d = Diagnostic::new(e.to_string());
        match e {
            TraceError::NotFinite(i) | TraceError::NotIncreasing(i) => d.at_line(sample_lines[i]),
            TraceError::SampleRate(_) | TraceError::RateMismatch { .. } => d.at_line(rate_line).at_field("sample_rate_Hz"),
        }
    })?;
    Ok(trace)
}

/// Serializes a trace. Numbers use the shortest exact decimal form, so
/// parsing the output gives back the same values.
pub fn trace_to_string(trace: &Trace) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "name = {}", trace.name);
    let _ = writeln!(out, "sample_rate_Hz = {}", trace.sample_rate_hz);
    out.push_str("unit = mm\n");
    out.push_str(COLUMNS);
    out.push('\n');
    for s in &trace.samples {
        let p = s.position;
        let _ = writeln!(out, "{} {} {} {}", s.t, p.x, p.y, p.z);
    }
    out
}

pub fn load_trace(path: &Path) -> Result<Trace, FormatError> {
    let src = read_file(path)?;
    Ok(parse_trace(&src)?)
}

pub const BUNDLED_TRACES: &[(&str, &str)] = &[
    ("stationary_touch", include_str!("../assets/traces/stationary_touch.trace")),
    ("constant_velocity_stroke", include_str!("../assets/traces/constant_velocity_stroke.trace")),
    ("press_cycle", include_str!("../assets/traces/press_cycle.trace")),
];

pub fn bundled_trace(name: &str) -> Option<Trace> {
    BUNDLED_TRACES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| parse_trace(src).expect("bundled traces are valid"))
}

/// A bundled trace name, or else a path to a trace file.
pub fn resolve_trace(arg: &str) -> Result<Trace, FormatError> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(trace) = bundled_trace(arg) {
            return Ok(trace);
        }
    }
    load_trace(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "name = demo\nsample_rate_Hz = 100\nunit = mm\n# comment\nt x y z\n0 1 2 -0.5\n0.01 1.5 2 -0.5\n\n0.02 2 2 -0.5\n";

    #[test]
    fn parses_and_round_trips() {
        let t = parse_trace(SMALL).unwrap();
        assert_eq!(t.name, "demo");
        assert_eq!(t.samples.len(), 3);
        assert_eq!(t.samples[1].position.x, 1.5);
        assert_eq!(parse_trace(&trace_to_string(&t)).unwrap(), t);
    }

    #[test]
    fn errors_point_at_lines() {
        let bad = SMALL.replace("0.01 1.5", "0.00 1.5");
        let err = parse_trace(&bad).unwrap_err();
        assert_eq!(err.line, Some(7));
        let bad = SMALL.replace("1.5 2", "1.5 nope");
        assert_eq!(parse_trace(&bad).unwrap_err().line, Some(7));
        let bad = SMALL.replace("unit = mm", "unit = in");
        assert_eq!(parse_trace(&bad).unwrap_err().field.as_deref(), Some("unit"));
        let bad = SMALL.replace("sample_rate_Hz = 100", "sample_rate_Hz = 120");
        assert_eq!(parse_trace(&bad).unwrap_err().line, Some(2));
        let bad = SMALL.replace("0.02 2 2 -0.5", "0.02 2 2");
        assert_eq!(parse_trace(&bad).unwrap_err().line, Some(9));
    }

    #[test]
    fn bundled_traces_load() {
        for (name, _) in BUNDLED_TRACES {
            let t = bundled_trace(name).unwrap();
            assert_eq!(t.sample_rate_hz, 120.0);
            assert!(!t.samples.is_empty());
        }
    }
}
