//! Telemetry files: one CSV row per tick and a closing summary comment.

use std::fmt::Write as _;

use pneutouch_core::{TelemetryRecord, TelemetrySummary};

/// Column order is stable; new columns are only ever appended.
pub const COLUMNS: [&str; 13] = [
    "tick_index",
    "time_s",
    "pv_lower",
    "nv_lower",
    "pv_upper",
    "nv_upper",
    "chamber_supply_psi",
    "vortex_supply_bar",
    "membrane_force_N",
    "contact_temp_C",
    "vib_event",
    "clamped",
    "vib_supply_psi",
];

/// Columns that describe what the controller commanded, as opposed to
/// timing or simulated plant response.
pub const COMMAND_COLUMNS: [&str; 9] = [
    "tick_index",
    "pv_lower",
    "nv_lower",
    "pv_upper",
    "nv_upper",
    "chamber_supply_psi",
    "vortex_supply_bar",
    "vib_event",
    "clamped",
];

pub const SUMMARY_PREFIX: &str = "# summary";

pub fn header() -> String {
    COLUMNS.join(",")
}

fn flag(b: bool) -> u8 {
    b as u8
}

pub fn write_record(out: &mut String, r: &TelemetryRecord) {
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.tick,
        r.time_s,
        flag(r.bank.pv_lower),
        flag(r.bank.nv_lower),
        flag(r.bank.pv_upper),
        flag(r.bank.nv_upper),
        r.setpoints.chamber_supply_psi,
        r.setpoints.vortex_supply_bar,
        r.membrane_force_n,
        r.contact_temp_c,
        r.vib_event,
        flag(r.clamped),
        r.setpoints.vib_supply_psi,
    );
}

pub fn summary_line(s: &TelemetrySummary) -> String {
    format!(
        "{SUMMARY_PREFIX} ticks={} bursts={} clamped_ticks={} min_temp_C={} max_force_N={}",
        s.ticks, s.bursts, s.clamped_ticks, s.min_temp_c, s.max_force_n
    )
}

/// Accumulates a whole telemetry document in memory.
#[derive(Debug, Clone)]
pub struct TelemetryLog {
    text: String,
}

impl Default for TelemetryLog {
    fn default() -> Self {
        let mut text = header();
        text.push('\n');
        Self { text }
    }
}

impl TelemetryLog {
    pub fn push(&mut self, r: &TelemetryRecord) {
        write_record(&mut self.text, r);
    }

    pub fn finish(mut self, s: &TelemetrySummary) -> String {
        self.text.push_str(&summary_line(s));
        self.text.push('\n');
        self.text
    }
}

/// Data rows of a telemetry document reduced to the named columns.
pub fn select_columns(doc: &str, columns: &[&str]) -> Vec<Vec<String>> {
    let mut lines = doc.lines();
    let Some(head) = lines.next() else {
        return Vec::new();
    };
    let names: Vec<&str> = head.split(',').collect();
    let idx: Vec<usize> = columns
        .iter()
        .map(|c| names.iter().position(|n| n == c).unwrap_or_else(|| panic!("no column {c}")))
        .collect();
    lines
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            idx.iter().map(|&i| cells[i].to_string()).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_log_has_zero_summary() {
        let doc = TelemetryLog::default().finish(&TelemetrySummary::default());
        assert_eq!(
            doc,
            format!("{}\n# summary ticks=0 bursts=0 clamped_ticks=0 min_temp_C=0 max_force_N=0\n", header())
        );
        assert!(select_columns(&doc, &COMMAND_COLUMNS).is_empty());
    }
}
