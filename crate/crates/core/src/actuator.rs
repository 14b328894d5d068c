//! Empirical plant model: vortex-tube cooling, chamber inflation/exhaust and
//! vibration amplitude.
//!
//! All stepping functions are state-in/state-out. A single simulation must
//! apply them sequentially.

use alloc::vec::Vec;

use crate::calibration::{eval_hold, CalibrationTables};
use crate::interp::Curve;
use crate::limits::*;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("vortex supply {0} bar is outside the characterized range")]
    SupplyOutOfRange(f64),
    #[error("chamber source pressure {0} psi is outside the characterized range")]
    SourceOutOfRange(f64),
    #[error("valve opening {0} ms is outside [0, 250] ms")]
    OpeningOutOfRange(f64),
    #[error("valve opening {open_ms} ms at {psi} psi exceeds the 250 ms safety limit")]
    SafetyViolation { psi: f64, open_ms: f64 },
    #[error("frequency {0} Hz is outside [1, 200] Hz")]
    FrequencyOutOfRange(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalState {
    pub contact_temp_c: f64,
    /// Vortex supply pressure; 0 means no flow.
    pub input_pressure_bar: f64,
}

impl ThermalState {
    pub fn ambient(tables: &CalibrationTables) -> Self {
        Self {
            contact_temp_c: tables.ambient_c(),
            input_pressure_bar: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ForceState {
    pub membrane_force_n: f64,
    /// Valves closed with air trapped.
    pub sealed: bool,
    /// Inlet opening time that produces the current force from empty.
    pub equivalent_open_ms: f64,
}

/// Asymptotic contact temperature under sustained flow at `input_pressure_bar`.
pub fn thermal_steady_state(tables: &CalibrationTables, input_pressure_bar: f64) -> Result<f64, ModelError> {
    tables
        .steady_curve()
        .eval(input_pressure_bar)
        .ok_or(ModelError::SupplyOutOfRange(input_pressure_bar))
}

/// Cooling time constant (s) at a supply pressure. Below the lowest
/// characterized pressure the slowest fitted constant applies.
pub fn cooling_tau_s(tables: &CalibrationTables, input_pressure_bar: f64) -> Result<f64, ModelError> {
    let curve = tables.tau_curve();
    let (lo, hi) = curve.domain();
    if !(0.0..=hi).contains(&input_pressure_bar) {
        return Err(ModelError::SupplyOutOfRange(input_pressure_bar));
    }
    Ok(curve.eval(input_pressure_bar.max(lo)).expect("clamped into domain"))
}

/// Advances the contact temperature by `dt_s` of first-order relaxation toward
/// the steady state of the current supply pressure.
///
/// Cooling uses the pressure's fitted time constant; warming (including
/// recovery at zero flow) uses [`CalibrationTables::recovery_tau_s`].
pub fn thermal_step(state: ThermalState, tables: &CalibrationTables, dt_s: f64) -> Result<ThermalState, ModelError> {
    let target = thermal_steady_state(tables, state.input_pressure_bar)?;
    let gap = state.contact_temp_c - target;
    let tau = if gap > 0.0 {
        cooling_tau_s(tables, state.input_pressure_bar)?
    } else {
        tables.recovery_tau_s()
    };
    let decay = libm::exp(-dt_s / tau);
    Ok(ThermalState {
        contact_temp_c: target + gap * decay,
        ..state
    })
}

/// Force-vs-opening profile at one chamber source pressure, blended linearly
/// between the characterized series. Past the last node the force holds.
pub fn force_profile(tables: &CalibrationTables, source_psi: f64) -> Result<Curve, ModelError> {
    let series = tables.force_series();
    let curves = tables.force_curves();
    let lo = series[0].source_psi;
    let hi = series[series.len() - 1].source_psi;
    if !(lo..=hi).contains(&source_psi) {
        return Err(ModelError::SourceOutOfRange(source_psi));
    }
    let upper = series.partition_point(|s| s.source_psi < source_psi);
    if series[upper].source_psi == source_psi {
        return Ok(curves[upper].clone());
    }
    let (a, b) = (&curves[upper - 1], &curves[upper]);
    let w = (source_psi - series[upper - 1].source_psi) / (series[upper].source_psi - series[upper - 1].source_psi);
    let mut nodes: Vec<f64> = a.points().map(|p| p.0).chain(b.points().map(|p| p.0)).collect();
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let pts: Vec<(f64, f64)> = nodes
        .into_iter()
        .map(|ms| {
            let fa = eval_hold(a, ms);
            let fb = eval_hold(b, ms);
            (ms, fa + w * (fb - fa))
        })
        .collect();
    Ok(Curve::new(&pts).expect("merged nodes are increasing"))
}

fn check_opening(source_psi: f64, valve_open_ms: f64) -> Result<(), ModelError> {
    if !(valve_open_ms >= 0.0) {
        return Err(ModelError::OpeningOutOfRange(valve_open_ms));
    }
    if valve_open_ms > MAX_INLET_OPEN_MS {
        if source_psi >= SAFETY_PSI {
            return Err(ModelError::SafetyViolation {
                psi: source_psi,
                open_ms: valve_open_ms,
            });
        }
        return Err(ModelError::OpeningOutOfRange(valve_open_ms));
    }
    Ok(())
}

/// Membrane force after a single inlet opening of `valve_open_ms` from empty.
pub fn force_from_inflation(tables: &CalibrationTables, source_psi: f64, valve_open_ms: f64) -> Result<f64, ModelError> {
    check_opening(source_psi, valve_open_ms)?;
    if source_psi == 0.0 {
        return Ok(0.0);
    }
    let profile = force_profile(tables, source_psi)?;
    Ok(eval_hold(&profile, valve_open_ms))
}

/// Largest force reachable at a source pressure.
pub fn saturation_force(tables: &CalibrationTables, source_psi: f64) -> Result<f64, ModelError> {
    if source_psi == 0.0 {
        return Ok(0.0);
    }
    Ok(force_profile(tables, source_psi)?.last_y())
}

/// One tick with the inlet open at `source_psi`.
///
/// The chamber is tracked by its equivalent opening time, so consecutive
/// ticks compose exactly like a single opening of the summed duration.
pub fn inflate_step(state: ForceState, tables: &CalibrationTables, source_psi: f64, dt_s: f64) -> Result<ForceState, ModelError> {
    if source_psi == 0.0 {
        return Ok(ForceState { sealed: false, ..state });
    }
    let profile = force_profile(tables, source_psi)?;
    let (_, last) = profile.domain();
    let open_ms = (state.equivalent_open_ms + dt_s * 1e3).min(last);
    Ok(ForceState {
        membrane_force_n: eval_hold(&profile, open_ms).max(state.membrane_force_n),
        sealed: false,
        equivalent_open_ms: open_ms,
    })
}

/// One tick with all valves of the chamber closed. Force is held exactly.
pub fn seal(state: ForceState) -> ForceState {
    ForceState { sealed: true, ..state }
}

/// Exponential release through the exhaust valve.
///
/// The equivalent opening time is re-derived from the residual force on the
/// 10 psi (highest) profile so that a later refill starts from the residue.
pub fn exhaust_step(state: ForceState, tables: &CalibrationTables, dt_s: f64) -> ForceState {
    let decay = libm::exp(-(dt_s * 1e3) / tables.exhaust_tau_ms());
    let force = state.membrane_force_n * decay;
    let top = &tables.force_curves()[tables.force_curves().len() - 1];
    let equivalent_open_ms = if force == 0.0 {
        0.0
    } else {
        top.first_reaching(force).unwrap_or(top.domain().1)
    };
    ForceState {
        membrane_force_n: force,
        sealed: false,
        equivalent_open_ms,
    }
}

/// Peak acceleration of the vibration chamber driven at `frequency_hz`.
pub fn vibration_amplitude(tables: &CalibrationTables, frequency_hz: f64) -> Result<f64, ModelError> {
    tables
        .vibration_curve()
        .eval(frequency_hz)
        .ok_or(ModelError::FrequencyOutOfRange(frequency_hz))
}
