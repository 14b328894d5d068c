//! Grid-based texture primitives: grating crossings, finger speed and the
//! speed-to-burst mapping.

use super::geometry::{FingerSample, GridAxis, Vec3};
use crate::limits::{VIB_MAX_HZ, VIB_MIN_HZ};

/// Grid lines crossed moving from `prev` to `curr` along one axis.
///
/// Cells are half-open `[n·pitch, (n+1)·pitch)`, so the count is the change
/// in cell index and landing exactly on a line counts for the segment that
/// enters that cell.
pub fn crossings(prev: Vec3, curr: Vec3, pitch_mm: f64, axis: GridAxis) -> u32 {
    let a = libm::floor(axis.coord(prev) / pitch_mm);
    let b = libm::floor(axis.coord(curr) / pitch_mm);
    libm::fabs(b - a) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum VelocityError {
    #[error("velocity needs at least two samples")]
    TooFewSamples,
    #[error("sample {0} does not advance in time")]
    DuplicateTimestamp(usize),
}

/// In-plane finger speed (mm/s) over a window of samples.
///
/// Least-squares slope of x(t) and y(t); with two samples this is the plain
/// backward difference.
pub fn estimate_velocity(window: &[FingerSample]) -> Result<f64, VelocityError> {
    if window.len() < 2 {
        return Err(VelocityError::TooFewSamples);
    }
    for (i, w) in window.windows(2).enumerate() {
        if !(w[1].t > w[0].t) {
            return Err(VelocityError::DuplicateTimestamp(i + 1));
        }
    }
    let n = window.len() as f64;
    let mean = |f: &dyn Fn(&FingerSample) -> f64| window.iter().map(f).sum::<f64>() / n;
    let t_bar = mean(&|s| s.t);
    let x_bar = mean(&|s| s.position.x);
    let y_bar = mean(&|s| s.position.y);
    let mut stt = 0.0;
    let mut stx = 0.0;
    let mut sty = 0.0;
    for s in window {
        let dt = s.t - t_bar;
        stt += dt * dt;
        stx += dt * (s.position.x - x_bar);
        sty += dt * (s.position.y - y_bar);
    }
    let vx = stx / stt;
    let vy = sty / stt;
    Ok(libm::sqrt(vx * vx + vy * vy))
}

/// Burst cycle rate for a stroke: the spatial tick rate `v / pitch`, kept
/// inside the characterized vibration band. A higher rate packs the same
/// inflate/exhaust pulse into a shorter cycle, so this is also the burst
/// strength and is non-decreasing in speed.
pub fn burst_frequency_hz(speed_mm_s: f64, pitch_mm: f64) -> f64 {
    (speed_mm_s / pitch_mm).clamp(VIB_MIN_HZ, VIB_MAX_HZ)
}
