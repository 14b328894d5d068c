//! Calibration tables digitized from the actuator characterization runs.
//!
//! [`CalibrationData`] is the raw content of a calibration file.
//! [`CalibrationTables::new`] validates it and derives the interpolants the
//! model evaluates: a first-order cooling fit per thermal trajectory, one force
//! curve per source pressure, and the vibration amplitude response.

use alloc::string::String;
use alloc::vec::Vec;

use crate::interp::Curve;
use crate::limits::*;

/// One characterized cooling trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalCurve {
    pub supply_bar: f64,
    /// `(time_s, contact_temp_C)` starting at ambient.
    pub samples: Vec<(f64, f64)>,
}

/// Force after a single inlet opening, for one chamber source pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceSeries {
    pub source_psi: f64,
    /// `(valve_open_ms, force_N)`.
    pub samples: Vec<(f64, f64)>,
    /// Whether the last sample is a measured saturation plateau.
    pub plateau_verified: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationData {
    pub revision: String,
    pub ambient_c: f64,
    /// Recovery time constant as a multiple of the slowest cooling constant.
    /// Not calibrated against measurements.
    pub recovery_factor: f64,
    /// Input flow-rate range of the vortex tube (m³/h). Provenance only.
    pub flow_rate_m3_per_h: Option<(f64, f64)>,
    pub thermal: Vec<ThermalCurve>,
    pub force: Vec<ForceSeries>,
    /// `(frequency_Hz, peak_amplitude_g)`.
    pub vibration: Vec<(f64, f64)>,
    /// Full force release window `(min_ms, max_ms)`.
    pub exhaust_decay_ms: (f64, f64),
}

/// Where in a calibration document a violation was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibSite {
    Ambient,
    RecoveryFactor,
    FlowRate,
    Thermal { curve: usize, sample: Option<usize> },
    Force { series: usize, sample: Option<usize> },
    Vibration { anchor: Option<usize> },
    ExhaustDecay,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{reason}")]
pub struct CalibError {
    pub site: CalibSite,
    pub reason: CalibViolation,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CalibViolation {
    #[error("value is not finite")]
    NotFinite,
    #[error("value must be positive")]
    NotPositive,
    #[error("range is inverted")]
    Inverted,
    #[error("at least one thermal trajectory is required")]
    NoThermalCurves,
    #[error("at least one force series is required")]
    NoForceSeries,
    #[error("supply pressure {0} bar is outside [3.42, 6.00] bar")]
    ThermalPressureOutOfRange(f64),
    #[error("trajectories must be listed in strictly increasing pressure order")]
    ThermalOrder,
    #[error("trajectory needs at least 3 samples")]
    TooFewSamples,
    #[error("trajectory must start at t = 0 at the ambient temperature")]
    ThermalStart,
    #[error("time does not strictly increase")]
    TimeNotIncreasing,
    #[error("temperature rises during the cooling phase")]
    ThermalNotCooling,
    #[error("fitted cooling model is not monotone in pressure (steady state {steady_c:.3} °C, tau {tau_s:.3} s)")]
    ThermalFitNotMonotone { steady_c: f64, tau_s: f64 },
    #[error("trajectory shows no cooling")]
    ThermalNoCooling,
    #[error("source pressure {0} psi is outside (0, 10] psi")]
    ForcePressureOutOfRange(f64),
    #[error("series must be listed in strictly increasing pressure order")]
    ForceOrder,
    #[error("series must start at 0 ms with 0 N")]
    ForceStart,
    #[error("valve opening does not strictly increase")]
    DurationNotIncreasing,
    #[error("valve opening {0} ms exceeds 250 ms")]
    DurationTooLong(f64),
    #[error("force decreases with longer valve opening")]
    ForceNotMonotone,
    #[error("force is below the next-lower source pressure series")]
    ForceNotMonotoneInPressure,
    #[error("frequency {0} Hz is outside [1, 200] Hz")]
    FrequencyOutOfRange(f64),
    #[error("frequency does not strictly increase")]
    FrequencyNotIncreasing,
    #[error("anchors must span exactly 1 Hz to 200 Hz")]
    VibrationCoverage,
    #[error("amplitude {0} g is not above the 0.003 g perception threshold")]
    Imperceptible(f64),
    #[error("exhaust window must lie within [30, 50] ms")]
    ExhaustOutOfRange,
}

fn fail<T>(site: CalibSite, reason: CalibViolation) -> Result<T, CalibError> {
    Err(CalibError { site, reason })
}

/// First-order cooling model fitted to one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalFit {
    pub supply_bar: f64,
    pub steady_c: f64,
    pub tau_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTables {
    data: CalibrationData,
    fits: Vec<ThermalFit>,
    steady: Curve,
    tau: Curve,
    force: Vec<Curve>,
    vibration: Curve,
}

impl CalibrationTables {
    pub fn new(data: CalibrationData) -> Result<Self, CalibError> {
        if !data.ambient_c.is_finite() {
            return fail(CalibSite::Ambient, CalibViolation::NotFinite);
        }
        if !data.recovery_factor.is_finite() {
            return fail(CalibSite::RecoveryFactor, CalibViolation::NotFinite);
        }
        if data.recovery_factor <= 0.0 {
            return fail(CalibSite::RecoveryFactor, CalibViolation::NotPositive);
        }
        if let Some((lo, hi)) = data.flow_rate_m3_per_h {
            if !lo.is_finite() || !hi.is_finite() {
                return fail(CalibSite::FlowRate, CalibViolation::NotFinite);
            }
            if lo <= 0.0 {
                return fail(CalibSite::FlowRate, CalibViolation::NotPositive);
            }
            if lo > hi {
                return fail(CalibSite::FlowRate, CalibViolation::Inverted);
            }
        }
        let (fits, steady, tau) = validate_thermal(&data)?;
        let force = validate_force(&data)?;
        let vibration = validate_vibration(&data)?;

        let (lo, hi) = data.exhaust_decay_ms;
        if !lo.is_finite() || !hi.is_finite() {
            return fail(CalibSite::ExhaustDecay, CalibViolation::NotFinite);
        }
        if lo > hi {
            return fail(CalibSite::ExhaustDecay, CalibViolation::Inverted);
        }
        if lo < EXHAUST_MIN_MS || hi > EXHAUST_MAX_MS {
            return fail(CalibSite::ExhaustDecay, CalibViolation::ExhaustOutOfRange);
        }

        Ok(Self {
            data,
            fits,
            steady,
            tau,
            force,
            vibration,
        })
    }

    pub fn data(&self) -> &CalibrationData {
        &self.data
    }

    pub fn ambient_c(&self) -> f64 {
        self.data.ambient_c
    }

    pub fn thermal_fits(&self) -> &[ThermalFit] {
        &self.fits
    }

    /// Steady-state contact temperature vs supply pressure, anchored at
    /// ambient for zero flow.
    pub(crate) fn steady_curve(&self) -> &Curve {
        &self.steady
    }

    pub(crate) fn tau_curve(&self) -> &Curve {
        &self.tau
    }

    /// Highest characterized vortex supply pressure.
    pub fn max_supply_bar(&self) -> f64 {
        self.steady.domain().1
    }

    pub fn min_supply_bar(&self) -> f64 {
        self.fits[0].supply_bar
    }

    /// Coldest reachable steady-state contact temperature.
    pub fn coldest_steady_c(&self) -> f64 {
        self.steady.last_y()
    }

    /// Recovery time constant (s): the slowest cooling constant scaled by
    /// the recovery factor.
    pub fn recovery_tau_s(&self) -> f64 {
        let slowest = self.fits.iter().map(|f| f.tau_s).fold(0.0, f64::max);
        slowest * self.data.recovery_factor
    }

    pub(crate) fn force_curves(&self) -> &[Curve] {
        &self.force
    }

    pub fn force_series(&self) -> &[ForceSeries] {
        &self.data.force
    }

    pub(crate) fn vibration_curve(&self) -> &Curve {
        &self.vibration
    }

    /// Anchor frequency with the largest amplitude.
    pub fn peak_vibration_hz(&self) -> f64 {
        let mut best = (0.0, f64::NEG_INFINITY);
        for (f, a) in self.vibration.points() {
            if a > best.1 {
                best = (f, a);
            }
        }
        best.0
    }

    /// Exponential time constant (ms) of the exhaust release. The middle of
    /// the release window is where the force reaches 1 % of its start value.
    pub fn exhaust_tau_ms(&self) -> f64 {
        let (lo, hi) = self.data.exhaust_decay_ms;
        0.5 * (lo + hi) / libm::log(100.0)
    }
}

fn validate_thermal(data: &CalibrationData) -> Result<(Vec<ThermalFit>, Curve, Curve), CalibError> {
    if data.thermal.is_empty() {
        return fail(CalibSite::Thermal { curve: 0, sample: None }, CalibViolation::NoThermalCurves);
    }
    let mut fits: Vec<ThermalFit> = Vec::with_capacity(data.thermal.len());
    for (ci, curve) in data.thermal.iter().enumerate() {
        let site = CalibSite::Thermal { curve: ci, sample: None };
        let p = curve.supply_bar;
        if !p.is_finite() {
            return fail(site, CalibViolation::NotFinite);
        }
        if !(VORTEX_MIN_BAR..=VORTEX_MAX_BAR).contains(&p) {
            return fail(site, CalibViolation::ThermalPressureOutOfRange(p));
        }
        if ci > 0 && p <= data.thermal[ci - 1].supply_bar {
            return fail(site, CalibViolation::ThermalOrder);
        }
        if curve.samples.len() < 3 {
            return fail(site, CalibViolation::TooFewSamples);
        }
        for (si, &(t, temp)) in curve.samples.iter().enumerate() {
            let at = CalibSite::Thermal { curve: ci, sample: Some(si) };
            if !t.is_finite() || !temp.is_finite() {
                return fail(at, CalibViolation::NotFinite);
            }
            if si == 0 {
                if t != 0.0 || (temp - data.ambient_c).abs() > EPS {
                    return fail(at, CalibViolation::ThermalStart);
                }
                continue;
            }
            let (pt, ptemp) = curve.samples[si - 1];
            if t <= pt {
                return fail(at, CalibViolation::TimeNotIncreasing);
            }
            if temp > ptemp {
                return fail(at, CalibViolation::ThermalNotCooling);
            }
        }
        let fit = fit_first_order(data.ambient_c, &curve.samples);
        if !(fit.steady_c < data.ambient_c) || !fit.tau_s.is_finite() {
            return fail(site, CalibViolation::ThermalNoCooling);
        }
        if let Some(prev) = fits.last() {
            if fit.steady_c > prev.steady_c || fit.tau_s > prev.tau_s {
                return fail(
                    site,
                    CalibViolation::ThermalFitNotMonotone {
                        steady_c: fit.steady_c,
                        tau_s: fit.tau_s,
                    },
                );
            }
        }
        fits.push(ThermalFit {
            supply_bar: p,
            steady_c: fit.steady_c,
            tau_s: fit.tau_s,
        });
    }

    let mut steady_pts = Vec::with_capacity(fits.len() + 1);
    steady_pts.push((0.0, data.ambient_c));
    steady_pts.extend(fits.iter().map(|f| (f.supply_bar, f.steady_c)));
    let tau_pts: Vec<(f64, f64)> = fits.iter().map(|f| (f.supply_bar, f.tau_s)).collect();
    // Pressures were checked to be finite and increasing above.
    let steady = Curve::new(&steady_pts).expect("validated pressures");
    let tau = Curve::new(&tau_pts).expect("validated pressures");
    Ok((fits, steady, tau))
}

fn validate_force(data: &CalibrationData) -> Result<Vec<Curve>, CalibError> {
    if data.force.is_empty() {
        return fail(CalibSite::Force { series: 0, sample: None }, CalibViolation::NoForceSeries);
    }
    let mut curves: Vec<Curve> = Vec::with_capacity(data.force.len());
    for (si, series) in data.force.iter().enumerate() {
        let site = CalibSite::Force { series: si, sample: None };
        let psi = series.source_psi;
        if !psi.is_finite() {
            return fail(site, CalibViolation::NotFinite);
        }
        if psi <= 0.0 || psi > CHAMBER_MAX_PSI {
            return fail(site, CalibViolation::ForcePressureOutOfRange(psi));
        }
        if si > 0 && psi <= data.force[si - 1].source_psi {
            return fail(site, CalibViolation::ForceOrder);
        }
        if series.samples.is_empty() {
            return fail(site, CalibViolation::ForceStart);
        }
        for (pi, &(ms, n)) in series.samples.iter().enumerate() {
            let at = CalibSite::Force { series: si, sample: Some(pi) };
            if !ms.is_finite() || !n.is_finite() {
                return fail(at, CalibViolation::NotFinite);
            }
            if pi == 0 {
                if ms != 0.0 || n != 0.0 {
                    return fail(at, CalibViolation::ForceStart);
                }
                continue;
            }
            let (pms, pn) = series.samples[pi - 1];
            if ms <= pms {
                return fail(at, CalibViolation::DurationNotIncreasing);
            }
            if ms > MAX_INLET_OPEN_MS {
                return fail(at, CalibViolation::DurationTooLong(ms));
            }
            if n < pn {
                return fail(at, CalibViolation::ForceNotMonotone);
            }
        }
        let curve = Curve::new(&series.samples).expect("validated samples");
        if let Some(lower) = curves.last() {
            let nodes = lower.points().map(|p| p.0).chain(curve.points().map(|p| p.0));
            for ms in nodes {
                if eval_hold(&curve, ms) < eval_hold(lower, ms) {
                    return fail(site, CalibViolation::ForceNotMonotoneInPressure);
                }
            }
        }
        curves.push(curve);
    }
    Ok(curves)
}

fn validate_vibration(data: &CalibrationData) -> Result<Curve, CalibError> {
    for (i, &(f, a)) in data.vibration.iter().enumerate() {
        let at = CalibSite::Vibration { anchor: Some(i) };
        if !f.is_finite() || !a.is_finite() {
            return fail(at, CalibViolation::NotFinite);
        }
        if !(VIB_MIN_HZ..=VIB_MAX_HZ).contains(&f) {
            return fail(at, CalibViolation::FrequencyOutOfRange(f));
        }
        if i > 0 && f <= data.vibration[i - 1].0 {
            return fail(at, CalibViolation::FrequencyNotIncreasing);
        }
        if a <= PERCEPTION_THRESHOLD_G {
            return fail(at, CalibViolation::Imperceptible(a));
        }
    }
    let site = CalibSite::Vibration { anchor: None };
    let curve = match Curve::new(&data.vibration) {
        Ok(c) => c,
        Err(_) => return fail(site, CalibViolation::VibrationCoverage),
    };
    if curve.domain() != (VIB_MIN_HZ, VIB_MAX_HZ) {
        return fail(site, CalibViolation::VibrationCoverage);
    }
    Ok(curve)
}

/// Evaluates a force curve, holding the last value past the final node.
pub(crate) fn eval_hold(curve: &Curve, ms: f64) -> f64 {
    let (_, hi) = curve.domain();
    curve.eval(ms.min(hi)).unwrap_or(0.0)
}

/// Least-squares fit of `T(t) = Ts + (T0 - Ts)·exp(-t/tau)` with `T0` fixed at
/// ambient.
///
/// For a given `tau` the model is linear in `Ts`, so the fit reduces to a 1-D
/// search over `tau`: a log-spaced scan followed by golden-section refinement.
pub fn fit_first_order(ambient_c: f64, samples: &[(f64, f64)]) -> ThermalFit {
    let steady_for = |tau: f64| -> (f64, f64) {
        let mut num = 0.0;
        let mut den = 0.0;
        for &(t, y) in samples {
            let e = libm::exp(-t / tau);
            let u = 1.0 - e;
            num += u * (y - ambient_c * e);
            den += u * u;
        }
        let ts = if den > 0.0 { num / den } else { ambient_c };
        let mut sse = 0.0;
        for &(t, y) in samples {
            let e = libm::exp(-t / tau);
            let r = ts + (ambient_c - ts) * e - y;
            sse += r * r;
        }
        (ts, sse)
    };

    const LOG_MIN: f64 = -4.0; // 0.01 s
    const LOG_MAX: f64 = 2.0; // 100 s
    const STEPS: usize = 240;
    let tau_at = |i: usize| libm::exp(core::f64::consts::LN_10 * (LOG_MIN + (LOG_MAX - LOG_MIN) * i as f64 / STEPS as f64));
    let mut best = 0;
    let mut best_sse = f64::INFINITY;
    for i in 0..=STEPS {
        let (_, sse) = steady_for(tau_at(i));
        if sse < best_sse {
            best_sse = sse;
            best = i;
        }
    }
    let mut a = libm::log(tau_at(best.saturating_sub(1)));
    let mut b = libm::log(tau_at((best + 1).min(STEPS)));
    let inv_phi = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = steady_for(libm::exp(c)).1;
    let mut fd = steady_for(libm::exp(d)).1;
    for _ in 0..80 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = steady_for(libm::exp(c)).1;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = steady_for(libm::exp(d)).1;
        }
    }
    let tau_s = libm::exp(0.5 * (a + b));
    let (steady_c, _) = steady_for(tau_s);
    ThermalFit {
        supply_bar: f64::NAN,
        steady_c,
        tau_s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::reference_data;

    #[test]
    fn reference_tables_validate() {
        let tables = CalibrationTables::new(reference_data()).unwrap();
        assert_eq!(tables.thermal_fits().len(), 5);
        assert_eq!(tables.max_supply_bar(), 6.0);
        assert_eq!(tables.peak_vibration_hz(), 80.0);
    }

    #[test]
    fn fit_recovers_exact_exponential() {
        let samples: Vec<(f64, f64)> = (0..=20)
            .map(|i| {
                let t = i as f64 * 0.25;
                (t, 13.0 + 13.0 * libm::exp(-t / 0.8))
            })
            .collect();
        let fit = fit_first_order(26.0, &samples);
        assert!((fit.steady_c - 13.0).abs() < 1e-6, "{fit:?}");
        assert!((fit.tau_s - 0.8).abs() < 1e-6, "{fit:?}");
    }

    #[test]
    fn fitted_six_bar_steady_state_near_thirteen() {
        let tables = CalibrationTables::new(reference_data()).unwrap();
        let fit = tables.thermal_fits().last().unwrap();
        assert_eq!(fit.supply_bar, 6.0);
        assert!((fit.steady_c - 13.0).abs() <= 1.0, "{fit:?}");
    }

    #[test]
    fn rejects_thermal_pressure_out_of_range() {
        let mut data = reference_data();
        data.thermal[4].supply_bar = 6.5;
        let err = CalibrationTables::new(data).unwrap_err();
        assert_eq!(err.site, CalibSite::Thermal { curve: 4, sample: None });
        assert!(matches!(err.reason, CalibViolation::ThermalPressureOutOfRange(_)));
    }

    #[test]
    fn rejects_warming_trajectory() {
        let mut data = reference_data();
        data.thermal[1].samples[5].1 += 3.0;
        let err = CalibrationTables::new(data).unwrap_err();
        assert_eq!(err.site, CalibSite::Thermal { curve: 1, sample: Some(5) });
        assert_eq!(err.reason, CalibViolation::ThermalNotCooling);
    }

    #[test]
    fn rejects_trajectory_not_starting_at_ambient() {
        let mut data = reference_data();
        data.thermal[0].samples[0].1 = 25.0;
        let err = CalibrationTables::new(data).unwrap_err();
        assert_eq!(err.reason, CalibViolation::ThermalStart);
    }

    #[test]
    fn rejects_decreasing_force() {
        let mut data = reference_data();
        data.force[1].samples[4].1 = 0.1;
        let err = CalibrationTables::new(data).unwrap_err();
        assert_eq!(err.site, CalibSite::Force { series: 1, sample: Some(4) });
        assert_eq!(err.reason, CalibViolation::ForceNotMonotone);
    }

    #[test]
    fn rejects_force_inverted_across_pressures() {
        let mut data = reference_data();
        for s in data.force[0].samples.iter_mut() {
            s.1 *= 3.0;
        }
        let err = CalibrationTables::new(data).unwrap_err();
        assert_eq!(err.reason, CalibViolation::ForceNotMonotoneInPressure);
    }

    #[test]
    fn rejects_force_sample_past_safety_limit() {
        let mut data = reference_data();
        data.force[1].samples.push((260.0, 8.0));
        let err = CalibrationTables::new(data).unwrap_err();
        assert_eq!(err.reason, CalibViolation::DurationTooLong(260.0));
    }

    #[test]
    fn rejects_vibration_outside_band() {
        let mut data = reference_data();
        data.vibration.push((250.0, 0.3));
        let err = CalibrationTables::new(data).unwrap_err();
        assert_eq!(err.reason, CalibViolation::FrequencyOutOfRange(250.0));
    }

    #[test]
    fn rejects_imperceptible_anchor() {
        let mut data = reference_data();
        data.vibration[2].1 = 0.002;
        let err = CalibrationTables::new(data).unwrap_err();
        assert_eq!(err.reason, CalibViolation::Imperceptible(0.002));
    }

    #[test]
    fn rejects_exhaust_window_outside_limits() {
        let mut data = reference_data();
        data.exhaust_decay_ms = (20.0, 50.0);
        let err = CalibrationTables::new(data).unwrap_err();
        assert_eq!(err.site, CalibSite::ExhaustDecay);
        let mut data = reference_data();
        data.exhaust_decay_ms = (50.0, 30.0);
        assert_eq!(
            CalibrationTables::new(data).unwrap_err().reason,
            CalibViolation::Inverted
        );
    }
}
