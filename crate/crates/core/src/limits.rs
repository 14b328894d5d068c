//! Hardware envelope of the actuator. Inputs outside these bounds are rejected,
//! never extrapolated.

/// Lowest vortex-tube supply pressure with characterized cooling.
pub const VORTEX_MIN_BAR: f64 = 3.42;
/// Highest vortex-tube supply pressure with characterized cooling.
pub const VORTEX_MAX_BAR: f64 = 6.00;

/// Chamber regulator range.
pub const CHAMBER_MAX_PSI: f64 = 10.0;

/// Supply pressure at and above which inlet opening time is limited.
pub const SAFETY_PSI: f64 = 10.0;
/// Longest continuous inlet opening the silicone cell tolerates at [`SAFETY_PSI`].
pub const MAX_INLET_OPEN_MS: f64 = 250.0;

pub const VIB_MIN_HZ: f64 = 1.0;
pub const VIB_MAX_HZ: f64 = 200.0;

/// Upper end of the vertical vibration perception threshold range (g).
pub const PERCEPTION_THRESHOLD_G: f64 = 0.003;

/// Admissible window for the full exhaust release time.
pub const EXHAUST_MIN_MS: f64 = 30.0;
pub const EXHAUST_MAX_MS: f64 = 50.0;

/// Peak quasi-static force the actuator renders.
pub const MAX_FORCE_N: f64 = 8.0;
/// Coldest contact temperature the renderer may request.
pub const COLDEST_TARGET_C: f64 = 13.0;

/// Slack for comparing values that went through a few arithmetic steps.
pub(crate) const EPS: f64 = 1e-9;
