//! Discrete-time valve controller.
//!
//! Turns [`HapticCommand`]s into valve-bank states and regulator setpoints
//! once per tick. The lower chamber renders quasi-static pressure by
//! fill-and-seal; the upper chamber renders vibration by cycling its inlet and
//! exhaust valves. The vortex-tube regulator is set from the thermal target.
//! The three channels never read each other's state.

use crate::actuator::{force_from_inflation, force_profile, saturation_force, ModelError};
use crate::calibration::CalibrationTables;
use crate::limits::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct ValveBank {
    /// Lower (pressure) chamber inlet.
    pub pv_lower: bool,
    /// Lower (pressure) chamber exhaust.
    pub nv_lower: bool,
    /// Upper (vibration) chamber inlet.
    pub pv_upper: bool,
    /// Upper (vibration) chamber exhaust.
    pub nv_upper: bool,
}

impl ValveBank {
    pub const CLOSED: Self = Self {
        pv_lower: false,
        nv_lower: false,
        pv_upper: false,
        nv_upper: false,
    };

    pub const ALL_EXHAUST: Self = Self {
        pv_lower: false,
        nv_lower: true,
        pv_upper: false,
        nv_upper: true,
    };

    /// No chamber has inlet and exhaust open together.
    pub fn is_exclusive(&self) -> bool {
        !(self.pv_lower && self.nv_lower) && !(self.pv_upper && self.nv_upper)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegulatorSetpoints {
    /// Lower chamber supply.
    pub chamber_supply_psi: f64,
    /// Upper chamber supply while a vibration cycle runs.
    pub vib_supply_psi: f64,
    pub vortex_supply_bar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HapticCommand {
    pub target_force_n: f64,
    /// 0 = off. With `bursts == 0` a nonzero frequency means continuous
    /// cycling; otherwise it is the rate of the requested bursts.
    pub vib_frequency_hz: f64,
    pub vib_supply_psi: f64,
    /// Ambient means no cooling.
    pub thermal_target_c: f64,
    /// One-shot vibration cycles requested on this tick.
    pub bursts: u32,
}

pub const DEFAULT_VIB_SUPPLY_PSI: f64 = 5.0;

impl HapticCommand {
    pub fn null(ambient_c: f64) -> Self {
        Self {
            target_force_n: 0.0,
            vib_frequency_hz: 0.0,
            vib_supply_psi: DEFAULT_VIB_SUPPLY_PSI,
            thermal_target_c: ambient_c,
            bursts: 0,
        }
    }

    pub fn is_null(&self, ambient_c: f64) -> bool {
        self.target_force_n == 0.0 && self.vib_frequency_hz == 0.0 && self.bursts == 0 && self.thermal_target_c == ambient_c
    }

    fn validate(&self, ambient_c: f64) -> Result<(), CommandError> {
        let f = self.target_force_n;
        if !(0.0..=MAX_FORCE_N).contains(&f) {
            return Err(CommandError::Force(f));
        }
        let hz = self.vib_frequency_hz;
        if !(hz == 0.0 || (VIB_MIN_HZ..=VIB_MAX_HZ).contains(&hz)) {
            return Err(CommandError::Frequency(hz));
        }
        if self.bursts > 0 && hz == 0.0 {
            return Err(CommandError::BurstWithoutFrequency);
        }
        let psi = self.vib_supply_psi;
        if !(psi > 0.0 && psi <= CHAMBER_MAX_PSI) {
            return Err(CommandError::VibSupply(psi));
        }
        let t = self.thermal_target_c;
        if !(t >= COLDEST_TARGET_C - EPS && t <= ambient_c + EPS) {
            return Err(CommandError::Thermal(t));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum CommandError {
    #[error("target force {0} N is outside [0, 8] N")]
    Force(f64),
    #[error("vibration frequency {0} Hz is neither 0 nor within [1, 200] Hz")]
    Frequency(f64),
    #[error("bursts requested without a burst frequency")]
    BurstWithoutFrequency,
    #[error("vibration supply {0} psi is outside (0, 10] psi")]
    VibSupply(f64),
    #[error("thermal target {0} °C is outside [13 °C, ambient]")]
    Thermal(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("target {requested} is not achievable; the maximum is {max}")]
    Infeasible { requested: f64, max: f64 },
    #[error("target {0} is not a valid request")]
    InvalidTarget(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Tick-quantized inlet opening that reaches at least `target_force_n`.
///
/// Returns the opening in milliseconds; it is always a whole number of ticks.
pub fn plan_inflation(
    tables: &CalibrationTables,
    target_force_n: f64,
    source_psi: f64,
    tick_period_ms: f64,
) -> Result<f64, PlanError> {
    let ticks = plan_inflation_ticks(tables, target_force_n, source_psi, tick_period_ms)?;
    Ok(ticks as f64 * tick_period_ms)
}

pub(crate) fn plan_inflation_ticks(
    tables: &CalibrationTables,
    target_force_n: f64,
    source_psi: f64,
    tick_period_ms: f64,
) -> Result<u32, PlanError> {
    if !(target_force_n >= 0.0) || !target_force_n.is_finite() {
        return Err(PlanError::InvalidTarget(target_force_n));
    }
    if target_force_n == 0.0 {
        return Ok(0);
    }
    let max = saturation_force(tables, source_psi)?;
    if target_force_n > max {
        return Err(PlanError::Infeasible {
            requested: target_force_n,
            max,
        });
    }
    let profile = force_profile(tables, source_psi)?;
    let exact_ms = profile.first_reaching(target_force_n).ok_or(PlanError::Infeasible {
        requested: target_force_n,
        max,
    })?;
    let mut ticks = libm::ceil(exact_ms / tick_period_ms) as u32;
    // Rounding in the division can land one tick either side.
    let reaches = |n: u32| -> bool {
        let ms = n as f64 * tick_period_ms;
        ms <= MAX_INLET_OPEN_MS
            && force_from_inflation(tables, source_psi, ms).is_ok_and(|f| f >= target_force_n)
    };
    while ticks > 0 && reaches(ticks - 1) {
        ticks -= 1;
    }
    while !reaches(ticks) {
        ticks += 1;
        if ticks as f64 * tick_period_ms > MAX_INLET_OPEN_MS {
            return Err(PlanError::Infeasible {
                requested: target_force_n,
                max,
            });
        }
    }
    Ok(ticks)
}

/// Vortex supply pressure for a contact temperature target.
///
/// Picks the smallest supply whose steady state is at or below the target,
/// limited to the characterized supply range. Targets between 13 °C and the
/// coldest fitted steady state get the maximum supply.
pub fn plan_thermal(tables: &CalibrationTables, thermal_target_c: f64) -> Result<f64, PlanError> {
    let ambient = tables.ambient_c();
    if !thermal_target_c.is_finite() || thermal_target_c > ambient + EPS {
        return Err(PlanError::InvalidTarget(thermal_target_c));
    }
    if thermal_target_c >= ambient - EPS {
        return Ok(0.0);
    }
    let floor = tables.coldest_steady_c().min(COLDEST_TARGET_C);
    if thermal_target_c < floor - EPS {
        return Err(PlanError::Infeasible {
            requested: thermal_target_c,
            max: floor,
        });
    }
    let bar = tables
        .steady_curve()
        .first_falling_to(thermal_target_c)
        .unwrap_or(tables.max_supply_bar());
    Ok(bar.clamp(tables.min_supply_bar(), tables.max_supply_bar()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inlet {
    Lower,
    Upper,
}

/// Continuous opening time of one inlet valve and the supply behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InletExposure {
    pub inlet: Inlet,
    pub open_elapsed_ms: f64,
    pub supply_psi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("{inlet:?} inlet would stay open {open_elapsed_ms} ms at {supply_psi} psi")]
pub struct SafetyViolation {
    pub inlet: Inlet,
    pub open_elapsed_ms: f64,
    pub supply_psi: f64,
}

/// Flags any inlet whose continuous opening exceeds 250 ms at 10 psi or more.
pub fn safety_check(exposures: &[InletExposure]) -> Result<(), SafetyViolation> {
    for e in exposures {
        if e.supply_psi >= SAFETY_PSI && e.open_elapsed_ms > MAX_INLET_OPEN_MS + EPS {
            return Err(SafetyViolation {
                inlet: e.inlet,
                open_elapsed_ms: e.open_elapsed_ms,
                supply_psi: e.supply_psi,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ControlError {
    #[error("invalid command: {0}")]
    Command(#[from] CommandError),
    #[error("cannot plan command: {0}")]
    Plan(#[from] PlanError),
    /// The tick was aborted; the emitted bank is [`ValveBank::ALL_EXHAUST`].
    #[error("safety interlock at tick {tick}: {violation}")]
    Safety { tick: u64, violation: SafetyViolation },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    pub tick_rate_hz: u32,
    /// Lower chamber supply used for pressure rendering.
    pub chamber_supply_psi: f64,
    /// How long the lower exhaust stays open for a release. `None` uses the
    /// upper end of the calibrated release window.
    pub exhaust_ms: Option<f64>,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            tick_rate_hz: 1000,
            chamber_supply_psi: 10.0,
            exhaust_ms: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct PressureChannel {
    /// Inlet ticks committed since the last exhaust.
    planned: u32,
    opened: u32,
    exhaust_left: u32,
}

impl PressureChannel {
    /// Returns `(inlet, exhaust)`.
    fn step(&mut self, desired: u32, exhaust_ticks: u32) -> (bool, bool) {
        if self.exhaust_left > 0 {
            self.exhaust_left -= 1;
            return (false, true);
        }
        if desired < self.planned {
            // No pressure sensor: release fully, refill after.
            *self = Self {
                planned: 0,
                opened: 0,
                exhaust_left: exhaust_ticks.saturating_sub(1),
            };
            return (false, true);
        }
        self.planned = desired;
        if self.opened < self.planned {
            self.opened += 1;
            return (true, false);
        }
        (false, false)
    }

    fn abort(&mut self, exhaust_ticks: u32) {
        *self = Self {
            planned: 0,
            opened: 0,
            exhaust_left: exhaust_ticks.saturating_sub(1),
        };
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cycle {
    hz: f64,
    supply_psi: f64,
    inlet_left: u32,
    exhaust_left: u32,
}

/// Cycle boundaries for a run of back-to-back cycles at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Schedule {
    hz: f64,
    origin: u64,
    index: u64,
    /// Tick on which the current cycle ends (exclusive).
    next_start: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct VibrationChannel {
    queued: u32,
    burst_hz: f64,
    burst_psi: f64,
    cycle: Option<Cycle>,
    schedule: Option<Schedule>,
}

impl VibrationChannel {
    /// Returns `(inlet, exhaust, cycle frequency, supply)`.
    fn step(&mut self, tick: u64, cmd: &HapticCommand, tick_rate_hz: u32) -> (bool, bool, Option<f64>, f64) {
        if cmd.bursts > 0 {
            self.queued = self.queued.saturating_add(cmd.bursts);
            self.burst_hz = cmd.vib_frequency_hz;
            self.burst_psi = cmd.vib_supply_psi;
        }
        if self.cycle.is_none() {
            let next = if self.queued > 0 {
                self.queued -= 1;
                Some((self.burst_hz, self.burst_psi))
            } else if cmd.bursts == 0 && cmd.vib_frequency_hz > 0.0 {
                Some((cmd.vib_frequency_hz, cmd.vib_supply_psi))
            } else {
                None
            };
            if let Some((hz, psi)) = next {
                self.cycle = Some(self.start_cycle(tick, hz, psi, tick_rate_hz));
            }
        }
        let Some(cycle) = self.cycle.as_mut() else {
            return (false, false, None, 0.0);
        };
        let out = (cycle.hz, cycle.supply_psi);
        let inlet = if cycle.inlet_left > 0 {
            cycle.inlet_left -= 1;
            true
        } else {
            cycle.exhaust_left -= 1;
            false
        };
        if cycle.inlet_left == 0 && cycle.exhaust_left == 0 {
            self.cycle = None;
        }
        (inlet, !inlet, Some(out.0), out.1)
    }

    fn start_cycle(&mut self, tick: u64, hz: f64, supply_psi: f64, tick_rate_hz: u32) -> Cycle {
        let rate = tick_rate_hz as f64;
        // At least two ticks per cycle so every cycle has an inlet edge.
        let hz = hz.min(rate / 2.0);
        let schedule = match self.schedule {
            Some(s) if s.hz == hz && s.next_start == tick => Schedule { index: s.index + 1, ..s },
            _ => Schedule {
                hz,
                origin: tick,
                index: 0,
                next_start: tick,
            },
        };
        let boundary = |k: u64| libm::ceil(k as f64 * rate / hz) as u64;
        let len = (boundary(schedule.index + 1) - boundary(schedule.index)).max(2);
        let next_start = schedule.origin + boundary(schedule.index) + len;
        self.schedule = Some(Schedule { next_start, ..schedule });
        let inlet = (len / 2) as u32;
        Cycle {
            hz,
            supply_psi,
            inlet_left: inlet,
            exhaust_left: len as u32 - inlet,
        }
    }

    fn abort(&mut self) {
        self.queued = 0;
        self.cycle = None;
        self.schedule = None;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickOutput {
    pub tick: u64,
    pub bank: ValveBank,
    pub setpoints: RegulatorSetpoints,
    /// Frequency of the vibration cycle running on this tick.
    pub vib_cycle_hz: Option<f64>,
}

/// Single-writer controller state machine.
#[derive(Debug, Clone, PartialEq)]
pub struct Controller {
    config: ControllerConfig,
    period_ms: f64,
    exhaust_ticks: u32,
    tick_index: u64,
    pressure: PressureChannel,
    vibration: VibrationChannel,
    /// Continuous open ticks of the lower and upper inlets.
    inlet_open_ticks: [u32; 2],
    active: Option<HapticCommand>,
}

impl Controller {
    pub fn new(tables: &CalibrationTables, config: ControllerConfig) -> Self {
        let period_ms = 1e3 / config.tick_rate_hz as f64;
        let exhaust_ms = config.exhaust_ms.unwrap_or(tables.data().exhaust_decay_ms.1);
        let exhaust_ticks = (libm::ceil(exhaust_ms / period_ms - EPS) as u32).max(1);
        Self {
            config,
            period_ms,
            exhaust_ticks,
            tick_index: 0,
            pressure: PressureChannel::default(),
            vibration: VibrationChannel::default(),
            inlet_open_ticks: [0; 2],
            active: None,
        }
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.config
    }

    pub fn tick_index(&self) -> u64 {
        self.tick_index
    }

    pub fn tick_period_ms(&self) -> f64 {
        self.period_ms
    }

    pub fn active_command(&self) -> Option<&HapticCommand> {
        self.active.as_ref()
    }

    /// Continuous opening of each inlet after the last emitted tick.
    pub fn exposure(&self) -> [InletExposure; 2] {
        [
            InletExposure {
                inlet: Inlet::Lower,
                open_elapsed_ms: self.inlet_open_ticks[0] as f64 * self.period_ms,
                supply_psi: self.config.chamber_supply_psi,
            },
            InletExposure {
                inlet: Inlet::Upper,
                open_elapsed_ms: self.inlet_open_ticks[1] as f64 * self.period_ms,
                supply_psi: self.vibration.cycle.map_or(0.0, |c| c.supply_psi),
            },
        ]
    }

    /// Advances one tick under `command`.
    pub fn tick(&mut self, tables: &CalibrationTables, command: &HapticCommand) -> Result<TickOutput, ControlError> {
        command.validate(tables.ambient_c())?;
        let psi = self.config.chamber_supply_psi;
        let desired = plan_inflation_ticks(tables, command.target_force_n, psi, self.period_ms)?;
        let vortex_supply_bar = plan_thermal(tables, command.thermal_target_c)?;

        let tick = self.tick_index;
        self.tick_index += 1;
        self.active = Some(*command);

        let (pv_lower, nv_lower) = self.pressure.step(desired, self.exhaust_ticks);
        let (pv_upper, nv_upper, vib_cycle_hz, vib_psi) =
            self.vibration.step(tick, command, self.config.tick_rate_hz);

        let lower_open = if pv_lower { self.inlet_open_ticks[0] + 1 } else { 0 };
        let upper_open = if pv_upper { self.inlet_open_ticks[1] + 1 } else { 0 };
        let prospective = [
            InletExposure {
                inlet: Inlet::Lower,
                open_elapsed_ms: lower_open as f64 * self.period_ms,
                supply_psi: psi,
            },
            InletExposure {
                inlet: Inlet::Upper,
                open_elapsed_ms: upper_open as f64 * self.period_ms,
                supply_psi: vib_psi,
            },
        ];
        if let Err(violation) = safety_check(&prospective) {
            self.pressure.abort(self.exhaust_ticks);
            self.vibration.abort();
            self.inlet_open_ticks = [0; 2];
            return Err(ControlError::Safety { tick, violation });
        }
        self.inlet_open_ticks = [lower_open, upper_open];

        Ok(TickOutput {
            tick,
            bank: ValveBank {
                pv_lower,
                nv_lower,
                pv_upper,
                nv_upper,
            },
            setpoints: RegulatorSetpoints {
                chamber_supply_psi: if desired > 0 { psi } else { 0.0 },
                vib_supply_psi: if vib_cycle_hz.is_some() { vib_psi } else { 0.0 },
                vortex_supply_bar,
            },
            vib_cycle_hz,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::reference_tables;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn vib(hz: f64) -> HapticCommand {
        HapticCommand {
            vib_frequency_hz: hz,
            ..HapticCommand::null(26.0)
        }
    }

    fn run(ctrl: &mut Controller, cmd: &HapticCommand, ticks: usize) -> Vec<TickOutput> {
        let t = reference_tables();
        (0..ticks).map(|_| ctrl.tick(&t, cmd).unwrap()).collect()
    }

    fn rising_edges(outs: &[TickOutput]) -> usize {
        let mut prev = false;
        outs.iter()
            .filter(|o| {
                let edge = o.bank.pv_upper && !prev;
                prev = o.bank.pv_upper;
                edge
            })
            .count()
    }

    #[test]
    fn plan_inflation_examples() {
        let t = reference_tables();
        assert_eq!(plan_inflation(&t, 8.0, 10.0, 1.0), Ok(200.0));
        assert_eq!(plan_inflation(&t, 0.0, 5.0, 1.0), Ok(0.0));
        assert_eq!(plan_inflation(&t, 0.0, 10.0, 1.0), Ok(0.0));
        assert!(matches!(
            plan_inflation(&t, 8.5, 10.0, 1.0),
            Err(PlanError::Infeasible { max, .. }) if max == 8.0
        ));
    }

    #[test]
    fn plan_inflation_is_the_smallest_tick() {
        // Brute force over every tick-quantized duration.
        let t = reference_tables();
        for target in [0.01, 1.0, 2.9, 3.0, 4.0, 5.55, 7.99] {
            let brute = (0..=250u32)
                .find(|&n| force_from_inflation(&t, 10.0, n as f64).unwrap() >= target)
                .unwrap();
            assert_eq!(plan_inflation(&t, target, 10.0, 1.0), Ok(brute as f64), "target {target}");
        }
        let d = plan_inflation(&t, 4.0, 10.0, 1.0).unwrap();
        let f = force_from_inflation(&t, 10.0, d).unwrap();
        let step = f - force_from_inflation(&t, 10.0, d - 1.0).unwrap();
        assert!(f >= 4.0 && f - 4.0 < step);
    }

    #[test]
    fn plan_thermal_examples() {
        let t = reference_tables();
        assert_eq!(plan_thermal(&t, 13.0), Ok(6.0));
        assert_eq!(plan_thermal(&t, 26.0), Ok(0.0));
        assert!(matches!(plan_thermal(&t, 12.5), Err(PlanError::Infeasible { .. })));
        assert!(matches!(plan_thermal(&t, 30.0), Err(PlanError::InvalidTarget(_))));
    }

    #[test]
    fn plan_thermal_brackets_characterized_pressures() {
        let t = reference_tables();
        let fits = t.thermal_fits();
        for w in fits.windows(2) {
            let target = 0.5 * (w[0].steady_c + w[1].steady_c);
            let bar = plan_thermal(&t, target).unwrap();
            assert!(bar > w[0].supply_bar && bar < w[1].supply_bar, "{target} -> {bar}");
        }
        // Shallow targets still need the minimum working supply.
        assert_eq!(plan_thermal(&t, 25.0), Ok(3.42));
    }

    #[test]
    fn safety_check_examples() {
        let open = |ms| InletExposure {
            inlet: Inlet::Lower,
            open_elapsed_ms: ms,
            supply_psi: 10.0,
        };
        assert!(safety_check(&[open(260.0)]).is_err());
        assert!(safety_check(&[open(240.0)]).is_ok());
        assert!(safety_check(&[open(250.0)]).is_ok());
        assert!(safety_check(&[InletExposure { supply_psi: 5.0, ..open(900.0) }]).is_ok());
        let closed = Controller::new(&reference_tables(), ControllerConfig::default());
        assert!(safety_check(&closed.exposure()).is_ok());
    }

    #[test]
    fn null_command_from_idle_is_quiet() {
        let t = reference_tables();
        let mut c = Controller::new(&t, ControllerConfig::default());
        for out in run(&mut c, &HapticCommand::null(26.0), 100) {
            assert_eq!(out.bank, ValveBank::CLOSED);
            assert_eq!(out.setpoints, RegulatorSetpoints::default());
        }
    }

    #[test]
    fn eighty_hertz_gives_eighty_openings_per_second() {
        let mut c = Controller::new(&reference_tables(), ControllerConfig::default());
        let outs = run(&mut c, &vib(80.0), 1000);
        assert!((rising_edges(&outs) as i64 - 80).abs() <= 1);
    }

    #[test]
    fn two_hundred_hertz_splits_remainder_to_exhaust() {
        let mut c = Controller::new(&reference_tables(), ControllerConfig::default());
        let outs = run(&mut c, &vib(200.0), 5);
        let pattern: Vec<bool> = outs.iter().map(|o| o.bank.pv_upper).collect();
        assert_eq!(pattern, [true, true, false, false, false]);
        assert!(outs.iter().all(|o| o.bank.pv_upper != o.bank.nv_upper));
    }

    #[test]
    fn eight_newtons_fills_two_hundred_ms_then_seals() {
        let t = reference_tables();
        let mut c = Controller::new(&t, ControllerConfig::default());
        let cmd = HapticCommand {
            target_force_n: 8.0,
            ..HapticCommand::null(26.0)
        };
        let outs = run(&mut c, &cmd, 2000);
        let open: usize = outs.iter().filter(|o| o.bank.pv_lower).count();
        assert_eq!(open, 200);
        assert!(outs[..200].iter().all(|o| o.bank.pv_lower));
        assert!(outs[200..].iter().all(|o| !o.bank.pv_lower && !o.bank.nv_lower));
        assert_eq!(open as f64, plan_inflation(&t, 8.0, 10.0, 1.0).unwrap());
    }

    #[test]
    fn force_decrease_exhausts_then_refills() {
        let t = reference_tables();
        let mut c = Controller::new(&t, ControllerConfig::default());
        let high = HapticCommand {
            target_force_n: 5.0,
            ..HapticCommand::null(26.0)
        };
        let low = HapticCommand {
            target_force_n: 3.0,
            ..high
        };
        run(&mut c, &high, 300);
        let outs = run(&mut c, &low, 300);
        assert!(outs[..50].iter().all(|o| o.bank.nv_lower && !o.bank.pv_lower));
        let refill = outs[50..].iter().filter(|o| o.bank.pv_lower).count() as f64;
        assert_eq!(refill, plan_inflation(&t, 3.0, 10.0, 1.0).unwrap());
    }

    #[test]
    fn slow_cycling_at_ten_psi_trips_the_interlock() {
        let t = reference_tables();
        let mut c = Controller::new(&t, ControllerConfig::default());
        let cmd = HapticCommand {
            vib_frequency_hz: 1.0,
            vib_supply_psi: 10.0,
            ..HapticCommand::null(26.0)
        };
        let mut tripped = None;
        for i in 0..600 {
            match c.tick(&t, &cmd) {
                Ok(o) => assert!(!o.bank.pv_upper || i < 250),
                Err(ControlError::Safety { tick, violation }) => {
                    tripped = Some((tick, violation));
                    break;
                }
                Err(e) => panic!("{e}"),
            }
        }
        let (tick, v) = tripped.expect("interlock must trip");
        assert_eq!(tick, 250);
        assert_eq!(v.inlet, Inlet::Upper);
        assert!(v.open_elapsed_ms > 250.0);
    }

    #[test]
    fn slow_cycling_below_ten_psi_is_allowed() {
        let mut c = Controller::new(&reference_tables(), ControllerConfig::default());
        let outs = run(&mut c, &vib(1.0), 2000);
        assert_eq!(rising_edges(&outs), 2);
    }

    #[test]
    fn bursts_queue_and_run_one_cycle_each() {
        let t = reference_tables();
        let mut c = Controller::new(&t, ControllerConfig::default());
        let burst = HapticCommand {
            vib_frequency_hz: 50.0,
            bursts: 3,
            ..HapticCommand::null(26.0)
        };
        let mut outs = alloc::vec![c.tick(&t, &burst).unwrap()];
        outs.extend(run(&mut c, &HapticCommand::null(26.0), 200));
        assert_eq!(rising_edges(&outs), 3);
        assert_eq!(outs.iter().filter(|o| o.vib_cycle_hz.is_some()).count(), 60);
    }

    #[test]
    fn invalid_commands_are_rejected() {
        let t = reference_tables();
        let mut c = Controller::new(&t, ControllerConfig::default());
        let bad = [
            HapticCommand { target_force_n: 9.0, ..HapticCommand::null(26.0) },
            HapticCommand { vib_frequency_hz: 0.5, ..HapticCommand::null(26.0) },
            HapticCommand { bursts: 1, ..HapticCommand::null(26.0) },
            HapticCommand { thermal_target_c: 10.0, ..HapticCommand::null(26.0) },
        ];
        for cmd in bad {
            assert!(matches!(c.tick(&t, &cmd), Err(ControlError::Command(_))), "{cmd:?}");
        }
        assert_eq!(c.tick_index(), 0);
    }

    fn arb_command() -> impl Strategy<Value = HapticCommand> {
        (
            0.0f64..=8.0,
            prop_oneof![Just(0.0), 1.0f64..=200.0],
            prop_oneof![Just(5.0), 0.5f64..=10.0, Just(10.0)],
            13.0f64..=26.0,
            0u32..3,
        )
            .prop_map(|(f, hz, psi, temp, bursts)| HapticCommand {
                target_force_n: f,
                vib_frequency_hz: hz,
                vib_supply_psi: psi,
                thermal_target_c: temp,
                bursts: if hz > 0.0 { bursts } else { 0 },
            })
    }

    proptest! {
        #[test]
        fn frequency_fidelity_over_ten_seconds(hz in 1.0f64..=200.0) {
            let mut c = Controller::new(&reference_tables(), ControllerConfig::default());
            let outs = run(&mut c, &vib(hz), 10_000);
            let n = rising_edges(&outs) as f64;
            prop_assert!((n - 10.0 * hz).abs() <= 10.0, "{} edges at {} Hz", n, hz);
        }

        #[test]
        fn banks_are_exclusive(cmds in proptest::collection::vec((arb_command(), 1usize..80), 1..20)) {
            let t = reference_tables();
            let mut c = Controller::new(&t, ControllerConfig::default());
            for (cmd, hold) in &cmds {
                for _ in 0..*hold {
                    let bank = match c.tick(&t, cmd) {
                        Ok(o) => o.bank,
                        Err(ControlError::Safety { .. }) => ValveBank::ALL_EXHAUST,
                        Err(e) => panic!("{e}"),
                    };
                    prop_assert!(bank.is_exclusive());
                }
            }
        }

        #[test]
        fn channels_are_independent(
            force_cmds in proptest::collection::vec((0.0f64..=8.0, 1usize..120), 1..10),
            hz_a in prop_oneof![Just(0.0), 1.0f64..=200.0],
            hz_b in prop_oneof![Just(0.0), 1.0f64..=200.0],
        ) {
            let t = reference_tables();
            let mut a = Controller::new(&t, ControllerConfig::default());
            let mut b = Controller::new(&t, ControllerConfig::default());
            for &(f, hold) in &force_cmds {
                let base = HapticCommand { target_force_n: f, ..HapticCommand::null(26.0) };
                let ca = HapticCommand { vib_frequency_hz: hz_a, ..base };
                let cb = HapticCommand { vib_frequency_hz: hz_b, ..base };
                for _ in 0..hold {
                    let oa = a.tick(&t, &ca).unwrap();
                    let ob = b.tick(&t, &cb).unwrap();
                    prop_assert_eq!((oa.bank.pv_lower, oa.bank.nv_lower), (ob.bank.pv_lower, ob.bank.nv_lower));
                    prop_assert_eq!(oa.setpoints.chamber_supply_psi, ob.setpoints.chamber_supply_psi);
                }
            }
        }
    }
}
