//! Finger traces and deterministic replay on the tick clock.
//!
//! Trace time zero is tick zero. Tick `k` samples the trace at `k / rate`
//! seconds by linear interpolation; ticks before the first sample see no
//! finger, and replay ends at the last tick not after the final sample.

use alloc::string::String;
use alloc::vec::Vec;

use crate::render::{FingerSample, Vec3};
use crate::session::{Session, SessionFault, TelemetryRecord, TelemetrySummary};

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub name: String,
    pub sample_rate_hz: f64,
    pub samples: Vec<FingerSample>,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum TraceError {
    #[error("sample {0} has a non-finite value")]
    NotFinite(usize),
    #[error("sample {0} does not advance in time")]
    NotIncreasing(usize),
    #[error("declared sample rate {0} Hz is not positive")]
    SampleRate(f64),
    #[error("declared sample rate {declared} Hz disagrees with measured {measured} Hz by more than 1%")]
    RateMismatch { declared: f64, measured: f64 },
}

impl Trace {
    /// Strictly increasing finite samples, and a declared rate within 1% of
    /// the one implied by the median sample interval.
    pub fn validate(&self) -> Result<(), TraceError> {
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(TraceError::SampleRate(self.sample_rate_hz));
        }
        for (i, s) in self.samples.iter().enumerate() {
            if !s.t.is_finite() || !s.position.is_finite() {
                return Err(TraceError::NotFinite(i));
            }
            if i > 0 && !(s.t > self.samples[i - 1].t) {
                return Err(TraceError::NotIncreasing(i));
            }
        }
        if let Some(dt) = median_interval(&self.samples) {
            let measured = 1.0 / dt;
            if libm::fabs(measured - self.sample_rate_hz) > 0.01 * self.sample_rate_hz {
                return Err(TraceError::RateMismatch {
                    declared: self.sample_rate_hz,
                    measured,
                });
            }
        }
        Ok(())
    }

    /// Seconds covered by the trace, 0 when it has fewer than two samples.
    pub fn duration_s(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }
}

fn median_interval(samples: &[FingerSample]) -> Option<f64> {
    let mut dts: Vec<f64> = samples.windows(2).map(|w| w[1].t - w[0].t).collect();
    if dts.is_empty() {
        return None;
    }
    dts.sort_by(f64::total_cmp);
    let n = dts.len();
    Some(if n % 2 == 1 {
        dts[n / 2]
    } else {
        0.5 * (dts[n / 2 - 1] + dts[n / 2])
    })
}

/// Samples a trace at non-decreasing times.
#[derive(Debug, Clone)]
pub struct Resampler<'a> {
    samples: &'a [FingerSample],
    /// Index of the first sample with `t` above the last query.
    next: usize,
}

impl<'a> Resampler<'a> {
    pub fn new(samples: &'a [FingerSample]) -> Self {
        Self { samples, next: 0 }
    }

    /// Position at `t`. Exact sample times return the sample unchanged.
    /// `None` before the first sample and after the last.
    pub fn at(&mut self, t: f64) -> Option<Vec3> {
        let s = self.samples;
        while self.next < s.len() && s[self.next].t <= t {
            self.next += 1;
        }
        if self.next == 0 {
            return None;
        }
        let a = s[self.next - 1];
        if a.t == t {
            return Some(a.position);
        }
        let b = s.get(self.next)?;
        let alpha = (t - a.t) / (b.t - a.t);
        Some(a.position.lerp(b.position, alpha))
    }
}

/// Ticks a trace spans at `tick_rate_hz`.
pub fn tick_count(trace: &Trace, tick_rate_hz: u32) -> u64 {
    match trace.samples.last() {
        Some(last) if last.t >= 0.0 => {
            let rate = tick_rate_hz as f64;
            let mut n = libm::floor(last.t * rate) as u64;
            // Guard the floor against rounding on either side.
            while (n + 1) as f64 / rate <= last.t {
                n += 1;
            }
            while n > 0 && n as f64 / rate > last.t {
                n -= 1;
            }
            n + 1
        }
        _ => 0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ReplayError {
    #[error("invalid trace: {0}")]
    Trace(#[from] TraceError),
    #[error("tick rate {tick_rate_hz} Hz is below the trace sample rate {sample_rate_hz} Hz")]
    TickRateTooLow { tick_rate_hz: u32, sample_rate_hz: f64 },
    #[error(transparent)]
    Fault(#[from] SessionFault),
}

/// Replays `trace` through a fresh session, handing each record to `sink`.
pub fn replay(
    trace: &Trace,
    session: &mut Session,
    mut sink: impl FnMut(&TelemetryRecord),
) -> Result<TelemetrySummary, ReplayError> {
    trace.validate()?;
    let rate = session.tick_rate_hz();
    if (rate as f64) < trace.sample_rate_hz * (1.0 - 1e-9) {
        return Err(ReplayError::TickRateTooLow {
            tick_rate_hz: rate,
            sample_rate_hz: trace.sample_rate_hz,
        });
    }
    session.reset();
    let mut summary = TelemetrySummary::default();
    let mut resampler = Resampler::new(&trace.samples);
    for k in 0..tick_count(trace, rate) {
        let finger = resampler.at(k as f64 / rate as f64);
        let record = session.step(finger)?;
        summary.record(&record);
        sink(&record);
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn sample(t: f64, x: f64) -> FingerSample {
        FingerSample {
            t,
            position: Vec3::new(x, 0.0, -1.0),
        }
    }

    fn trace(samples: Vec<FingerSample>, rate: f64) -> Trace {
        Trace {
            name: String::from("t"),
            sample_rate_hz: rate,
            samples,
        }
    }

    #[test]
    fn validation() {
        assert_eq!(trace(vec![], 120.0).validate(), Ok(()));
        let good: Vec<_> = (0..10).map(|i| sample(i as f64 / 120.0, 0.0)).collect();
        assert_eq!(trace(good.clone(), 120.0).validate(), Ok(()));
        assert_eq!(trace(good.clone(), 121.0).validate(), Ok(()));
        assert!(matches!(trace(good.clone(), 125.0).validate(), Err(TraceError::RateMismatch { .. })));
        let mut dup = good.clone();
        dup[4].t = dup[3].t;
        assert_eq!(trace(dup, 120.0).validate(), Err(TraceError::NotIncreasing(4)));
        let mut nan = good;
        nan[2].position.y = f64::NAN;
        assert_eq!(trace(nan, 120.0).validate(), Err(TraceError::NotFinite(2)));
    }

    #[test]
    fn resampler_hits_and_gaps() {
        let s = vec![sample(0.01, 0.0), sample(0.02, 10.0), sample(0.03, 10.0)];
        let mut r = Resampler::new(&s);
        assert_eq!(r.at(0.0), None);
        assert_eq!(r.at(0.01), Some(s[0].position));
        assert!((r.at(0.015).unwrap().x - 5.0).abs() < 1e-12);
        assert_eq!(r.at(0.02), Some(s[1].position));
        assert_eq!(r.at(0.03), Some(s[2].position));
        assert_eq!(r.at(0.031), None);
    }

    #[test]
    fn tick_counts() {
        assert_eq!(tick_count(&trace(vec![], 120.0), 1000), 0);
        assert_eq!(tick_count(&trace(vec![sample(0.0, 0.0)], 120.0), 1000), 1);
        let s: Vec<_> = (0..=600).map(|i| sample(i as f64 / 120.0, 0.0)).collect();
        assert_eq!(tick_count(&trace(s, 120.0), 1000), 5001);
    }

    proptest! {
        #[test]
        fn interpolation_stays_on_the_segment(
            t0 in 0.0f64..1.0, dt in 1e-4f64..0.1, a in -50.0f64..50.0, b in -50.0f64..50.0, q in 0.0f64..1.0,
        ) {
            let s = vec![sample(t0, a), sample(t0 + dt, b)];
            let p = Resampler::new(&s).at(t0 + q * dt).unwrap();
            prop_assert!(p.x >= a.min(b) - 1e-9 && p.x <= a.max(b) + 1e-9);
            prop_assert_eq!(p.z, -1.0);
        }
    }
}
