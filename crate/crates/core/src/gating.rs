//! Imaging gate: a capture is allowed only once the chamber has stayed inside
//! its temperature and CO₂ tolerances for a full hold window.

use serde::{Deserialize, Serialize};

use crate::error::{Checker, Error, Result, Violation};
use crate::telemetry::TelemetryRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GatePolicy {
    /// Allowed |T − t_set|, °C.
    pub tol_t: f64,
    /// Allowed |F − f_set|.
    pub tol_f: f64,
    /// Time the environment must already have been in tolerance, s.
    pub hold: f64,
    pub capture_interval: f64,
    /// Gate on held sensor readings instead of true plant values.
    pub use_measured: bool,
}

impl Default for GatePolicy {
    fn default() -> Self {
        Self {
            tol_t: 0.5,
            tol_f: 0.005,
            hold: 30.0,
            capture_interval: 300.0,
            use_measured: false,
        }
    }
}

impl GatePolicy {
    pub fn violations(&self) -> Vec<Violation> {
        let mut c = Checker::default();
        c.positive("tol_t", self.tol_t);
        c.positive("tol_f", self.tol_f);
        c.non_negative("hold", self.hold);
        c.positive("capture_interval", self.capture_interval);
        c.finish()
    }

    pub fn validate(&self) -> Result<()> {
        Error::from_violations(self.violations())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaptureReason {
    Ok,
    TempOutOfTolerance,
    Co2OutOfTolerance,
    InsufficientHistory,
}

impl CaptureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            CaptureReason::Ok => "ok",
            CaptureReason::TempOutOfTolerance => "temp_out_of_tolerance",
            CaptureReason::Co2OutOfTolerance => "co2_out_of_tolerance",
            CaptureReason::InsufficientHistory => "insufficient_history",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptureEvent {
    pub time: f64,
    pub permitted: bool,
    pub reason: CaptureReason,
}

impl CaptureEvent {
    fn new(time: f64, reason: CaptureReason) -> Self {
        Self {
            time,
            permitted: reason == CaptureReason::Ok,
            reason,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setpoints {
    pub t_set: f64,
    pub f_set: f64,
}

fn eps(t: f64) -> f64 {
    1e-9 * t.abs().max(1.0)
}

fn check_sorted(history: &[TelemetryRecord]) -> Result<()> {
    match history.windows(2).position(|w| !(w[0].t <= w[1].t)) {
        Some(i) => Err(Error::UnsortedHistory(i + 1)),
        None => Ok(()),
    }
}

/// Decides whether a capture at time `at` is allowed.
///
/// The window `[at − hold, at]` is closed and must be covered by `history`;
/// records inside it are scanned in time order, temperature before CO₂.
pub fn gate(history: &[TelemetryRecord], policy: &GatePolicy, setpoints: Setpoints, at: f64) -> Result<CaptureEvent> {
    check_sorted(history)?;
    Ok(gate_sorted(history, policy, setpoints, at))
}

fn gate_sorted(history: &[TelemetryRecord], policy: &GatePolicy, setpoints: Setpoints, at: f64) -> CaptureEvent {
    let (Some(first), Some(last)) = (history.first(), history.last()) else {
        return CaptureEvent::new(at, CaptureReason::InsufficientHistory);
    };
    let start = at - policy.hold;
    let slack = eps(at);
    if first.t > start + slack || last.t < at - slack {
        return CaptureEvent::new(at, CaptureReason::InsufficientHistory);
    }

    let lo = history.partition_point(|r| r.t < start - slack);
    let hi = history.partition_point(|r| r.t <= at + slack);
    let window = if lo < hi {
        &history[lo..hi]
    } else {
        // nothing sampled inside a short window: the latest record still holds
        &history[hi.saturating_sub(1)..hi]
    };

    for r in window {
        let (t, f) = if policy.use_measured { (r.t_meas, r.f_meas) } else { (r.t_true, r.f_true) };
        if !((t - setpoints.t_set).abs() <= policy.tol_t) {
            return CaptureEvent::new(at, CaptureReason::TempOutOfTolerance);
        }
        if !((f - setpoints.f_set).abs() <= policy.tol_f) {
            return CaptureEvent::new(at, CaptureReason::Co2OutOfTolerance);
        }
    }
    CaptureEvent::new(at, CaptureReason::Ok)
}

/// Capture instants `k·capture_interval`, k = 1, 2, … up to the end of the telemetry.
pub fn schedule_instants(end: f64, capture_interval: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 1u64;
    loop {
        let at = k as f64 * capture_interval;
        if at > end + eps(end) {
            break out;
        }
        out.push(at);
        k += 1;
    }
}

/// Applies [`gate`] at every scheduled instant within the run.
pub fn schedule_captures(telemetry: &[TelemetryRecord], policy: &GatePolicy, setpoints: Setpoints) -> Result<Vec<CaptureEvent>> {
    let Some(last) = telemetry.last() else {
        return Err(Error::DegenerateInput("telemetry is empty".into()));
    };
    policy.validate()?;
    check_sorted(telemetry)?;
    Ok(schedule_instants(last.t, policy.capture_interval)
        .into_iter()
        .map(|at| gate_sorted(telemetry, policy, setpoints, at))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SP: Setpoints = Setpoints { t_set: 37.0, f_set: 0.05 };

    fn rec(t: f64, t_true: f64, f_true: f64) -> TelemetryRecord {
        TelemetryRecord {
            t,
            t_true,
            t_meas: t_true,
            f_true,
            f_meas: f_true,
            heater: false,
            valve: false,
        }
    }

    fn steady(duration: f64, dt: f64) -> Vec<TelemetryRecord> {
        let n = (duration / dt).round() as usize;
        (1..=n).map(|k| rec(k as f64 * dt, 37.0, 0.05)).collect()
    }

    #[test]
    fn all_at_setpoint_is_permitted() {
        let h = steady(100.0, 0.5);
        let e = gate(&h, &GatePolicy::default(), SP, 90.0).unwrap();
        assert!(e.permitted);
        assert_eq!(e.reason, CaptureReason::Ok);
    }

    #[test]
    fn temperature_violation_in_window() {
        let mut h = steady(100.0, 0.5);
        let p = GatePolicy::default();
        h[150].t_true = 37.0 + 2.0 * p.tol_t;
        h[160].f_true = 0.2;
        let e = gate(&h, &p, SP, 90.0).unwrap();
        assert!(!e.permitted);
        assert_eq!(e.reason, CaptureReason::TempOutOfTolerance);
        // outside the window it does not matter
        assert!(gate(&h, &p, SP, 40.0).unwrap().permitted);
    }

    #[test]
    fn co2_violation_in_window() {
        let mut h = steady(100.0, 0.5);
        h[170].f_true = 0.06;
        let e = gate(&h, &GatePolicy::default(), SP, 90.0).unwrap();
        assert_eq!(e.reason, CaptureReason::Co2OutOfTolerance);
    }

    #[test]
    fn short_history_is_insufficient() {
        let h = steady(30.0, 1.0);
        let p = GatePolicy { hold: 60.0, ..Default::default() };
        assert_eq!(gate(&h, &p, SP, 30.0).unwrap().reason, CaptureReason::InsufficientHistory);
        assert_eq!(gate(&[], &p, SP, 30.0).unwrap().reason, CaptureReason::InsufficientHistory);
        // asking beyond the end is not covered either
        let p = GatePolicy { hold: 5.0, ..Default::default() };
        assert_eq!(gate(&h, &p, SP, 31.0).unwrap().reason, CaptureReason::InsufficientHistory);
    }

    #[test]
    fn measured_values_when_configured() {
        let mut h = steady(100.0, 1.0);
        h[80].t_meas = 40.0;
        let p = GatePolicy::default();
        assert!(gate(&h, &p, SP, 90.0).unwrap().permitted);
        let p = GatePolicy { use_measured: true, ..p };
        assert_eq!(gate(&h, &p, SP, 90.0).unwrap().reason, CaptureReason::TempOutOfTolerance);
    }

    #[test]
    fn zero_hold_uses_latest_record() {
        let mut h = steady(10.0, 1.0);
        h[4].t_true = 39.0; // t = 5
        let p = GatePolicy { hold: 0.0, ..Default::default() };
        assert!(!gate(&h, &p, SP, 5.5).unwrap().permitted);
        assert!(gate(&h, &p, SP, 6.0).unwrap().permitted);
    }

    #[test]
    fn unsorted_history_is_an_error() {
        let mut h = steady(10.0, 1.0);
        h.swap(2, 3);
        assert!(matches!(gate(&h, &GatePolicy::default(), SP, 9.0), Err(Error::UnsortedHistory(3))));
    }

    #[test]
    fn schedule_short_run_is_empty() {
        let h = steady(100.0, 0.1);
        assert!(schedule_captures(&h, &GatePolicy::default(), SP).unwrap().is_empty());
        assert!(schedule_captures(&[], &GatePolicy::default(), SP).is_err());
    }

    #[test]
    fn schedule_steady_run() {
        let h = steady(300.0, 0.01);
        let p = GatePolicy { capture_interval: 60.0, ..Default::default() };
        let ev = schedule_captures(&h, &p, SP).unwrap();
        assert_eq!(ev.len(), 5);
        assert!(ev.iter().all(|e| e.permitted));
        assert!(ev.windows(2).all(|w| w[0].time < w[1].time));
    }

    #[test]
    fn schedule_after_settling() {
        // out of tolerance until 100 s, then steady
        let dt = 0.5;
        let h: Vec<_> = (1..=1200)
            .map(|k| {
                let t = k as f64 * dt;
                rec(t, if t < 100.0 { 30.0 } else { 37.0 }, 0.05)
            })
            .collect();
        let p = GatePolicy { capture_interval: 10.0, hold: 30.0, ..Default::default() };
        for e in schedule_captures(&h, &p, SP).unwrap() {
            if e.time >= 130.0 {
                assert!(e.permitted, "{e:?}");
            } else {
                assert!(!e.permitted, "{e:?}");
            }
        }
    }

    proptest! {
        #[test]
        fn tightening_never_permits_more(
            temps in proptest::collection::vec(35.0..39.0f64, 20..80),
            tol_t in 0.1..2.0f64, shrink in 0.1..1.0f64, hold in 0.0..20.0f64, extra in 0.0..20.0f64,
        ) {
            let h: Vec<_> = temps.iter().enumerate().map(|(i, &t)| rec(i as f64, t, 0.05)).collect();
            let loose = GatePolicy { tol_t, hold, capture_interval: 5.0, ..Default::default() };
            let tight = GatePolicy { tol_t: tol_t * shrink, hold: hold + extra, ..loose };
            let a = schedule_captures(&h, &loose, SP).unwrap();
            let b = schedule_captures(&h, &tight, SP).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!(!y.permitted || x.permitted);
                prop_assert_eq!(*x, gate(&h, &loose, SP, x.time).unwrap());
            }
        }
    }
}
