use serde::Serialize;

use super::{Disturbances, SimConfig};
use crate::error::{Error, Result};
use crate::gating::CaptureEvent;
use crate::telemetry::TelemetryRecord;

/// Fraction of the run, counted from the end, used for steady-state statistics.
pub const STEADY_STATE_FRACTION: f64 = 1.0 / 3.0;

/// Run summary. Steady-state fields cover the final third of the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryMetrics {
    /// Earliest time after which the true temperature stays within `gate.tol_t` of `t_set`.
    pub t_settle: Option<f64>,
    /// max(0, max T_true − t_set), °C.
    pub overshoot: f64,
    pub t_duty: f64,
    pub f_duty: f64,
    /// Peak-to-peak true temperature, °C.
    pub t_ripple: f64,
    /// Peak-to-peak true CO₂ fraction.
    pub f_ripple: f64,
    /// Number of off→on switches over the whole run.
    pub heater_cycles: u64,
    pub valve_cycles: u64,
    /// J
    pub heater_energy: f64,
    /// m³
    pub co2_consumed: f64,
    pub captures_permitted: u64,
    pub captures_denied: u64,
}

impl SummaryMetrics {
    pub fn compute(cfg: &SimConfig, telemetry: &[TelemetryRecord], captures: &[CaptureEvent]) -> Result<Self> {
        if telemetry.is_empty() {
            return Err(Error::DegenerateInput("telemetry is empty".into()));
        }
        let dt = cfg.sim.dt;
        let end = telemetry.last().map(|r| r.t).unwrap_or(0.0);
        let window = (end * (1.0 - STEADY_STATE_FRACTION), end);
        let steady: Vec<&TelemetryRecord> = telemetry.iter().filter(|r| r.t - dt >= window.0 - 1e-9).collect();

        let temps: Vec<(f64, f64)> = telemetry.iter().map(|r| (r.t, r.t_true)).collect();
        let t_settle = settling_time(&temps, cfg.control.t_set, cfg.gate.tol_t)?;
        let max_t = telemetry.iter().map(|r| r.t_true).fold(f64::NEG_INFINITY, f64::max);

        let heater: Vec<(f64, bool)> = telemetry.iter().map(|r| (r.t - dt, r.heater)).collect();
        let valve: Vec<(f64, bool)> = telemetry.iter().map(|r| (r.t - dt, r.valve)).collect();

        let (heater_energy, co2_consumed) = integrate_actuation(telemetry, cfg);
        let captures_permitted = captures.iter().filter(|c| c.permitted).count() as u64;

        Ok(Self {
            t_settle,
            overshoot: (max_t - cfg.control.t_set).max(0.0),
            t_duty: duty_cycle(&heater, window)?,
            f_duty: duty_cycle(&valve, window)?,
            t_ripple: peak_to_peak(steady.iter().map(|r| r.t_true)),
            f_ripple: peak_to_peak(steady.iter().map(|r| r.f_true)),
            heater_cycles: rising_edges(telemetry.iter().map(|r| r.heater)),
            valve_cycles: rising_edges(telemetry.iter().map(|r| r.valve)),
            heater_energy,
            co2_consumed,
            captures_permitted,
            captures_denied: captures.len() as u64 - captures_permitted,
        })
    }
}

fn peak_to_peak(xs: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

fn rising_edges(states: impl Iterator<Item = bool>) -> u64 {
    let mut prev = false;
    let mut n = 0;
    for s in states {
        if s && !prev {
            n += 1;
        }
        prev = s;
    }
    n
}

/// Earliest sample time from which every later sample lies within `band` of `target`.
pub fn settling_time(series: &[(f64, f64)], target: f64, band: f64) -> Result<Option<f64>> {
    if series.is_empty() {
        return Err(Error::DegenerateInput("series is empty".into()));
    }
    if let Some(i) = series.windows(2).position(|w| !(w[0].0 <= w[1].0)) {
        return Err(Error::UnsortedHistory(i + 1));
    }
    let outside = |y: f64| !((y - target).abs() <= band);
    Ok(match series.iter().rposition(|&(_, y)| outside(y)) {
        None => Some(series[0].0),
        Some(i) if i + 1 == series.len() => None,
        Some(i) => Some(series[i + 1].0),
    })
}

/// Time-weighted on-fraction over `window`; each sample holds until the next one,
/// the last until the window end.
pub fn duty_cycle(series: &[(f64, bool)], window: (f64, f64)) -> Result<f64> {
    let (w0, w1) = window;
    if !(w1 > w0) {
        return Err(Error::DegenerateInput(format!("empty window [{w0}, {w1}]")));
    }
    let mut on = 0.0;
    let mut covered = 0.0;
    for (i, &(t, state)) in series.iter().enumerate() {
        let next = match series.get(i + 1) {
            Some(s) if s.0 < t => return Err(Error::UnsortedHistory(i + 1)),
            Some(s) => s.0,
            None => w1,
        };
        let span = (next.min(w1) - t.max(w0)).max(0.0);
        covered += span;
        if state {
            on += span;
        }
    }
    if covered <= 0.0 {
        return Err(Error::DegenerateInput("series does not overlap the window".into()));
    }
    Ok((on / covered).clamp(0.0, 1.0))
}

/// Heater energy (J) and CO₂ volume drawn from the supply (m³) over a run.
///
/// Record `i` is taken as plant step `i`; supply derating from events is applied.
pub fn integrate_actuation(telemetry: &[TelemetryRecord], cfg: &SimConfig) -> (f64, f64) {
    let dt = cfg.sim.dt;
    let disturbances = Disturbances::new(cfg);
    let mut energy = 0.0;
    let mut volume = 0.0;
    for (k, r) in telemetry.iter().enumerate() {
        if r.heater {
            energy += cfg.thermal.heater_power * dt;
        }
        if r.valve {
            volume += disturbances.at(k as f64 * dt).flow * dt;
        }
    }
    (energy, volume)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t: f64, heater: bool, valve: bool) -> TelemetryRecord {
        TelemetryRecord {
            t,
            t_true: 37.0,
            t_meas: 37.0,
            f_true: 0.05,
            f_meas: 0.05,
            heater,
            valve,
        }
    }

    #[test]
    fn settling_constant_series() {
        let s: Vec<_> = (0..100).map(|i| (i as f64, 37.0)).collect();
        assert_eq!(settling_time(&s, 37.0, 0.5).unwrap(), Some(0.0));
    }

    #[test]
    fn settling_exponential_rise() {
        let tau: f64 = 21.53;
        let dt = 0.1;
        let s: Vec<_> = (0..3000)
            .map(|i| {
                let t = i as f64 * dt;
                (t, 37.0 - 14.0 * (-t / tau).exp())
            })
            .collect();
        let ts = settling_time(&s, 37.0, 0.5).unwrap().unwrap();
        let expected = tau * (14.0f64 / 0.5).ln();
        assert!((expected - 71.74).abs() < 0.01);
        assert!((ts - expected).abs() <= dt, "{ts}");
    }

    #[test]
    fn settling_ending_outside_is_none() {
        let s = [(0.0, 37.0), (1.0, 37.0), (2.0, 40.0)];
        assert_eq!(settling_time(&s, 37.0, 0.5).unwrap(), None);
        assert!(settling_time(&[], 37.0, 0.5).is_err());
    }

    #[test]
    fn duty_extremes_and_square_wave() {
        let on: Vec<_> = (0..10).map(|i| (i as f64, true)).collect();
        let off: Vec<_> = (0..10).map(|i| (i as f64, false)).collect();
        assert_eq!(duty_cycle(&on, (0.0, 10.0)).unwrap(), 1.0);
        assert_eq!(duty_cycle(&off, (0.0, 10.0)).unwrap(), 0.0);
        let square: Vec<_> = (0..100).map(|i| (i as f64 * 0.5, (i / 3) % 2 == 0)).collect();
        assert!((duty_cycle(&square, (0.0, 48.0)).unwrap() - 0.5).abs() < 1e-12);
        assert!(duty_cycle(&on, (5.0, 5.0)).is_err());
    }

    #[test]
    fn actuation_integrals() {
        let cfg = SimConfig::default();
        let dt = cfg.sim.dt;
        let never: Vec<_> = (1..=1000).map(|k| record(k as f64 * dt, false, false)).collect();
        assert_eq!(integrate_actuation(&never, &cfg), (0.0, 0.0));

        let heater: Vec<_> = (1..=10_000).map(|k| record(k as f64 * dt, true, false)).collect();
        let (e, _) = integrate_actuation(&heater, &cfg);
        assert!((e - 150.0).abs() < 1e-9, "{e}");

        let valve: Vec<_> = (1..=100).map(|k| record(k as f64 * dt, false, true)).collect();
        let (_, v) = integrate_actuation(&valve, &cfg);
        assert!((v - 7.0686e-5).abs() < 1e-9, "{v}");
    }

    #[test]
    fn edges_count_switch_ons() {
        let s = [false, true, true, false, true, false, false, true];
        assert_eq!(rising_edges(s.into_iter()), 3);
        assert_eq!(rising_edges([true].into_iter()), 1);
    }
}
