//! On/off command logic for the heating pad and the CO₂ solenoid valve.
//!
//! Both actuators use the same law: switch on below `set − hyst`, switch off
//! above `set + hyst`, hold the previous state inside the band (ties included),
//! and refuse any switch until the current state has been held for its
//! minimum dwell.

use serde::{Deserialize, Serialize};

use crate::error::{Checker, Error, Result, Violation};

/// Slack for comparing elapsed time against a dwell, absorbing `k·dt` rounding.
const DWELL_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlConfig {
    /// Temperature setpoint, °C.
    pub t_set: f64,
    /// Temperature hysteresis half-width, °C.
    pub t_hyst: f64,
    /// CO₂ fraction setpoint.
    pub f_set: f64,
    /// CO₂ hysteresis half-width.
    pub f_hyst: f64,
    /// Shortest time an actuator stays on before it may switch off, s.
    pub min_dwell_on: f64,
    /// Shortest time an actuator stays off before it may switch on, s.
    pub min_dwell_off: f64,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            t_set: 37.0,
            t_hyst: 0.25,
            f_set: 0.05,
            f_hyst: 0.002,
            min_dwell_on: 0.02,
            min_dwell_off: 0.02,
        }
    }
}

impl ControlConfig {
    pub fn violations(&self) -> Vec<Violation> {
        let mut c = Checker::default();
        c.temperature("t_set", self.t_set);
        c.positive("t_hyst", self.t_hyst);
        c.finite("f_set", self.f_set);
        c.positive("f_hyst", self.f_hyst);
        c.require(
            self.f_set - self.f_hyst > 0.0,
            "f_set",
            format!("f_set - f_hyst must be > 0 (got {})", self.f_set - self.f_hyst),
        );
        c.require(
            self.f_set + self.f_hyst < 1.0,
            "f_set",
            format!("f_set + f_hyst must be < 1 (got {})", self.f_set + self.f_hyst),
        );
        c.non_negative("min_dwell_on", self.min_dwell_on);
        c.non_negative("min_dwell_off", self.min_dwell_off);
        c.finish()
    }

    pub fn validate(&self) -> Result<()> {
        Error::from_violations(self.violations())
    }

    pub fn temperature_band(&self) -> Band {
        Band {
            setpoint: self.t_set,
            half_width: self.t_hyst,
        }
    }

    pub fn co2_band(&self) -> Band {
        Band {
            setpoint: self.f_set,
            half_width: self.f_hyst,
        }
    }
}

/// Symmetric hysteresis band around a setpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub setpoint: f64,
    pub half_width: f64,
}

impl Band {
    pub fn lower(&self) -> f64 {
        self.setpoint - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.setpoint + self.half_width
    }

    /// State requested by the measurement alone, before dwell is considered.
    pub fn desired(&self, measured: f64, previous: bool) -> bool {
        if measured < self.lower() {
            true
        } else if measured > self.upper() {
            false
        } else {
            previous
        }
    }
}

/// Hysteresis memory and dwell timing of one actuator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorState {
    pub on: bool,
    /// Time of the last applied switch, s. `-inf` before the first one.
    pub last_switch_time: f64,
}

impl Default for ActuatorState {
    /// Off, with dwell already satisfied.
    fn default() -> Self {
        Self {
            on: false,
            last_switch_time: f64::NEG_INFINITY,
        }
    }
}

impl ActuatorState {
    pub fn held_for(&self, now: f64) -> f64 {
        now - self.last_switch_time
    }
}

/// One evaluation of the on/off law with minimum dwell.
pub fn command(
    measured: f64,
    band: Band,
    min_dwell_on: f64,
    min_dwell_off: f64,
    st: ActuatorState,
    now: f64,
) -> Result<ActuatorState> {
    if now.is_nan() || now < st.last_switch_time {
        return Err(Error::NonMonotoneTime {
            now,
            last_switch: st.last_switch_time,
        });
    }
    let desired = band.desired(measured, st.on);
    if desired == st.on {
        return Ok(st);
    }
    let dwell = if st.on { min_dwell_on } else { min_dwell_off };
    if st.held_for(now) + DWELL_EPS >= dwell {
        Ok(ActuatorState {
            on: desired,
            last_switch_time: now,
        })
    } else {
        Ok(st)
    }
}

/// Heating pad command from a held temperature measurement.
pub fn heater_command(t_meas: f64, cfg: &ControlConfig, st: ActuatorState, now: f64) -> Result<ActuatorState> {
    command(t_meas, cfg.temperature_band(), cfg.min_dwell_on, cfg.min_dwell_off, st, now)
}

/// Solenoid valve command from a held CO₂ measurement; `on` means open.
pub fn valve_command(f_meas: f64, cfg: &ControlConfig, st: ActuatorState, now: f64) -> Result<ActuatorState> {
    command(f_meas, cfg.co2_band(), cfg.min_dwell_on, cfg.min_dwell_off, st, now)
}
