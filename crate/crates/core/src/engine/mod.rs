//! Fixed-step closed-loop simulation of the incubator.
//!
//! Each plant step runs, in order: apply disturbances active at the step
//! start, sample any sensor that is due and update its controller, advance the
//! thermal and gas plants with the resulting actuator states, then record.

mod metrics;
mod sweep;

pub use metrics::{duty_cycle, integrate_actuation, settling_time, SummaryMetrics};
pub use sweep::{set_parameter, sweep, sweep_with, SweepRow};

use serde::{Deserialize, Serialize};

use crate::control::{self, ActuatorState, ControlConfig};
use crate::error::{Checker, Error, Result, Violation};
use crate::exec::Execution;
use crate::gating::{self, CaptureEvent, GatePolicy, Setpoints};
use crate::plant::{self, GasParams, ThermalParams};
use crate::sensing::{self, SensorModel};
use crate::telemetry::TelemetryRecord;

/// Relative slack when checking that periods are whole multiples of `dt`.
const GRID_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSettings {
    /// Plant step, s.
    pub dt: f64,
    pub duration: f64,
    pub seed: u64,
    /// Initial chamber temperature, °C.
    pub initial_t: f64,
    /// Initial chamber CO₂ fraction.
    pub initial_f: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            dt: 0.01,
            duration: 600.0,
            seed: 1,
            initial_t: 23.0,
            initial_f: 0.0004,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    /// Room temperature jumps to a new value and stays there.
    AmbientChange { new_t_ambient: f64 },
    /// Door opened for `duration` seconds: convection scaled by `h_multiplier`
    /// and the gas relaxes toward room air at an extra `gas_mix_rate`.
    DoorOpen { duration: f64, h_multiplier: f64, gas_mix_rate: f64 },
    /// Supply pressure loss: open-valve flow scaled by `flow_multiplier` from here on.
    SupplyDrop { flow_multiplier: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "EventRepr", into = "EventRepr")]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum EventRepr {
    AmbientChange { time: f64, new_t_ambient: f64 },
    DoorOpen { time: f64, duration: f64, h_multiplier: f64, gas_mix_rate: f64 },
    SupplyDrop { time: f64, flow_multiplier: f64 },
}

impl From<EventRepr> for Event {
    fn from(r: EventRepr) -> Self {
        match r {
            EventRepr::AmbientChange { time, new_t_ambient } => Event {
                time,
                kind: EventKind::AmbientChange { new_t_ambient },
            },
            EventRepr::DoorOpen { time, duration, h_multiplier, gas_mix_rate } => Event {
                time,
                kind: EventKind::DoorOpen { duration, h_multiplier, gas_mix_rate },
            },
            EventRepr::SupplyDrop { time, flow_multiplier } => Event {
                time,
                kind: EventKind::SupplyDrop { flow_multiplier },
            },
        }
    }
}

impl From<Event> for EventRepr {
    fn from(e: Event) -> Self {
        let time = e.time;
        match e.kind {
            EventKind::AmbientChange { new_t_ambient } => EventRepr::AmbientChange { time, new_t_ambient },
            EventKind::DoorOpen { duration, h_multiplier, gas_mix_rate } => EventRepr::DoorOpen {
                time,
                duration,
                h_multiplier,
                gas_mix_rate,
            },
            EventKind::SupplyDrop { flow_multiplier } => EventRepr::SupplyDrop { time, flow_multiplier },
        }
    }
}

impl Event {
    fn violations(&self) -> Vec<Violation> {
        let mut c = Checker::default();
        c.finite("time", self.time);
        match self.kind {
            EventKind::AmbientChange { new_t_ambient } => c.temperature("new_t_ambient", new_t_ambient),
            EventKind::DoorOpen { duration, h_multiplier, gas_mix_rate } => {
                c.non_negative("duration", duration);
                c.require(
                    h_multiplier.is_finite() && h_multiplier > 1.0,
                    "h_multiplier",
                    format!("must be finite and > 1 (got {h_multiplier})"),
                );
                c.non_negative("gas_mix_rate", gas_mix_rate);
            }
            EventKind::SupplyDrop { flow_multiplier } => c.require(
                (0.0..=1.0).contains(&flow_multiplier),
                "flow_multiplier",
                format!("must lie in [0, 1] (got {flow_multiplier})"),
            ),
        }
        c.finish()
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "crate::config::RawConfig")]
pub struct SimConfig {
    pub thermal: ThermalParams,
    pub gas: GasParams,
    pub control: ControlConfig,
    pub sensor_temp: SensorModel,
    pub sensor_co2: SensorModel,
    pub gate: GatePolicy,
    pub sim: SimSettings,
    pub events: Vec<Event>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            thermal: ThermalParams::default(),
            gas: GasParams::default(),
            control: ControlConfig::default(),
            sensor_temp: SensorModel::temperature(),
            sensor_co2: SensorModel::co2(),
            gate: GatePolicy::default(),
            sim: SimSettings::default(),
            events: Vec::new(),
        }
    }
}

impl SimConfig {
    /// Default chamber with all sensors replaced by per-step ideal ones.
    pub fn with_ideal_sensors(mut self) -> Self {
        self.sensor_temp = SensorModel::ideal(self.sim.dt);
        self.sensor_co2 = SensorModel::ideal(self.sim.dt);
        self
    }

    pub fn setpoints(&self) -> Setpoints {
        Setpoints {
            t_set: self.control.t_set,
            f_set: self.control.f_set,
        }
    }

    /// Number of plant steps covering `duration`.
    pub fn steps(&self) -> usize {
        (self.sim.duration / self.sim.dt - GRID_TOL).ceil().max(1.0) as usize
    }

    pub fn end_time(&self) -> f64 {
        self.steps() as f64 * self.sim.dt
    }

    /// All violations, with dotted keys.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut section = |name: &str, v: Vec<Violation>| out.extend(v.into_iter().map(|v| v.prefixed(name)));
        section("thermal", self.thermal.violations());
        section("gas", self.gas.violations());
        section("control", self.control.violations());
        section("sensor_temp", self.sensor_temp.violations());
        section("sensor_co2", self.sensor_co2.violations());
        section("gate", self.gate.violations());

        let s = &self.sim;
        let mut c = Checker::default();
        c.positive("dt", s.dt);
        c.positive("duration", s.duration);
        c.temperature("initial_t", s.initial_t);
        c.require(
            (0.0..=1.0).contains(&s.initial_f),
            "initial_f",
            format!("must lie in [0, 1] (got {})", s.initial_f),
        );
        section("sim", c.finish());

        if s.dt.is_finite() && s.dt > 0.0 {
            for (name, m) in [("sensor_temp", &self.sensor_temp), ("sensor_co2", &self.sensor_co2)] {
                if m.period.is_finite() && m.period > 0.0 && period_steps(m.period, s.dt).is_none() {
                    out.push(Violation::new(
                        format!("{name}.period"),
                        format!("must be a whole multiple of sim.dt = {} (got {})", s.dt, m.period),
                    ));
                }
            }
        }

        for (i, e) in self.events.iter().enumerate() {
            let key = format!("events.{i}");
            out.extend(e.violations().into_iter().map(|v| v.prefixed(&key)));
            if e.time.is_finite() && !(0.0..=s.duration).contains(&e.time) {
                out.push(Violation::new(
                    format!("{key}.time"),
                    format!("must lie within [0, {}] (got {})", s.duration, e.time),
                ));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v))
        }
    }
}

fn period_steps(period: f64, dt: f64) -> Option<usize> {
    let ratio = period / dt;
    let n = ratio.round();
    (n >= 1.0 && (ratio - n).abs() <= GRID_TOL * ratio.max(1.0)).then_some(n as usize)
}

/// Forces actuators regardless of the controllers, for open-loop runs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ActuatorOverride {
    pub heater: Option<bool>,
    pub valve: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub telemetry: Vec<TelemetryRecord>,
    pub captures: Vec<CaptureEvent>,
    pub summary: SummaryMetrics,
}

/// Plant parameters in force during one step, after disturbances.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StepParams {
    pub thermal: ThermalParams,
    pub gas: GasParams,
    /// Open-valve flow, m³/s.
    pub flow: f64,
}

pub(crate) struct Disturbances {
    events: Vec<Event>,
    base_thermal: ThermalParams,
    base_gas: GasParams,
    base_flow: f64,
}

impl Disturbances {
    pub(crate) fn new(cfg: &SimConfig) -> Self {
        let mut events = cfg.events.clone();
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        Self {
            events,
            base_thermal: cfg.thermal,
            base_gas: cfg.gas,
            base_flow: cfg.gas.flow_unchecked(),
        }
    }

    pub(crate) fn at(&self, t0: f64) -> StepParams {
        let mut thermal = self.base_thermal;
        let mut gas = self.base_gas;
        let mut flow_multiplier = 1.0;
        let slack = 1e-9 * t0.abs().max(1.0);
        for e in self.events.iter().take_while(|e| e.time <= t0 + slack) {
            match e.kind {
                EventKind::AmbientChange { new_t_ambient } => thermal.t_ambient = new_t_ambient,
                EventKind::DoorOpen { duration, h_multiplier, gas_mix_rate } => {
                    if t0 + slack < e.time + duration {
                        thermal.h *= h_multiplier;
                        gas.leak_rate += gas_mix_rate;
                    }
                }
                EventKind::SupplyDrop { flow_multiplier: m } => flow_multiplier = m,
            }
        }
        StepParams {
            thermal,
            gas,
            flow: self.base_flow * flow_multiplier,
        }
    }
}

/// Runs the closed loop.
pub fn run(cfg: &SimConfig) -> Result<RunOutput> {
    run_with(cfg, ActuatorOverride::default())
}

pub fn run_with(cfg: &SimConfig, forced: ActuatorOverride) -> Result<RunOutput> {
    if let Some(e) = cfg
        .events
        .iter()
        .find(|e| !(0.0..=cfg.sim.duration).contains(&e.time))
    {
        return Err(Error::EventOutsideRun {
            time: e.time,
            duration: cfg.sim.duration,
        });
    }
    cfg.validate()?;

    let dt = cfg.sim.dt;
    let steps = cfg.steps();
    let t_period = period_steps(cfg.sensor_temp.period, dt).expect("validated");
    let f_period = period_steps(cfg.sensor_co2.period, dt).expect("validated");
    let disturbances = Disturbances::new(cfg);
    let mut rng = sensing::seeded_rng(cfg.sim.seed);

    let mut t_true = cfg.sim.initial_t;
    let mut f_true = cfg.sim.initial_f;
    let mut t_meas = f64::NAN;
    let mut f_meas = f64::NAN;
    let mut heater = ActuatorState::default();
    let mut valve = ActuatorState::default();
    let mut telemetry = Vec::with_capacity(steps);

    for k in 0..steps {
        let t0 = k as f64 * dt;
        let p = disturbances.at(t0);

        if k % t_period == 0 {
            t_meas = sensing::sample(t_true, &cfg.sensor_temp, &mut rng);
            heater = control::heater_command(t_meas, &cfg.control, heater, t0)?;
        }
        if k % f_period == 0 {
            f_meas = sensing::sample(f_true, &cfg.sensor_co2, &mut rng);
            valve = control::valve_command(f_meas, &cfg.control, valve, t0)?;
        }
        let heater_on = forced.heater.unwrap_or(heater.on);
        let valve_open = forced.valve.unwrap_or(valve.on);

        t_true = plant::thermal_step(t_true, &p.thermal, heater_on, dt)?;
        f_true = plant::gas_step_with_flow(f_true, &p.gas, p.flow, valve_open, dt);

        telemetry.push(TelemetryRecord {
            t: (k + 1) as f64 * dt,
            t_true,
            t_meas,
            f_true,
            f_meas,
            heater: heater_on,
            valve: valve_open,
        });
    }

    let captures = gating::schedule_captures(&telemetry, &cfg.gate, cfg.setpoints())?;
    let summary = SummaryMetrics::compute(cfg, &telemetry, &captures)?;
    Ok(RunOutput {
        telemetry,
        captures,
        summary,
    })
}

/// Runs independent configurations, in parallel when available.
pub fn run_batch(configs: &[SimConfig], exec: Execution) -> Vec<Result<RunOutput>> {
    exec.map(configs, run)
}

/// One row of an open-loop step test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRow {
    pub t: f64,
    pub simulated: f64,
    pub analytic: f64,
}

impl StepRow {
    pub fn abs_error(&self) -> f64 {
        (self.simulated - self.analytic).abs()
    }
}

#[derive(Debug, Clone)]
pub struct StepTest {
    pub rows: Vec<StepRow>,
    pub tau: f64,
    /// Response evaluated exactly at t = τ.
    pub at_tau: StepRow,
    pub max_abs_error: f64,
}

/// Steps the thermal plant from rest under a forcing step of `delta` kelvin and
/// compares every step with the closed-form first-order response.
pub fn step_test(p: &ThermalParams, delta: f64, duration: f64, dt: f64) -> Result<StepTest> {
    p.validate()?;
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::invalid("duration", format!("must be finite and >= 0 (got {duration})")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be finite and > 0 (got {dt})")));
    }
    if !delta.is_finite() {
        return Err(Error::invalid("delta", "must be finite"));
    }
    // deviation variables: rest at 0, forcing raised by delta, no heater
    let shifted = ThermalParams {
        t_ambient: delta,
        heater_power: 0.0,
        ..*p
    };
    let tau = p.tau_unchecked();
    let steps = (duration / dt - GRID_TOL).ceil().max(0.0) as usize;

    let mut y = 0.0;
    let mut rows = Vec::with_capacity(steps + 1);
    rows.push(StepRow {
        t: 0.0,
        simulated: 0.0,
        analytic: plant::step_response(p, delta, 0.0)?,
    });
    for k in 1..=steps {
        y = thermal_step_shifted(y, &shifted, dt);
        let t = k as f64 * dt;
        rows.push(StepRow {
            t,
            simulated: y,
            analytic: plant::step_response(p, delta, t)?,
        });
    }

    let whole = (tau / dt).floor() as usize;
    let mut y_tau = 0.0;
    for _ in 0..whole {
        y_tau = thermal_step_shifted(y_tau, &shifted, dt);
    }
    y_tau = thermal_step_shifted(y_tau, &shifted, tau - whole as f64 * dt);
    let at_tau = StepRow {
        t: tau,
        simulated: y_tau,
        analytic: plant::step_response(p, delta, tau)?,
    };

    let max_abs_error = rows.iter().map(StepRow::abs_error).fold(0.0, f64::max);
    Ok(StepTest {
        rows,
        tau,
        at_tau,
        max_abs_error,
    })
}

fn thermal_step_shifted(y: f64, p: &ThermalParams, dt: f64) -> f64 {
    // temperatures here are deviations, so skip the absolute-zero check on t_ambient
    plant::relax(y, p.t_ambient, dt / p.tau_unchecked())
}
