//! Lumped models of the chamber: a first-order thermal lag driven by ambient
//! air and a heating pad, and a single well-mixed CO₂ compartment fed through
//! a solenoid-switched orifice.
//!
//! Both models are linear with piecewise-constant inputs, so each step is the
//! exact solution over `dt` rather than an integrator approximation.

use serde::{Deserialize, Serialize};

use crate::error::{Checker, Error, Result, Violation};

/// Air and heater constants of the chamber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermalParams {
    /// Air density, kg/m³.
    pub rho: f64,
    /// Chamber air volume, m³.
    pub volume: f64,
    /// Specific heat, J/(kg·K).
    pub cp: f64,
    /// Convective heat transfer coefficient, W/(m²·K).
    pub h: f64,
    /// Cross section perpendicular to heat flow, m².
    pub area: f64,
    /// Ambient temperature, °C.
    pub t_ambient: f64,
    /// Heater input while on, W.
    pub heater_power: f64,
}

impl Default for ThermalParams {
    /// Air between 293 K and 303 K in the 0.65 L chamber, 23 °C room, 1.5 W pad.
    fn default() -> Self {
        Self {
            rho: 1.184,
            volume: 0.00065,
            cp: 1007.0,
            h: 10.0,
            area: 0.0036,
            t_ambient: 23.0,
            heater_power: 1.5,
        }
    }
}

impl ThermalParams {
    pub fn violations(&self) -> Vec<Violation> {
        let mut c = Checker::default();
        c.positive("rho", self.rho);
        c.positive("volume", self.volume);
        c.positive("cp", self.cp);
        c.positive("h", self.h);
        c.positive("area", self.area);
        c.non_negative("heater_power", self.heater_power);
        c.temperature("t_ambient", self.t_ambient);
        if c.violations.is_empty() {
            let tau = self.tau_unchecked();
            c.require(
                tau.is_finite() && tau > 0.0,
                "volume",
                format!("derived time constant {tau} s is not finite and positive"),
            );
        }
        c.finish()
    }

    pub fn validate(&self) -> Result<()> {
        Error::from_violations(self.violations())
    }

    /// Air mass, kg.
    pub fn mass(&self) -> f64 {
        self.rho * self.volume
    }

    /// Overall conductance to ambient, W/K.
    pub fn conductance(&self) -> f64 {
        self.h * self.area
    }

    pub(crate) fn tau_unchecked(&self) -> f64 {
        self.mass() * self.cp / self.conductance()
    }

    pub(crate) fn forcing_unchecked(&self, heater_on: bool) -> f64 {
        if heater_on {
            self.t_ambient + self.heater_power / self.conductance()
        } else {
            self.t_ambient
        }
    }
}

/// Gas-side constants of the chamber and CO₂ supply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GasParams {
    /// Chamber air volume, m³.
    pub volume: f64,
    /// Inlet orifice diameter, m.
    pub orifice_diameter: f64,
    /// Gas speed through the orifice while the valve is open, m/s.
    pub injection_velocity: f64,
    /// CO₂ fraction of room air.
    pub f_ambient: f64,
    /// Relaxation rate toward the ambient fraction, 1/s.
    pub leak_rate: f64,
}

impl Default for GasParams {
    fn default() -> Self {
        Self {
            volume: 0.00065,
            orifice_diameter: 0.003,
            injection_velocity: 10.0,
            f_ambient: 0.0004,
            leak_rate: 0.001,
        }
    }
}

impl GasParams {
    pub fn violations(&self) -> Vec<Violation> {
        let mut c = Checker::default();
        c.positive("volume", self.volume);
        c.positive("orifice_diameter", self.orifice_diameter);
        c.positive("injection_velocity", self.injection_velocity);
        c.non_negative("leak_rate", self.leak_rate);
        c.require(
            (0.0..1.0).contains(&self.f_ambient),
            "f_ambient",
            format!("must lie in [0, 1) (got {})", self.f_ambient),
        );
        c.finish()
    }

    pub fn validate(&self) -> Result<()> {
        Error::from_violations(self.violations())
    }

    pub(crate) fn flow_unchecked(&self) -> f64 {
        let r = 0.5 * self.orifice_diameter;
        std::f64::consts::PI * r * r * self.injection_velocity
    }
}

/// τ = ρ·V·c_p / (h·A), in seconds.
pub fn time_constant(p: &ThermalParams) -> Result<f64> {
    p.validate()?;
    Ok(p.tau_unchecked())
}

/// Temperature the chamber relaxes toward under the given heater state, °C.
pub fn effective_forcing(p: &ThermalParams, heater_on: bool) -> Result<f64> {
    p.validate()?;
    Ok(p.forcing_unchecked(heater_on))
}

/// Advances the chamber temperature by `dt` seconds with the heater held fixed.
pub fn thermal_step(t_chamber: f64, p: &ThermalParams, heater_on: bool, dt: f64) -> Result<f64> {
    p.validate()?;
    check_dt(dt)?;
    if !t_chamber.is_finite() {
        return Err(Error::invalid("t_chamber", "must be finite"));
    }
    Ok(relax(
        t_chamber,
        p.forcing_unchecked(heater_on),
        dt / p.tau_unchecked(),
    ))
}

/// Open-loop response of 1/(τs+1) to a step of `delta_x` kelvin, `t` seconds after the step.
pub fn step_response(p: &ThermalParams, delta_x: f64, t: f64) -> Result<f64> {
    p.validate()?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid("t", format!("must be finite and >= 0 (got {t})")));
    }
    Ok(-delta_x * (-t / p.tau_unchecked()).exp_m1())
}

/// Volumetric CO₂ flow through the orifice while the valve is open, m³/s.
pub fn orifice_flow(g: &GasParams) -> Result<f64> {
    g.validate()?;
    Ok(g.flow_unchecked())
}

/// Advances the chamber CO₂ fraction by `dt` seconds with the valve held fixed.
///
/// Solves dF/dt = (Q/V)(1 − F)·u − k(F − F_amb) exactly; injected gas is pure CO₂
/// and the excess volume is vented.
pub fn gas_step(f: f64, g: &GasParams, valve_open: bool, dt: f64) -> Result<f64> {
    g.validate()?;
    check_dt(dt)?;
    check_fraction(f)?;
    Ok(gas_step_with_flow(f, g, g.flow_unchecked(), valve_open, dt))
}

/// Same as [`gas_step`] with an explicit supply flow, for derated supplies.
/// Inputs are assumed validated.
pub(crate) fn gas_step_with_flow(f: f64, g: &GasParams, flow: f64, valve_open: bool, dt: f64) -> f64 {
    let inflow = if valve_open { flow / g.volume } else { 0.0 };
    let rate = inflow + g.leak_rate;
    if rate <= 0.0 {
        return f;
    }
    let equilibrium = (inflow + g.leak_rate * g.f_ambient) / rate;
    relax(f, equilibrium, rate * dt).clamp(0.0, 1.0)
}

/// x' = target + (x − target)·e^(−n). Never crosses `target`; n = 0 returns x unchanged.
#[inline]
pub(crate) fn relax(x: f64, target: f64, n: f64) -> f64 {
    let decay = (-n).exp();
    if decay == 1.0 {
        x
    } else {
        target + (x - target) * decay
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() && dt >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("dt", format!("must be finite and >= 0 (got {dt})")))
    }
}

fn check_fraction(f: f64) -> Result<()> {
    if (0.0..=1.0).contains(&f) {
        Ok(())
    } else {
        Err(Error::invalid("f", format!("fraction must lie in [0, 1] (got {f})")))
    }
}
