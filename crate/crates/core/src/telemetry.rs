/// State of the chamber at the end of one plant step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelemetryRecord {
    /// End of the step, s.
    pub t: f64,
    pub t_true: f64,
    /// Last held temperature sample.
    pub t_meas: f64,
    pub f_true: f64,
    /// Last held CO₂ sample.
    pub f_meas: f64,
    /// Heater state applied during the step.
    pub heater: bool,
    /// Valve state applied during the step.
    pub valve: bool,
}
