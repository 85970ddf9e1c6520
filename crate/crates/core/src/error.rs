use std::fmt;

/// A single failed check against a configuration key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Dotted key, e.g. `thermal.volume`.
    pub key: String,
    pub message: String,
}

impl Violation {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn prefixed(mut self, section: &str) -> Self {
        self.key = format!("{section}.{}", self.key);
        self
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("invalid configuration:\n{}", format_violations(.0))]
    InvalidConfig(Vec<Violation>),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("time went backwards: now = {now} s precedes last switch at {last_switch} s")]
    NonMonotoneTime { now: f64, last_switch: f64 },

    #[error("telemetry history is not sorted by time at index {0}")]
    UnsortedHistory(usize),

    #[error("event at t = {time} s lies outside the run window [0, {duration}] s")]
    EventOutsideRun { time: f64, duration: f64 },

    #[error("unknown or non-numeric parameter path `{0}`")]
    UnknownParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| format!("  {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// Collapses a list of violations into an error, or `Ok` when empty.
    pub(crate) fn from_violations(v: Vec<Violation>) -> Result<()> {
        match v.len() {
            0 => Ok(()),
            1 => {
                let Violation { key, message } = v.into_iter().next().unwrap();
                Err(Error::InvalidParameter {
                    name: key,
                    reason: message,
                })
            }
            _ => Err(Error::InvalidConfig(v)),
        }
    }
}

/// Collects violations for one section of a parameter block.
#[derive(Default)]
pub(crate) struct Checker {
    pub(crate) violations: Vec<Violation>,
}

impl Checker {
    pub(crate) fn require(&mut self, ok: bool, key: &str, message: impl Into<String>) {
        if !ok {
            self.violations.push(Violation::new(key, message));
        }
    }

    pub(crate) fn positive(&mut self, key: &str, v: f64) {
        self.require(v.is_finite() && v > 0.0, key, format!("must be finite and > 0 (got {v})"));
    }

    pub(crate) fn non_negative(&mut self, key: &str, v: f64) {
        self.require(v.is_finite() && v >= 0.0, key, format!("must be finite and >= 0 (got {v})"));
    }

    pub(crate) fn finite(&mut self, key: &str, v: f64) {
        self.require(v.is_finite(), key, format!("must be finite (got {v})"));
    }

    pub(crate) fn temperature(&mut self, key: &str, v: f64) {
        self.require(
            v.is_finite() && v >= ABSOLUTE_ZERO_C,
            key,
            format!("must be a finite temperature >= {ABSOLUTE_ZERO_C} °C (got {v})"),
        );
    }

    pub(crate) fn finish(self) -> Vec<Violation> {
        self.violations
    }
}

pub const ABSOLUTE_ZERO_C: f64 = -273.15;
