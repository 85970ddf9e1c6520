//! CSV/JSON serialization of run artifacts.
//!
//! Numbers are written with 9 significant digits, `%.9g` style, always with a
//! `.` decimal point; flags are `0`/`1`.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use crate::engine::{SummaryMetrics, SweepRow};
use crate::gating::CaptureEvent;
use crate::telemetry::TelemetryRecord;

pub const TELEMETRY_HEADER: &str = "t,T_true,T_meas,F_true,F_meas,heater,valve";
pub const CAPTURES_HEADER: &str = "t,permitted,reason";
pub const SWEEP_COLUMNS: [&str; 13] = [
    "value",
    "t_settle",
    "overshoot",
    "t_duty",
    "f_duty",
    "t_ripple",
    "f_ripple",
    "heater_cycles",
    "valve_cycles",
    "heater_energy",
    "co2_consumed",
    "captures_permitted",
    "captures_denied",
];

/// Formats `v` with 9 significant digits, trimming trailing zeros.
pub fn sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn flag(b: bool) -> char {
    if b {
        '1'
    } else {
        '0'
    }
}

pub fn telemetry_csv(records: &[TelemetryRecord]) -> String {
    let mut s = String::with_capacity(64 * (records.len() + 1));
    s.push_str(TELEMETRY_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            sig9(r.t),
            sig9(r.t_true),
            sig9(r.t_meas),
            sig9(r.f_true),
            sig9(r.f_meas),
            flag(r.heater),
            flag(r.valve)
        );
    }
    s
}

pub fn captures_csv(events: &[CaptureEvent]) -> String {
    let mut s = String::from(CAPTURES_HEADER);
    s.push('\n');
    for e in events {
        let _ = writeln!(s, "{},{},{}", sig9(e.time), flag(e.permitted), e.reason.as_str());
    }
    s
}

pub fn summary_json(m: &SummaryMetrics) -> String {
    let mut s = serde_json::to_string_pretty(m).expect("metrics serialize");
    s.push('\n');
    s
}

/// Sweep table; a missing settling time is an empty field.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = SWEEP_COLUMNS.join(",");
    s.push('\n');
    for SweepRow { value, metrics: m } in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            sig9(*value),
            m.t_settle.map(sig9).unwrap_or_default(),
            sig9(m.overshoot),
            sig9(m.t_duty),
            sig9(m.f_duty),
            sig9(m.t_ripple),
            sig9(m.f_ripple),
            m.heater_cycles,
            m.valve_cycles,
            sig9(m.heater_energy),
            sig9(m.co2_consumed),
            m.captures_permitted,
            m.captures_denied
        );
    }
    s
}

/// Writes through a temporary file in the target directory, then renames over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
