use serde_json::Value;

use super::{run, SimConfig, SummaryMetrics};
use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub metrics: SummaryMetrics,
}

/// Returns a copy of `base` with the numeric field at the dotted `path` set to `value`.
///
/// Paths follow the config file layout, e.g. `control.t_hyst` or `events.0.time`.
pub fn set_parameter(base: &SimConfig, path: &str, value: f64) -> Result<SimConfig> {
    let unknown = || Error::UnknownParameter(path.to_string());
    let mut root = serde_json::to_value(base).map_err(|_| unknown())?;
    let mut slot = &mut root;
    for part in path.split('.') {
        slot = match slot {
            Value::Object(map) => map.get_mut(part),
            Value::Array(items) => part.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(unknown)?;
    }
    *slot = match slot {
        Value::Number(n) if n.is_u64() || n.is_i64() => {
            if value.fract() != 0.0 || value < 0.0 || value > u64::MAX as f64 {
                return Err(Error::invalid(path, format!("expects a non-negative integer (got {value})")));
            }
            Value::from(value as u64)
        }
        Value::Number(_) => serde_json::Number::from_f64(value)
            .map(Value::Number)
            .ok_or_else(|| Error::invalid(path, format!("must be finite (got {value})")))?,
        _ => return Err(unknown()),
    };
    serde_json::from_value(root).map_err(|_| unknown())
}

/// One run per value with the same seed; rows come back in input order.
pub fn sweep(base: &SimConfig, path: &str, values: &[f64]) -> Result<Vec<SweepRow>> {
    sweep_with(base, path, values, Execution::default())
}

pub fn sweep_with(base: &SimConfig, path: &str, values: &[f64], exec: Execution) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::DegenerateInput("sweep needs at least one value".into()));
    }
    let configs = values
        .iter()
        .map(|&v| {
            let cfg = set_parameter(base, path, v)?;
            cfg.validate()?;
            Ok(cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let runs = exec.map(&configs, |cfg| run(cfg).map(|out| out.summary));
    values
        .iter()
        .zip(runs)
        .map(|(&value, metrics)| Ok(SweepRow { value, metrics: metrics? }))
        .collect()
}
