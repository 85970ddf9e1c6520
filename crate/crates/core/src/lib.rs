//! Digital twin of a portable CO₂ cell-culture incubator.
//!
//! The chamber is a first-order thermal lag heated by a pad and a well-mixed
//! CO₂ volume fed through a solenoid valve. Both are regulated by hysteretic
//! on/off controllers acting on sampled, noisy, miscalibrated sensors. An
//! imaging gate decides when a picture can be taken without the culture
//! leaving its regulated environment.
//!
//! ```
//! use incusim::engine::{run, SimConfig};
//!
//! let mut cfg = SimConfig::default().with_ideal_sensors();
//! cfg.sim.duration = 120.0;
//! let out = run(&cfg).unwrap();
//! assert!(out.summary.t_settle.is_some());
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod control;
pub mod engine;
pub mod error;
pub mod exec;
pub mod gating;
pub mod output;
pub mod plant;
pub mod sensing;
pub mod telemetry;

pub use error::{Error, Result, Violation};
