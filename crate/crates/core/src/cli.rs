//! `incusim` command line.
//!
//! Exit codes: 0 success, 1 step-response check failed, 2 invalid input or
//! configuration, 3 I/O failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{self, ConfigError};
use crate::engine::{self, SimConfig};
use crate::output;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "incusim", version, about = "Mobile CO2 incubator digital twin")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a closed-loop experiment and write telemetry.csv, captures.csv and summary.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; falls back to $INCUSIM_OUT_DIR.
        #[arg(long, env = "INCUSIM_OUT_DIR")]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, allow_negative_numbers = true)]
        duration: Option<f64>,
    },
    /// Compare the stepped thermal plant with the closed-form first-order response.
    StepResponse {
        #[arg(long)]
        config: PathBuf,
        /// Step size, K.
        #[arg(long, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, allow_negative_numbers = true)]
        duration: f64,
        /// Spacing of printed rows, s (the check covers every step).
        #[arg(long, default_value_t = 1.0)]
        every: f64,
    },
    /// Run one experiment per value of a numeric config field.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Dotted config key, e.g. control.t_hyst.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, allow_negative_numbers = true)]
        values: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a config file and print it with defaults filled in.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Entry point used by the binary.
pub fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}

pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Simulate { config, out_dir, seed, duration } => simulate(&config, out_dir, seed, duration),
        Command::StepResponse { config, delta, duration, every } => step_response(&config, delta, duration, every),
        Command::Sweep { config, param, values, out } => sweep(&config, &param, &values, &out),
        Command::Validate { config } => validate(&config),
    };
    match result {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            code
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: message.into(),
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let code = match e {
            ConfigError::Io { .. } => EXIT_IO,
            _ => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        invalid(e.to_string())
    }
}

fn load_unchecked(path: &Path) -> Result<SimConfig, Failure> {
    Ok(config::parse_unchecked(&config::read(path)?)?)
}

fn simulate(path: &Path, out_dir: Option<PathBuf>, seed: Option<u64>, duration: Option<f64>) -> Result<u8, Failure> {
    let mut cfg = load_unchecked(path)?;
    if let Some(seed) = seed {
        cfg.sim.seed = seed;
    }
    if let Some(d) = duration {
        cfg.sim.duration = d;
    }
    config::check(&cfg)?;
    let out_dir = out_dir.ok_or_else(|| invalid("no output directory: pass --out-dir or set INCUSIM_OUT_DIR"))?;

    let out = engine::run(&cfg)?;

    std::fs::create_dir_all(&out_dir).map_err(|e| io_failure(&out_dir, e))?;
    let files = [
        ("telemetry.csv", output::telemetry_csv(&out.telemetry)),
        ("captures.csv", output::captures_csv(&out.captures)),
        ("summary.json", output::summary_json(&out.summary)),
    ];
    for (name, contents) in &files {
        let p = out_dir.join(name);
        output::write_atomic(&p, contents).map_err(|e| io_failure(&p, e))?;
    }
    print!("{}", files[2].1);
    Ok(EXIT_OK)
}

fn step_response(path: &Path, delta: f64, duration: f64, every: f64) -> Result<u8, Failure> {
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(invalid(format!("--duration must be finite and >= 0 (got {duration})")));
    }
    if !(every.is_finite() && every > 0.0) {
        return Err(invalid(format!("--every must be finite and > 0 (got {every})")));
    }
    let cfg = load_unchecked(path)?;
    let mut v = cfg.thermal.violations();
    v.iter_mut().for_each(|x| x.key = format!("thermal.{}", x.key));
    if !v.is_empty() {
        return Err(ConfigError::Invalid(v).into());
    }
    let dt = cfg.sim.dt;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid(format!("sim.dt: must be finite and > 0 (got {dt})")));
    }

    let test = engine::step_test(&cfg.thermal, delta, duration, dt)?;
    let stride = ((every / dt).round() as usize).max(1);
    let last = test.rows.len() - 1;
    println!("t,simulated,analytic,abs_error");
    for (i, r) in test.rows.iter().enumerate() {
        if i % stride == 0 || i == last {
            println!("{},{},{},{}", output::sig9(r.t), output::sig9(r.simulated), output::sig9(r.analytic), output::sig9(r.abs_error()));
        }
    }
    let bound = 1e-6 * delta.abs();
    let fraction = if delta != 0.0 { test.at_tau.simulated / delta } else { 0.0 };
    println!("# tau = {} s", output::sig9(test.tau));
    println!("# response at tau = {} of delta", output::sig9(fraction));
    println!("# max abs error = {} K (bound {} K)", output::sig9(test.max_abs_error), output::sig9(bound));
    Ok(if test.max_abs_error <= bound { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn sweep(path: &Path, param: &str, values: &str, out: &Path) -> Result<u8, Failure> {
    let cfg = config::load(path)?;
    let values = values
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| invalid(format!("--values: `{s}` is not a number"))))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = engine::sweep(&cfg, param, &values)?;
    let table = output::sweep_csv(&rows);
    output::write_atomic(out, &table).map_err(|e| io_failure(out, e))?;
    print!("{table}");
    Ok(EXIT_OK)
}

fn validate(path: &Path) -> Result<u8, Failure> {
    let cfg = config::load(path)?;
    print!("{}", config::to_toml(&cfg));
    Ok(EXIT_OK)
}
