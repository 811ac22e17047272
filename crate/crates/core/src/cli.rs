//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O error, 2 invalid input, 3 simulation or
//! equilibrium failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::config::{load_config, ConfigError, RunConfig};
use crate::csv::{fmt_num, write_metrics, write_trace};
use crate::equilibrium::{find_equilibrium, max_derivative};
use crate::error::ModelError;
use crate::linearize::{discrete_tf, jacobian_reduced};
use crate::machine::{ModelKind, PlantState};
use crate::sim::{compare_adaptive, compute_metrics, run_closed_loop, SimError, TimeSeries};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SIMULATION: i32 = 3;

/// Environment variable; `1` runs the two legs of `compare` sequentially.
pub const THREADS_ENV: &str = "EXCITASIM_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Simulation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => EXIT_IO,
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Simulation(_) => EXIT_SIMULATION,
        }
    }

    fn io(path: &Path, err: io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => CliError::Io(e.to_string()),
            ConfigError::Parse(_) | ConfigError::Validation(_) => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidScenario(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Simulation(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Simulation(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Full,
    Reduced,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Full => ModelKind::Full,
            ModelArg::Reduced => ModelKind::Reduced,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "excitasim",
    version,
    about = "Synchronous generator excitation control simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the closed-loop scenario and write the trace as CSV.
    Simulate {
        /// JSON configuration; built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Trace file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        adaptive: Option<Switch>,
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
    },
    /// Run the scenario with and without tuning and write adaptive.csv,
    /// fixed.csv and metrics.csv.
    Compare {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print the discrete transfer function of the linearized fourth-order
    /// model at the configured operating point.
    Linearize {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Sample period (s); the scenario's controller period by default.
        #[arg(long)]
        ts: Option<f64>,
    },
    /// Print the operating point for the configured targets.
    Equilibrium {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
    },
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate {
            config,
            out,
            adaptive,
            model,
        } => {
            let mut cfg = load(config.as_deref())?;
            if let Some(a) = adaptive {
                cfg.scenario.adaptive = a == Switch::On;
            }
            if let Some(m) = model {
                cfg.scenario.model = m.into();
            }
            simulate(&cfg, out.as_deref())
        }
        Command::Compare { config, out_dir } => {
            let cfg = load(config.as_deref())?;
            let dir =
                out_dir.ok_or_else(|| CliError::Io("compare: --out-dir is required".into()))?;
            compare(&cfg, &dir, parallel_from_env()?)
        }
        Command::Linearize { config, ts } => {
            let cfg = load(config.as_deref())?;
            let ts = ts.unwrap_or(cfg.scenario.ts);
            if !(ts.is_finite() && ts > 0.0) {
                return Err(CliError::Invalid("linearize: ts > 0".into()));
            }
            linearize(&cfg, ts, &mut io::stdout().lock())
        }
        Command::Equilibrium { config, model } => {
            let mut cfg = load(config.as_deref())?;
            if let Some(m) = model {
                cfg.scenario.model = m.into();
            }
            equilibrium(&cfg, &mut io::stdout().lock())
        }
    }
}

fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => Ok(load_config(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn parallel_from_env() -> Result<bool, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(true),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) => Ok(n != 1),
            Err(_) => Err(CliError::Invalid(format!(
                "{THREADS_ENV}: expected a thread count, got '{v}'"
            ))),
        },
    }
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).map_err(|e| CliError::io(path, e))
}

fn switch_count(series: &TimeSeries) -> usize {
    series
        .samples
        .windows(2)
        .filter(|w| w[0].c != w[1].c)
        .count()
}

/// One-line summary over the whole run.
pub fn summary_line(series: &TimeSeries, band: f64) -> Result<String, SimError> {
    let end = series.samples.last().map_or(0.0, |s| s.t) + 0.5 * series.spacing;
    let m = compute_metrics(series, (0.0, end), band)?;
    let settling = m.settling_time.map_or_else(|| "none".to_string(), fmt_num);
    Ok(format!(
        "samples={} iae={} ise={} max_abs_error={} settling_time={} c_switches={}",
        series.samples.len(),
        fmt_num(m.iae),
        fmt_num(m.ise),
        fmt_num(m.max_abs_error),
        settling,
        switch_count(series)
    ))
}

fn simulate(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    cfg.validate()
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let net = cfg.network_admittance();
    let series = run_closed_loop(
        &cfg.scenario,
        &cfg.generator,
        &net,
        &cfg.controller,
        &cfg.tuner,
    )?;
    let summary = summary_line(&series, cfg.tuner.alpha)?;
    match out {
        Some(path) => {
            write_file(path, |w| write_trace(&series, w))?;
            println!("{summary}");
        }
        None => {
            write_trace(&series, io::stdout().lock())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn compare(cfg: &RunConfig, dir: &Path, parallel: bool) -> Result<(), CliError> {
    let net = cfg.network_admittance();
    let cmp = compare_adaptive(
        &cfg.scenario,
        &cfg.generator,
        &net,
        &cfg.controller,
        &cfg.tuner,
        parallel,
    )?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_file(&dir.join("adaptive.csv"), |w| write_trace(&cmp.adaptive, w))?;
    write_file(&dir.join("fixed.csv"), |w| write_trace(&cmp.fixed, w))?;
    write_file(&dir.join("metrics.csv"), |w| write_metrics(&cmp, w))?;
    for win in &cmp.windows {
        println!(
            "window=[{}, {}) iae_adaptive={} iae_fixed={}",
            fmt_num(win.start),
            fmt_num(win.end),
            fmt_num(win.adaptive.iae),
            fmt_num(win.fixed.iae)
        );
    }
    Ok(())
}

fn linearize<W: Write>(cfg: &RunConfig, ts: f64, w: &mut W) -> Result<(), CliError> {
    let net = cfg.network_admittance();
    let sc = &cfg.scenario;
    let eq = find_equilibrium(
        sc.target_vt,
        sc.target_te,
        &cfg.generator,
        &net,
        ModelKind::Reduced,
    )?;
    let PlantState::Reduced(x) = eq.state else {
        unreachable!("reduced equilibrium requested")
    };
    let model = jacobian_reduced(&x, &eq.input, &cfg.generator, &net)?;
    let tf = discrete_tf(&model, ts);
    let mut text = String::from("name,value\n");
    for (i, b) in tf.numerator.iter().enumerate() {
        text += &format!("b{i},{}\n", fmt_num(*b));
    }
    for (i, a) in tf.denominator.iter().enumerate() {
        text += &format!("a{},{}\n", i + 1, fmt_num(*a));
    }
    text += &format!("ts,{}\ndelay,{}\n", fmt_num(tf.ts), tf.delay);
    w.write_all(text.as_bytes())
        .map_err(|e| CliError::Io(format!("stdout: {e}")))
}

fn equilibrium<W: Write>(cfg: &RunConfig, w: &mut W) -> Result<(), CliError> {
    let net = cfg.network_admittance();
    let sc = &cfg.scenario;
    let eq = find_equilibrium(sc.target_vt, sc.target_te, &cfg.generator, &net, sc.model)?;
    let names: &[&str] = match eq.state.kind() {
        ModelKind::Full => &["delta", "slip", "e_q_t", "e_q_st", "e_d_st", "v_f"],
        ModelKind::Reduced => &["delta", "slip", "e_q_t", "v_f"],
    };
    let model = match eq.state.kind() {
        ModelKind::Full => "full",
        ModelKind::Reduced => "reduced",
    };
    let mut text = format!("name,value\nmodel,{model}\n");
    for (name, v) in names.iter().zip(eq.state.to_vec()) {
        text += &format!("{name},{}\n", fmt_num(v));
    }
    let rows = [
        ("t_m", eq.input.t_m),
        ("u", eq.input.u),
        ("v_t", eq.outputs.v_t),
        ("t_e", eq.outputs.t_e),
        ("max_derivative", max_derivative(&eq, &cfg.generator, &net)?),
    ];
    for (name, v) in rows {
        text += &format!("{name},{}\n", fmt_num(v));
    }
    w.write_all(text.as_bytes())
        .map_err(|e| CliError::Io(format!("stdout: {e}")))
}
