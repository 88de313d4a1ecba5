//! Command-line front end for the tadpole propagator experiments.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod config;
pub mod output;

pub use config::{parse_config, ConfigError, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] tadpole::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// 1 for usage and configuration problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tadpole", version, about = "Resolvent, spectral and propagation experiments on the tadpole graph")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub settings: Settings,
}

/// Overrides for configuration keys; applied after `--config`.
#[derive(Debug, Default, Args)]
pub struct Settings {
    /// Configuration file (`key = value` lines)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Head length
    #[arg(long = "L", global = true, allow_hyphen_values = true)]
    pub length: Option<String>,
    #[arg(long, global = true)]
    pub x_max: Option<String>,
    #[arg(long, global = true)]
    pub n_queue: Option<String>,
    #[arg(long, global = true)]
    pub n_head: Option<String>,
    /// Target grid spacing
    #[arg(long = "h", global = true)]
    pub spacing: Option<String>,
    /// Spectral band `a,b`
    #[arg(long, global = true)]
    pub band: Option<String>,
    #[arg(long, global = true)]
    pub rtol: Option<String>,
    #[arg(long, global = true)]
    pub max_panels: Option<String>,
    #[arg(long, global = true)]
    pub nodes_per_panel: Option<String>,
    /// `corrected` or `paper`
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// `gaussian,c,s`, `bump,c,r` or `eigen,k`
    #[arg(long, global = true)]
    pub initial: Option<String>,
    /// Evaluation time
    #[arg(long = "t", global = true, allow_hyphen_values = true)]
    pub time: Option<String>,
    #[arg(long, global = true)]
    pub times: Option<String>,
    #[arg(long, global = true)]
    pub lengths: Option<String>,
    /// CSV destination (default stdout)
    #[arg(long, global = true)]
    pub output: Option<String>,
    /// JSON summary destination (default stdout)
    #[arg(long, global = true)]
    pub summary: Option<String>,
}

impl Settings {
    fn overrides(&self) -> [(&'static str, &Option<String>); 16] {
        [
            ("L", &self.length),
            ("x_max", &self.x_max),
            ("n_queue", &self.n_queue),
            ("n_head", &self.n_head),
            ("h", &self.spacing),
            ("band", &self.band),
            ("rtol", &self.rtol),
            ("max_panels", &self.max_panels),
            ("nodes_per_panel", &self.nodes_per_panel),
            ("mode", &self.mode),
            ("initial", &self.initial),
            ("t", &self.time),
            ("times", &self.times),
            ("lengths", &self.lengths),
            ("output", &self.output),
            ("summary", &self.summary),
        ]
    }

    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
            cfg.merge_text(&text)?;
        }
        for (key, value) in self.overrides() {
            if let Some(v) = value {
                cfg.set(key, v, config::Origin::Flag(key.replace('_', "-")))?;
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EdgeArg {
    Queue,
    Head,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PartArg {
    Full,
    Continuous,
    Point,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transmission coefficients at one spectral parameter
    Coeffs {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        z_re: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        z_im: f64,
    },
    /// One resolvent kernel value
    Kernel {
        #[arg(long, value_enum, default_value_t = EdgeArg::Queue)]
        x_edge: EdgeArg,
        #[arg(long, default_value_t = 0.5)]
        x: f64,
        #[arg(long, value_enum, default_value_t = EdgeArg::Queue)]
        y_edge: EdgeArg,
        #[arg(long, default_value_t = 1.0)]
        y: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        z_re: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        z_im: f64,
        #[arg(long, value_enum, default_value_t = PartArg::Full)]
        part: PartArg,
    },
    /// Band-filtered evolution of the initial condition on the tadpole
    Evolve,
    /// Band-filtered evolution on the Neumann half-line
    EvolveHalfline,
    /// Sup-norm decay scan over `times`
    Decay,
    /// Tadpole minus half-line on the queue, over `lengths` and `times`
    Perturbation,
    /// Spectral propagator against the Crank–Nicolson reference
    OracleCompare,
    /// Rescaling to the unit head
    ScaleCheck,
    /// Partial sums of the loop expansion of the difference kernel
    Cycles {
        #[arg(long, default_value_t = 0.0)]
        x: f64,
        #[arg(long, default_value_t = 0.0)]
        y: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 10)]
        terms: usize,
    },
}

/// Parses `argv` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.settings.resolve().and_then(|cfg| commands::execute(&cli.command, &cfg)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
