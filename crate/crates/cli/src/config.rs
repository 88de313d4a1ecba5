//! Line-based run configuration: `key = value`, comma-separated lists,
//! `#` comments. Command-line flags go through the same parser.

use std::fmt;
use std::path::PathBuf;

use serde_json::{json, Value};
use tadpole::analysis::InitialCondition;
use tadpole::quadrature::QuadratureSpec;
use tadpole::{CoefficientMode, GridSpec, SpectralBand, TadpoleGeometry};

/// Where a setting came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag(String),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Flag(name) => write!(f, "--{name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{origin}: {message}")]
pub struct ConfigError {
    pub origin: Origin,
    pub message: String,
}

pub const KEYS: &[&str] = &[
    "L",
    "x_max",
    "n_queue",
    "n_head",
    "h",
    "band",
    "rtol",
    "max_panels",
    "nodes_per_panel",
    "mode",
    "initial",
    "t",
    "times",
    "lengths",
    "output",
    "summary",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub length: f64,
    /// Queue length; `None` applies the truncation rule.
    pub x_max: Option<f64>,
    pub n_queue: Option<usize>,
    pub n_head: Option<usize>,
    /// Target spacing used when node counts are not given.
    pub h: f64,
    pub band: SpectralBand,
    pub quad: QuadratureSpec,
    pub mode: CoefficientMode,
    pub initial: InitialCondition,
    /// Single evaluation time; commands pick their own default.
    pub t: Option<f64>,
    pub times: Vec<f64>,
    pub lengths: Vec<f64>,
    pub output: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            length: 1.0,
            x_max: None,
            n_queue: None,
            n_head: None,
            h: 0.02,
            band: SpectralBand::new(0.25, 4.0).expect("valid default band"),
            quad: QuadratureSpec::default(),
            mode: CoefficientMode::Corrected,
            initial: InitialCondition::Gaussian { center: 3.0, width: 0.5 },
            t: None,
            times: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
            lengths: vec![0.2, 0.1, 0.05],
            output: None,
            summary: None,
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{}` is not a number", s.trim()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{}` is not finite", s.trim()))
    }
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("`{}` is not a non-negative integer", s.trim()))
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s.split(',').map(parse_f64).collect::<Result<_, _>>()?;
    if v.is_empty() {
        return Err("empty list".into());
    }
    Ok(v)
}

fn positive(v: f64, what: &str) -> Result<f64, String> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{what} must be positive, got {v}"))
    }
}

pub fn parse_mode(s: &str) -> Result<CoefficientMode, String> {
    match s.trim() {
        "corrected" => Ok(CoefficientMode::Corrected),
        "paper" => Ok(CoefficientMode::PaperVerbatim),
        other => Err(format!("unknown mode `{other}` (expected corrected or paper)")),
    }
}

/// `gaussian, c, s` | `bump, c, r` | `eigen, k`.
pub fn parse_initial(s: &str) -> Result<InitialCondition, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let ic = match parts.as_slice() {
        ["gaussian", c, w] => InitialCondition::Gaussian { center: parse_f64(c)?, width: parse_f64(w)? },
        ["bump", c, r] => InitialCondition::Bump { center: parse_f64(c)?, radius: parse_f64(r)? },
        ["eigen", k] => InitialCondition::Eigen { k: parse_usize(k)? },
        _ => return Err(format!("cannot parse initial condition `{s}` (gaussian, c, s | bump, c, r | eigen, k)")),
    };
    ic.validate().map_err(|e| e.to_string())?;
    Ok(ic)
}

fn initial_to_string(ic: &InitialCondition) -> String {
    match *ic {
        InitialCondition::Gaussian { center, width } => format!("gaussian, {center}, {width}"),
        InitialCondition::Bump { center, radius } => format!("bump, {center}, {radius}"),
        InitialCondition::Eigen { k } => format!("eigen, {k}"),
    }
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), ConfigError> {
        let fail = |message: String| ConfigError { origin: origin.clone(), message };
        let v = value.trim();
        match key {
            "L" | "length" => self.length = parse_f64(v).and_then(|l| positive(l, "L")).map_err(fail)?,
            "x_max" => self.x_max = Some(parse_f64(v).and_then(|x| positive(x, "x_max")).map_err(fail)?),
            "n_queue" => self.n_queue = Some(parse_usize(v).map_err(fail)?),
            "n_head" => self.n_head = Some(parse_usize(v).map_err(fail)?),
            "h" => self.h = parse_f64(v).and_then(|h| positive(h, "h")).map_err(fail)?,
            "band" => {
                let ab = parse_list(v).map_err(fail)?;
                let [a, b] = ab[..] else {
                    return Err(fail(format!("band needs two values a, b, got {}", ab.len())));
                };
                self.band = SpectralBand::new(a, b).map_err(|e| fail(e.to_string()))?;
            }
            "rtol" => self.quad.rtol = parse_f64(v).and_then(|r| positive(r, "rtol")).map_err(fail)?,
            "max_panels" => self.quad.max_panels = parse_usize(v).map_err(fail)?,
            "nodes_per_panel" => self.quad.nodes_per_panel = parse_usize(v).map_err(fail)?,
            "mode" => self.mode = parse_mode(v).map_err(fail)?,
            "initial" => self.initial = parse_initial(v).map_err(fail)?,
            "t" => self.t = Some(parse_f64(v).map_err(fail)?),
            "times" => self.times = parse_list(v).map_err(fail)?,
            "lengths" => self.lengths = parse_list(v).map_err(fail)?,
            "output" => self.output = Some(PathBuf::from(v)),
            "summary" => self.summary = Some(PathBuf::from(v)),
            other => return Err(fail(format!("unknown key `{other}`"))),
        }
        self.quad.validate().map_err(|e| fail(e.to_string()))
    }

    /// Parses a configuration file on top of the current settings.
    pub fn merge_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let origin = Origin::Line(i + 1);
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError { origin, message: format!("expected `key = value`, got `{line}`") });
            };
            self.set(key.trim(), value, origin)?;
        }
        Ok(())
    }

    pub fn geometry(&self) -> tadpole::Result<TadpoleGeometry> {
        TadpoleGeometry::new(self.length)
    }

    /// Grid for a run up to `t_max`: explicit node counts win over `h`, and
    /// `x_max` defaults to the truncation rule for the initial condition.
    pub fn grid(&self, t_max: f64) -> tadpole::Result<GridSpec> {
        let x_max = self
            .x_max
            .unwrap_or_else(|| GridSpec::truncation_length(self.initial.support_end(), self.band.b(), t_max));
        let n_queue = self.n_queue.unwrap_or((x_max / self.h).round() as usize + 1);
        let n_head = self.n_head.unwrap_or(((self.length / self.h).round() as usize).max(2) + 1);
        GridSpec::new(x_max, n_queue, n_head)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "L": self.length,
            "x_max": self.x_max,
            "n_queue": self.n_queue,
            "n_head": self.n_head,
            "h": self.h,
            "band": [self.band.a(), self.band.b()],
            "rtol": self.quad.rtol,
            "max_panels": self.quad.max_panels,
            "nodes_per_panel": self.quad.nodes_per_panel,
            "mode": self.mode.name(),
            "initial": initial_to_string(&self.initial),
            "t": self.t,
            "times": self.times,
            "lengths": self.lengths,
            "output": self.output.as_ref().map(|p| p.display().to_string()),
            "summary": self.summary.as_ref().map(|p| p.display().to_string()),
        })
    }
}

/// Parses a full configuration text, with defaults for omitted keys.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    cfg.merge_text(text)?;
    Ok(cfg)
}
