//! Run configuration: command-line flags, an optional TOML file, defaults and
//! validation.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::error::{ContextKind, ContextValue, ErrorKind};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use stoc::polarimetry::{linear_grid, log_grid};
use stoc::{AnnularAperture, BeamParams, ConvergenceSpec};

use crate::error::CliError;

/// Inclusive sampling grid `start:stop:count`, optionally log-spaced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub log: bool,
}

impl Grid {
    pub fn linear(start: f64, stop: f64, count: usize) -> Self {
        Grid {
            start,
            stop,
            count,
            log: false,
        }
    }

    pub fn log(start: f64, stop: f64, count: usize) -> Self {
        Grid {
            start,
            stop,
            count,
            log: true,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.log {
            log_grid(self.start, self.stop, self.count)
        } else {
            linear_grid(self.start, self.stop, self.count)
        }
    }

    fn validate(&self, key: &str) -> Result<(), CliError> {
        let range = |message: String| CliError::Range {
            key: key.to_string(),
            message,
        };
        if self.count == 0 {
            return Err(range("count must be ≥ 1".into()));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(range("bounds must be finite".into()));
        }
        if self.count > 1 && !(self.stop > self.start) {
            return Err(range(format!("stop {} must exceed start {}", self.stop, self.start)));
        }
        if self.log && self.start <= 0.0 {
            return Err(range("log grids need start > 0".into()));
        }
        Ok(())
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.log {
            write!(f, "log:")?;
        }
        write!(f, "{:?}:{:?}:{}", self.start, self.stop, self.count)
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (log, body) = match s.strip_prefix("log:") {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let parts: Vec<&str> = body.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected [log:]start:stop:count, got `{s}`"));
        }
        let start = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
        let stop = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
        let count = parts[2].trim().parse::<usize>().map_err(|e| e.to_string())?;
        Ok(Grid {
            start,
            stop,
            count,
            log,
        })
    }
}

/// Convergence band `lo:hi` in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}:{:?}", self.lo, self.hi)
    }
}

impl FromStr for Band {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
        Ok(Band {
            lo: lo.trim().parse().map_err(|e: std::num::ParseFloatError| e.to_string())?,
            hi: hi.trim().parse().map_err(|e: std::num::ParseFloatError| e.to_string())?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Densities,
    DiffPol,
    IntPol,
    Fom,
    Figure(u8),
}

impl Mode {
    pub fn name(&self) -> String {
        match self {
            Mode::Densities => "densities".into(),
            Mode::DiffPol => "diff-pol".into(),
            Mode::IntPol => "int-pol".into(),
            Mode::Fom => "fom".into(),
            Mode::Figure(n) => format!("figure {n}"),
        }
    }
}

/// A fully validated run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub voltage: Option<f64>,
    pub alpha: Option<f64>,
    pub alpha_band: Option<Band>,
    /// Detector radii Δr, nm.
    pub radius: Option<Grid>,
    /// Reduced radii Qr for the density modes.
    pub qr: Option<Grid>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub const DEFAULT_QR: Grid = Grid {
        start: 0.0,
        stop: 10.0,
        count: 401,
        log: false,
    };
    pub const DEFAULT_RADIUS: Grid = Grid {
        start: 0.01,
        stop: 2.0,
        count: 200,
        log: true,
    };
    pub const DEFAULT_FOM_RADIUS: Grid = Grid {
        start: 0.01,
        stop: 1.0,
        count: 100,
        log: false,
    };

    /// Command-line arguments that reproduce this configuration.
    pub fn to_args(&self) -> Vec<String> {
        let mut args: Vec<String> = match self.mode {
            Mode::Figure(n) => vec!["figure".into(), n.to_string()],
            m => vec![m.name()],
        };
        let mut push = |flag: &str, value: String| {
            args.push(flag.into());
            args.push(value);
        };
        if let Some(v) = self.voltage {
            push("--voltage", format!("{v:?}"));
        }
        if let Some(a) = self.alpha {
            push("--alpha", format!("{a:?}"));
        }
        if let Some(b) = self.alpha_band {
            push("--alpha-band", b.to_string());
        }
        if let Some(g) = self.radius {
            push("--radius", g.to_string());
        }
        if let Some(g) = self.qr {
            push("--qr", g.to_string());
        }
        if let Some(p) = &self.out {
            push("--out", p.display().to_string());
        }
        push("--format", self.format.extension().into());
        args
    }

    /// The configuration echoed into output metadata. The output location is
    /// left out so that a file's bytes do not depend on where it was written.
    pub fn echo(&self) -> String {
        RunConfig {
            out: None,
            ..self.clone()
        }
        .to_args()
        .join(" ")
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "stoc",
    version,
    about = "Spin polarisation of electron Bessel beams in a magnetic lens",
    allow_negative_numbers = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spin densities ρ↑↑, ρ↓↓ against Qr for a single-ring beam
    Densities,
    /// Differential polarisation against Qr
    DiffPol,
    /// Detector-integrated polarisation against detector radius
    IntPol,
    /// Polarisation, detection efficiency and figure of merit for an annular aperture
    Fom,
    /// Reproduce a published figure (2, 3, 4 or 5)
    Figure { number: String },
}

#[derive(Debug, Args, Default)]
struct Flags {
    /// Accelerating voltage, V
    #[arg(long, global = true, allow_hyphen_values = true)]
    voltage: Option<String>,
    /// Convergence angle, rad
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Convergence band lo:hi, rad
    #[arg(long = "alpha-band", global = true, allow_hyphen_values = true)]
    alpha_band: Option<String>,
    /// Detector radii [log:]start:stop:count, nm
    #[arg(long, global = true, allow_hyphen_values = true)]
    radius: Option<String>,
    /// Reduced radii [log:]start:stop:count
    #[arg(long, global = true, allow_hyphen_values = true)]
    qr: Option<String>,
    /// Output file (directory for `figure`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format: csv or json
    #[arg(long, global = true)]
    format: Option<String>,
    /// TOML file with default values; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

/// Raw, unvalidated values by key.
#[derive(Debug, Default)]
struct RawValues {
    voltage: Option<String>,
    alpha: Option<String>,
    alpha_band: Option<String>,
    radius: Option<String>,
    qr: Option<String>,
    out: Option<String>,
    format: Option<String>,
}

impl RawValues {
    fn slot(&mut self, key: &str) -> Option<&mut Option<String>> {
        Some(match key {
            "voltage" => &mut self.voltage,
            "alpha" => &mut self.alpha,
            "alpha-band" | "alpha_band" => &mut self.alpha_band,
            "radius" => &mut self.radius,
            "qr" => &mut self.qr,
            "out" => &mut self.out,
            "format" => &mut self.format,
            _ => return None,
        })
    }

    fn overlay(&mut self, flags: Flags) {
        let Flags {
            voltage,
            alpha,
            alpha_band,
            radius,
            qr,
            out,
            format,
            config: _,
        } = flags;
        let pairs = [
            ("voltage", voltage),
            ("alpha", alpha),
            ("alpha-band", alpha_band),
            ("radius", radius),
            ("qr", qr),
            ("out", out.map(|p| p.display().to_string())),
            ("format", format),
        ];
        for (key, value) in pairs {
            if value.is_some() {
                *self.slot(key).expect("known key") = value;
            }
        }
    }
}

/// Parses a TOML configuration file body. Keys are those of the long flags
/// (`alpha-band` may also be written `alpha_band`).
fn parse_config_text(text: &str) -> Result<RawValues, CliError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Parse {
        key: "config".into(),
        value: e.message().to_string(),
    })?;
    let mut raw = RawValues::default();
    for (key, value) in table {
        let rendered = match &value {
            toml::Value::String(s) => s.clone(),
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => format!("{f:?}"),
            other => {
                return Err(CliError::Parse {
                    key,
                    value: other.to_string(),
                })
            }
        };
        match raw.slot(&key) {
            Some(slot) => *slot = Some(rendered),
            None => return Err(CliError::UnknownKey(key)),
        }
    }
    Ok(raw)
}

fn parse_number(key: &str, value: &str) -> Result<f64, CliError> {
    value.trim().parse::<f64>().map_err(|_| CliError::Parse {
        key: key.into(),
        value: value.into(),
    })
}

fn parse_with<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse::<T>().map_err(|_| CliError::Parse {
        key: key.into(),
        value: value.into(),
    })
}

fn translate_clap(err: clap::Error) -> CliError {
    let arg = match err.get(ContextKind::InvalidArg) {
        Some(ContextValue::String(s)) => Some(s.clone()),
        _ => None,
    };
    match err.kind() {
        ErrorKind::UnknownArgument => {
            CliError::UnknownKey(arg.unwrap_or_default().trim_start_matches('-').to_string())
        }
        ErrorKind::InvalidSubcommand => CliError::UnknownKey(arg.unwrap_or_default()),
        _ => CliError::Usage(err.to_string().lines().next().unwrap_or_default().to_string()),
    }
}

/// Parses command-line arguments (without the program name) into a validated
/// configuration. A `--config` TOML file supplies defaults that flags override.
pub fn parse_config<I, S>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv = std::iter::once("stoc".to_string()).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return Err(CliError::Usage(e.to_string()))
        }
        Err(e) => return Err(translate_clap(e)),
    };
    let mut raw = match &cli.flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            parse_config_text(&text)?
        }
        None => RawValues::default(),
    };
    raw.overlay(cli.flags);
    let mode = match cli.command {
        Command::Densities => Mode::Densities,
        Command::DiffPol => Mode::DiffPol,
        Command::IntPol => Mode::IntPol,
        Command::Fom => Mode::Fom,
        Command::Figure { number } => match number.as_str() {
            "2" | "3" | "4" | "5" => Mode::Figure(number.parse().expect("digit")),
            _ => {
                return Err(CliError::Range {
                    key: "figure".into(),
                    message: format!("no preset for figure `{number}`; choose 2, 3, 4 or 5"),
                })
            }
        },
    };
    resolve(mode, raw)
}

/// Parses TOML text directly, as if given through `--config`, for `mode`.
pub fn parse_config_file(mode: Mode, text: &str) -> Result<RunConfig, CliError> {
    resolve(mode, parse_config_text(text)?)
}

fn resolve(mode: Mode, raw: RawValues) -> Result<RunConfig, CliError> {
    let voltage = raw.voltage.as_deref().map(|v| parse_number("voltage", v)).transpose()?;
    let alpha = raw.alpha.as_deref().map(|v| parse_number("alpha", v)).transpose()?;
    let alpha_band = raw
        .alpha_band
        .as_deref()
        .map(|v| parse_with::<Band>("alpha-band", v))
        .transpose()?;
    let radius = raw.radius.as_deref().map(|v| parse_with::<Grid>("radius", v)).transpose()?;
    let qr = raw.qr.as_deref().map(|v| parse_with::<Grid>("qr", v)).transpose()?;
    let format = raw
        .format
        .as_deref()
        .map(|v| Format::from_str(v, true).map_err(|_| CliError::Parse {
            key: "format".into(),
            value: v.into(),
        }))
        .transpose()?
        .unwrap_or_default();
    let out = raw.out.map(PathBuf::from);

    if let Some(v) = voltage {
        BeamParams::new(v).map_err(CliError::from_domain)?;
    }
    if let Some(b) = alpha_band {
        AnnularAperture::new(b.lo, b.hi).map_err(|e| CliError::Range {
            key: "alpha-band".into(),
            message: e.to_string(),
        })?;
    }
    if let Some(g) = &radius {
        g.validate("radius")?;
        if g.start <= 0.0 {
            return Err(CliError::Range {
                key: "radius".into(),
                message: "detector radii must be > 0".into(),
            });
        }
    }
    if let Some(g) = &qr {
        g.validate("qr")?;
        if g.start < 0.0 {
            return Err(CliError::Range {
                key: "qr".into(),
                message: "Qr must be ≥ 0".into(),
            });
        }
    }

    let forbid = |present: bool, key: &str| -> Result<(), CliError> {
        if present {
            Err(CliError::Usage(format!("`--{key}` is not used by `{}`", mode.name())))
        } else {
            Ok(())
        }
    };
    let mut cfg = RunConfig {
        mode,
        voltage,
        alpha,
        alpha_band,
        radius,
        qr,
        out,
        format,
    };
    match mode {
        Mode::Densities | Mode::DiffPol => {
            let a = alpha.ok_or_else(|| CliError::Missing("alpha".into()))?;
            if !(a.is_finite() && (0.0..std::f64::consts::PI).contains(&a)) {
                return Err(CliError::Range {
                    key: "alpha".into(),
                    message: format!("must lie in [0, π), got {a}"),
                });
            }
            forbid(alpha_band.is_some(), "alpha-band")?;
            forbid(radius.is_some(), "radius")?;
            forbid(voltage.is_some(), "voltage")?;
            cfg.qr = Some(qr.unwrap_or(RunConfig::DEFAULT_QR));
        }
        Mode::IntPol => {
            voltage.ok_or_else(|| CliError::Missing("voltage".into()))?;
            match (alpha, alpha_band) {
                (Some(a), None) => {
                    ConvergenceSpec::new(a).map_err(CliError::from_domain)?;
                }
                (None, Some(_)) => {}
                (None, None) => return Err(CliError::Missing("alpha".into())),
                (Some(_), Some(_)) => {
                    return Err(CliError::Usage("give either --alpha or --alpha-band, not both".into()))
                }
            }
            forbid(qr.is_some(), "qr")?;
            cfg.radius = Some(radius.unwrap_or(RunConfig::DEFAULT_RADIUS));
        }
        Mode::Fom => {
            voltage.ok_or_else(|| CliError::Missing("voltage".into()))?;
            alpha_band.ok_or_else(|| CliError::Missing("alpha-band".into()))?;
            forbid(alpha.is_some(), "alpha")?;
            forbid(qr.is_some(), "qr")?;
            cfg.radius = Some(radius.unwrap_or(RunConfig::DEFAULT_FOM_RADIUS));
        }
        Mode::Figure(_) => {
            forbid(voltage.is_some(), "voltage")?;
            forbid(alpha.is_some(), "alpha")?;
            forbid(alpha_band.is_some(), "alpha-band")?;
            forbid(radius.is_some(), "radius")?;
            forbid(qr.is_some(), "qr")?;
        }
    }
    Ok(cfg)
}
