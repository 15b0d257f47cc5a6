//! Executes a configuration: one table for the plain modes, a directory of
//! named tables for the figure presets.

use std::path::{Path, PathBuf};

use stoc::{BeamSetting, Execution, SweepAxis, SweepRequest};

use crate::config::{Mode, RunConfig};
use crate::error::CliError;
use crate::output::{self, Metadata, Table};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One output file: its name relative to the output directory, the data and
/// the metadata that precede it.
#[derive(Debug, Clone, PartialEq)]
pub struct Product {
    pub name: String,
    pub table: Table,
    pub metadata: Metadata,
}

/// Location of the largest figure of merit in a table with `fom` and
/// `delta_r_nm` columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub fom: f64,
    pub delta_r_nm: f64,
}

impl Peak {
    pub fn of(table: &Table) -> Option<Peak> {
        let fom = table.column("fom")?;
        let dr = table.column("delta_r_nm")?;
        let (i, &best) = fom
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .max_by(|a, b| a.1.total_cmp(b.1))?;
        Some(Peak {
            fom: best,
            delta_r_nm: dr[i],
        })
    }

    pub fn summary(&self, label: Option<&str>) -> String {
        let mut s = format!(
            "peak_fom={} delta_r_nm={}",
            output::format_float(self.fom),
            output::format_float(self.delta_r_nm)
        );
        if let Some(l) = label {
            s.push_str(&format!(" file={l}"));
        }
        s
    }
}

fn base_metadata(mode: &str) -> Metadata {
    vec![
        ("tool".into(), format!("stoc {VERSION}")),
        ("mode".into(), mode.into()),
    ]
}

fn numerical(context: impl Into<String>) -> impl FnOnce(stoc::StocError) -> CliError {
    let context = context.into();
    move |source| {
        if matches!(source, stoc::StocError::Config { .. } | stoc::StocError::Domain { .. }) {
            CliError::from_domain(source)
        } else {
            CliError::Numerical { context, source }
        }
    }
}

fn sweep(req: SweepRequest, exec: Execution, context: &str) -> Result<Table, CliError> {
    stoc::sweep_with(&req, exec).map(Table::from).map_err(numerical(context))
}

/// Computes the products of a run without touching the filesystem.
pub fn compute(cfg: &RunConfig, exec: Execution) -> Result<Vec<Product>, CliError> {
    let mode_name = cfg.mode.name();
    let mut meta = base_metadata(&mode_name);
    if let Some(v) = cfg.voltage {
        meta.push(("voltage_v".into(), format!("{v:?}")));
    }
    if let Some(a) = cfg.alpha {
        meta.push(("alpha_rad".into(), format!("{a:?}")));
    }
    if let Some(b) = cfg.alpha_band {
        meta.push(("alpha_band_rad".into(), b.to_string()));
    }
    meta.push(("config".into(), cfg.echo()));
    let single = |table: Table, name: &str| {
        vec![Product {
            name: format!("{name}.{}", cfg.format.extension()),
            table,
            metadata: meta.clone(),
        }]
    };
    match cfg.mode {
        Mode::Densities | Mode::DiffPol => {
            let req = SweepRequest {
                axis: SweepAxis::ReducedRadius,
                grid: cfg.qr.expect("resolved").values(),
                voltage: None,
                setting: Some(BeamSetting::Alpha(cfg.alpha.expect("resolved"))),
                detector_radius: None,
            };
            let table = sweep(req, exec, &mode_name)?;
            let cols: &[&str] = if cfg.mode == Mode::Densities {
                &["q_r", "rho_up", "rho_down"]
            } else {
                &["q_r", "p_diff"]
            };
            Ok(single(project(&table, cols), "table"))
        }
        Mode::IntPol | Mode::Fom => {
            let setting = match (cfg.alpha, cfg.alpha_band) {
                (Some(a), None) => BeamSetting::Alpha(a),
                (None, Some(b)) => BeamSetting::Band(b.lo, b.hi),
                _ => unreachable!("validated by the config resolver"),
            };
            let req = SweepRequest {
                axis: SweepAxis::DetectorRadius,
                grid: cfg.radius.expect("resolved").values(),
                voltage: cfg.voltage,
                setting: Some(setting),
                detector_radius: None,
            };
            Ok(single(sweep(req, exec, &mode_name)?, "table"))
        }
        Mode::Figure(n) => figure(n, cfg, exec),
    }
}

fn project(table: &Table, cols: &[&str]) -> Table {
    let rows = (0..table.rows.len())
        .map(|i| {
            cols.iter()
                .map(|c| table.column(c).expect("column present")[i])
                .collect()
        })
        .collect();
    Table::new(cols, rows)
}

struct Preset {
    name: String,
    metadata: Vec<(&'static str, String)>,
    request: SweepRequest,
    columns: &'static [&'static str],
}

/// Figure presets. Grids and beam settings are fixed so that repeated runs
/// produce identical files.
fn presets(n: u8) -> Vec<Preset> {
    let log_dr = stoc::polarimetry::log_grid(0.01, 2.0, 200);
    match n {
        2 => {
            let qr = stoc::polarimetry::linear_grid(0.0, 10.0, 401);
            (0..=5)
                .flat_map(|i| {
                    let alpha = i as f64 * std::f64::consts::PI / 10.0;
                    let req = SweepRequest {
                        axis: SweepAxis::ReducedRadius,
                        grid: qr.clone(),
                        voltage: None,
                        setting: Some(BeamSetting::Alpha(alpha)),
                        detector_radius: None,
                    };
                    let meta = vec![("alpha_rad", format!("{alpha:?}"))];
                    [
                        Preset {
                            name: format!("fig2a_n{i}"),
                            metadata: meta.clone(),
                            request: req.clone(),
                            columns: &["q_r", "rho_up", "rho_down"],
                        },
                        Preset {
                            name: format!("fig2b_n{i}"),
                            metadata: meta,
                            request: req,
                            columns: &["q_r", "p_diff"],
                        },
                    ]
                })
                .collect()
        }
        3 => [(200e3, "200kV"), (20e3, "20kV"), (2e3, "2kV")]
            .into_iter()
            .map(|(v, label)| single_ring_preset(format!("fig3_{label}"), v, 0.05, &log_dr))
            .collect(),
        4 => [(0.010, "10mrad"), (0.025, "25mrad"), (0.050, "50mrad")]
            .into_iter()
            .map(|(a, label)| single_ring_preset(format!("fig4_{label}"), 20e3, a, &log_dr))
            .collect(),
        5 => {
            let grid = stoc::polarimetry::linear_grid(0.01, 1.0, 100);
            [(20e3, (8e-3, 12e-3), "20kV"), (200.0, (80e-3, 120e-3), "200V")]
                .into_iter()
                .map(|(v, (lo, hi), label)| Preset {
                    name: format!("fig5_{label}"),
                    metadata: vec![
                        ("voltage_v", format!("{v:?}")),
                        ("alpha_band_rad", format!("{lo:?}:{hi:?}")),
                    ],
                    request: SweepRequest {
                        axis: SweepAxis::DetectorRadius,
                        grid: grid.clone(),
                        voltage: Some(v),
                        setting: Some(BeamSetting::Band(lo, hi)),
                        detector_radius: None,
                    },
                    columns: &["delta_r_nm", "p", "de", "fom"],
                })
                .collect()
        }
        _ => Vec::new(),
    }
}

fn single_ring_preset(name: String, voltage: f64, alpha: f64, grid: &[f64]) -> Preset {
    Preset {
        name,
        metadata: vec![
            ("voltage_v", format!("{voltage:?}")),
            ("alpha_rad", format!("{alpha:?}")),
        ],
        request: SweepRequest {
            axis: SweepAxis::DetectorRadius,
            grid: grid.to_vec(),
            voltage: Some(voltage),
            setting: Some(BeamSetting::Alpha(alpha)),
            detector_radius: None,
        },
        columns: &["delta_r_nm", "p"],
    }
}

/// File names written by `figure n` in CSV format.
pub fn figure_files(n: u8) -> Vec<String> {
    presets(n).into_iter().map(|p| format!("{}.csv", p.name)).collect()
}

fn figure(n: u8, cfg: &RunConfig, exec: Execution) -> Result<Vec<Product>, CliError> {
    let mode = format!("figure {n}");
    let format = cfg.format;
    presets(n)
        .into_iter()
        .map(|p| {
            let table = project(&sweep(p.request, exec, &p.name)?, p.columns);
            let mut metadata = base_metadata(&mode);
            metadata.extend(p.metadata.into_iter().map(|(k, v)| (k.to_string(), v)));
            metadata.push(("config".into(), cfg.echo()));
            Ok(Product {
                name: format!("{}.{}", p.name, format.extension()),
                table,
                metadata,
            })
        })
        .collect()
}

/// Writes the products and returns the summary lines for stdout. Plain modes
/// write to `--out` (or stdout when absent, signalled by `None` paths); figure
/// presets write into the `--out` directory, default `.`.
pub fn execute(cfg: &RunConfig, exec: Execution) -> Result<RunOutput, CliError> {
    let products = compute(cfg, exec)?;
    let mut summary = Vec::new();
    let mut stdout = Vec::new();
    let mut written = Vec::new();
    let is_figure = matches!(cfg.mode, Mode::Figure(_));
    for p in &products {
        let bytes = output::render(&p.table, &p.metadata, cfg.format)?;
        let target: Option<PathBuf> = if is_figure {
            Some(cfg.out.as_deref().unwrap_or(Path::new(".")).join(&p.name))
        } else {
            cfg.out.clone()
        };
        match target {
            Some(path) => {
                output::write_atomic(&path, &bytes)?;
                written.push(path);
            }
            None => stdout.extend_from_slice(&bytes),
        }
        if matches!(cfg.mode, Mode::Fom | Mode::Figure(5)) {
            if let Some(peak) = Peak::of(&p.table) {
                summary.push(peak.summary(is_figure.then_some(p.name.as_str())));
            }
        }
    }
    Ok(RunOutput {
        stdout,
        summary,
        written,
    })
}

/// What a run produced: table bytes bound for stdout, summary lines and the
/// files written.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub stdout: Vec<u8>,
    pub summary: Vec<String>,
    pub written: Vec<PathBuf>,
}
