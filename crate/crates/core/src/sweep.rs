//! Parameter sweeps producing tables of observables, one row per grid value.
//! Rows are independent and may be evaluated concurrently; the table is
//! always assembled in grid order.

use serde::{Deserialize, Serialize};

use crate::beamline::{BeamParams, DetectorDisk};
use crate::error::{Result, StocError};
use crate::parallel::{self, Execution};
use crate::polarimetry::{
    differential_polarisation, figure_of_merit, integrated_polarisation, spin_densities,
    Illumination,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    /// Dimensionless Qr of a single-ring beam.
    ReducedRadius,
    /// Detector radius Δr in nm.
    DetectorRadius,
    /// Convergence angle in radians.
    Alpha,
    /// Accelerating voltage in volts.
    Voltage,
}

/// Convergence setting held fixed during a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BeamSetting {
    Alpha(f64),
    Band(f64, f64),
}

impl BeamSetting {
    fn illumination(&self) -> Result<Illumination> {
        match *self {
            BeamSetting::Alpha(a) => Illumination::single(a),
            BeamSetting::Band(lo, hi) => Illumination::annular(lo, hi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRequest {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub voltage: Option<f64>,
    pub setting: Option<BeamSetting>,
    /// Δr in nm, for the axes that do not sweep it.
    pub detector_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SweepTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Restricts the table to `names`, in that order.
    pub fn select(&self, names: &[&str]) -> Result<SweepTable> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.columns
                    .iter()
                    .position(|c| c == n)
                    .ok_or_else(|| StocError::config("columns", format!("no column `{n}`")))
            })
            .collect::<Result<_>>()?;
        Ok(SweepTable {
            axis: self.axis,
            columns: names.iter().map(|s| s.to_string()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| idx.iter().map(|&i| r[i]).collect())
                .collect(),
        })
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(StocError::config("grid", "must not be empty"));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(StocError::config("grid", "values must be finite"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(StocError::config("grid", "must be strictly ascending"));
    }
    Ok(())
}

fn require<T: Copy>(v: Option<T>, field: &'static str, axis: SweepAxis) -> Result<T> {
    v.ok_or_else(|| StocError::config(field, format!("required for a {axis:?} sweep")))
}

fn columns(axis: &str, annular: bool) -> Vec<String> {
    let mut c = vec![axis.to_string(), "p".to_string()];
    if annular {
        c.push("de".into());
        c.push("fom".into());
    }
    c
}

fn detector_row(x: f64, dr: f64, beam: &BeamParams, ill: &Illumination) -> Result<Vec<f64>> {
    let det = DetectorDisk::new(dr)?;
    match ill {
        Illumination::SingleRing(_) => Ok(vec![x, integrated_polarisation(&det, beam, ill)?]),
        Illumination::Annular(_) => {
            let r = figure_of_merit(&det, beam, ill)?;
            Ok(vec![
                x,
                r.polarisation,
                r.detection_efficiency,
                r.figure_of_merit,
            ])
        }
    }
}

pub fn sweep(req: &SweepRequest) -> Result<SweepTable> {
    sweep_with(req, Execution::default())
}

pub fn sweep_with(req: &SweepRequest, exec: Execution) -> Result<SweepTable> {
    validate_grid(&req.grid)?;
    let axis = req.axis;
    let (columns, rows): (Vec<String>, Vec<Result<Vec<f64>>>) = match axis {
        SweepAxis::ReducedRadius => {
            let alpha = match require(req.setting, "alpha", axis)? {
                BeamSetting::Alpha(a) => a,
                BeamSetting::Band(..) => {
                    return Err(StocError::config(
                        "alpha",
                        "reduced-radius sweeps need a single convergence angle",
                    ))
                }
            };
            if !(alpha.is_finite() && (0.0..std::f64::consts::PI).contains(&alpha)) {
                return Err(StocError::config("alpha", format!("must lie in [0, π), got {alpha}")));
            }
            if req.grid[0] < 0.0 {
                return Err(StocError::config("grid", "Qr must be ≥ 0"));
            }
            let rows = parallel::map(&req.grid, exec, |&qr| {
                let d = spin_densities(qr, alpha);
                Ok(vec![qr, d.rho_up, d.rho_down, differential_polarisation(qr, alpha)])
            });
            let cols = ["q_r", "rho_up", "rho_down", "p_diff"];
            (cols.iter().map(|s| s.to_string()).collect(), rows)
        }
        SweepAxis::DetectorRadius => {
            let beam = BeamParams::new(require(req.voltage, "voltage", axis)?)?;
            let ill = require(req.setting, "alpha", axis)?.illumination()?;
            let rows = parallel::map(&req.grid, exec, |&dr| detector_row(dr, dr, &beam, &ill));
            (columns("delta_r_nm", matches!(ill, Illumination::Annular(_))), rows)
        }
        SweepAxis::Alpha => {
            let beam = BeamParams::new(require(req.voltage, "voltage", axis)?)?;
            let dr = require(req.detector_radius, "radius", axis)?;
            if req.setting.is_some() {
                return Err(StocError::config("alpha", "is the swept axis and cannot also be fixed"));
            }
            let rows = parallel::map(&req.grid, exec, |&a| {
                detector_row(a, dr, &beam, &Illumination::single(a)?)
            });
            (columns("alpha_rad", false), rows)
        }
        SweepAxis::Voltage => {
            let ill = require(req.setting, "alpha", axis)?.illumination()?;
            let dr = require(req.detector_radius, "radius", axis)?;
            let rows = parallel::map(&req.grid, exec, |&v| {
                detector_row(v, dr, &BeamParams::new(v)?, &ill)
            });
            (columns("voltage_v", matches!(ill, Illumination::Annular(_))), rows)
        }
    };
    let rows = rows
        .into_iter()
        .zip(&req.grid)
        .map(|(row, &value)| {
            row.map_err(|e| StocError::AtPoint {
                axis: columns_axis_name(axis),
                value,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    Ok(SweepTable {
        axis,
        columns,
        rows,
    })
}

fn columns_axis_name(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::ReducedRadius => "q_r",
        SweepAxis::DetectorRadius => "delta_r_nm",
        SweepAxis::Alpha => "alpha_rad",
        SweepAxis::Voltage => "voltage_v",
    }
}
