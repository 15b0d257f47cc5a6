//! Laboratory settings of the electron beam, the ring aperture and the
//! detector, and their conversion into the wavenumbers consumed by the
//! transfer physics.
//!
//! Units are fixed throughout the crate: nm for lengths, nm⁻¹ for
//! wavenumbers, radians for angles and volts for the accelerating voltage.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Result, StocError};

/// Electron rest mass, kg (CODATA 2018).
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
/// Elementary charge, C (exact).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Reduced Planck constant, J s (exact).
pub const HBAR: f64 = 1.054_571_817e-34;

const METRES_PER_NM: f64 = 1e-9;

/// Relativistic electron wavenumber in nm⁻¹ for an accelerating voltage in volts.
///
/// k = √(2 m₀ e U (1 + e U / 2 m₀ c²)) / ħ
pub fn wavenumber_from_voltage(voltage: f64) -> Result<f64> {
    if !(voltage.is_finite() && voltage > 0.0) {
        return Err(StocError::domain(
            "voltage",
            format!("must be finite and > 0, got {voltage}"),
        ));
    }
    let kinetic = ELEMENTARY_CHARGE * voltage;
    let rest = ELECTRON_MASS * SPEED_OF_LIGHT * SPEED_OF_LIGHT;
    let momentum = (2.0 * ELECTRON_MASS * kinetic * (1.0 + kinetic / (2.0 * rest))).sqrt();
    Ok(momentum / HBAR * METRES_PER_NM)
}

/// Lateral wavenumber Q = k sin α of the partial plane waves converging at
/// half-angle `alpha`.
pub fn lateral_wavenumber(beam: &BeamParams, alpha: f64) -> Result<f64> {
    check_alpha("alpha", alpha)?;
    Ok(beam.wavenumber * alpha.sin())
}

fn check_alpha(field: &'static str, alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && (0.0..FRAC_PI_2).contains(&alpha)) {
        return Err(StocError::domain(
            field,
            format!("must lie in [0, π/2), got {alpha}"),
        ));
    }
    Ok(())
}

/// Electron beam described by its accelerating voltage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamParams {
    /// Accelerating voltage, V.
    pub voltage: f64,
    /// Relativistic wavenumber, nm⁻¹.
    pub wavenumber: f64,
    /// Wavelength, nm.
    pub wavelength: f64,
    /// Lorentz factor of the electron.
    pub lorentz_gamma: f64,
}

impl BeamParams {
    pub fn new(voltage: f64) -> Result<Self> {
        let wavenumber = wavenumber_from_voltage(voltage)?;
        let rest_energy = ELECTRON_MASS * SPEED_OF_LIGHT * SPEED_OF_LIGHT;
        Ok(BeamParams {
            voltage,
            wavenumber,
            wavelength: 2.0 * PI / wavenumber,
            lorentz_gamma: 1.0 + ELEMENTARY_CHARGE * voltage / rest_energy,
        })
    }

    /// Q = k sin α.
    pub fn lateral_wavenumber(&self, alpha: f64) -> Result<f64> {
        lateral_wavenumber(self, alpha)
    }
}

/// Single convergence angle; also the spinor rotation angle, since the
/// angle between spin and momentum is preserved in the lens field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSpec {
    pub alpha: f64,
}

impl ConvergenceSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha("alpha", alpha)?;
        Ok(ConvergenceSpec { alpha })
    }
}

/// Ring aperture of finite width passing convergence angles in
/// `[alpha_min, alpha_max]`, carrying a unit topological charge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnularAperture {
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Initial number of quadrature panels across the band.
    pub n_samples: usize,
}

impl AnnularAperture {
    pub const DEFAULT_SAMPLES: usize = 4;

    pub fn new(alpha_min: f64, alpha_max: f64) -> Result<Self> {
        Self::with_samples(alpha_min, alpha_max, Self::DEFAULT_SAMPLES)
    }

    pub fn with_samples(alpha_min: f64, alpha_max: f64, n_samples: usize) -> Result<Self> {
        check_alpha("alpha_min", alpha_min)?;
        check_alpha("alpha_max", alpha_max)?;
        if alpha_min == alpha_max {
            return Err(StocError::domain(
                "alpha_band",
                "degenerate aperture (alpha_min == alpha_max); use the single-Q transfer matrix",
            ));
        }
        if alpha_min > alpha_max {
            return Err(StocError::domain(
                "alpha_band",
                format!("alpha_min {alpha_min} exceeds alpha_max {alpha_max}"),
            ));
        }
        if n_samples < 2 {
            return Err(StocError::domain(
                "n_samples",
                format!("need at least 2 samples, got {n_samples}"),
            ));
        }
        Ok(AnnularAperture {
            alpha_min,
            alpha_max,
            n_samples,
        })
    }

    pub fn centre(&self) -> f64 {
        0.5 * (self.alpha_min + self.alpha_max)
    }

    pub fn width(&self) -> f64 {
        self.alpha_max - self.alpha_min
    }
}

/// On-axis detector disc of radius Δr.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorDisk {
    /// Δr, nm.
    pub radius: f64,
    /// Gauss–Legendre nodes per radial panel.
    pub n_radial: usize,
}

impl DetectorDisk {
    pub const DEFAULT_RADIAL: usize = 16;

    pub fn new(radius: f64) -> Result<Self> {
        Self::with_radial(radius, Self::DEFAULT_RADIAL)
    }

    pub fn with_radial(radius: f64, n_radial: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(StocError::domain(
                "radius",
                format!("detector radius must be finite and > 0, got {radius}"),
            ));
        }
        if n_radial < 16 {
            return Err(StocError::domain(
                "n_radial",
                format!("need at least 16 radial nodes, got {n_radial}"),
            ));
        }
        Ok(DetectorDisk { radius, n_radial })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Independent route: total energy E = γ m₀c², p c = √(E² − (m₀c²)²).
    fn oracle_wavenumber(voltage: f64) -> f64 {
        let rest = ELECTRON_MASS * SPEED_OF_LIGHT.powi(2);
        let total = rest + ELEMENTARY_CHARGE * voltage;
        let pc = (total * total - rest * rest).sqrt();
        pc / SPEED_OF_LIGHT / HBAR * 1e-9
    }

    #[test]
    fn wavenumber_matches_energy_momentum_oracle() {
        for v in [1.0, 200.0, 2e3, 2e4, 2e5, 3e5] {
            assert_relative_eq!(
                wavenumber_from_voltage(v).unwrap(),
                oracle_wavenumber(v),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn tabulated_wavelengths() {
        // 200 kV: λ = 2.508 pm, 200 V: λ = 0.0867 nm
        let b = BeamParams::new(2e5).unwrap();
        assert!((b.wavenumber - 2.505e3).abs() < 0.5);
        assert!((b.wavelength - 2.508e-3).abs() < 1e-6);
        let b = BeamParams::new(200.0).unwrap();
        assert!((b.wavelength - 0.0867).abs() < 1e-4);
        assert_relative_eq!(b.wavenumber * b.wavelength, 2.0 * PI, max_relative = 1e-14);
    }

    #[test]
    fn rejects_non_positive_voltage() {
        for v in [0.0, -5.0, f64::NAN, f64::INFINITY] {
            let err = BeamParams::new(v).unwrap_err();
            assert_eq!(err.field(), Some("voltage"));
        }
    }

    #[test]
    fn monotone_in_voltage() {
        let mut last = 0.0;
        for i in 1..400 {
            let k = wavenumber_from_voltage(i as f64 * 1000.0).unwrap();
            assert!(k > last);
            last = k;
        }
        assert!(wavenumber_from_voltage(2e4).unwrap() < wavenumber_from_voltage(2e5).unwrap());
    }

    #[test]
    fn nonrelativistic_limit() {
        for v in [0.1, 1.0, 5.0, 10.0] {
            let classical = (2.0 * ELECTRON_MASS * ELEMENTARY_CHARGE * v).sqrt() / HBAR * 1e-9;
            let k = wavenumber_from_voltage(v).unwrap();
            assert!(((k - classical) / classical).abs() < 1e-5);
        }
    }

    #[test]
    fn lateral_wavenumber_examples() {
        let b = BeamParams::new(2e5).unwrap();
        assert_eq!(b.lateral_wavenumber(0.0).unwrap(), 0.0);
        let q = b.lateral_wavenumber(0.05).unwrap();
        assert!((q - 125.2).abs() < 0.1, "{q}");
        let small = 1e-3;
        let ratio = b.lateral_wavenumber(small).unwrap() / b.wavenumber;
        assert!(((ratio - small) / small).abs() < 1e-6);
        for a in [0.0, 0.3, 1.0, 1.5] {
            assert!(b.lateral_wavenumber(a).unwrap() <= b.wavenumber);
        }
        assert!(b.lateral_wavenumber(FRAC_PI_2).is_err());
        assert!(b.lateral_wavenumber(-0.1).is_err());
    }

    #[test]
    fn aperture_validation() {
        assert!(AnnularAperture::new(0.008, 0.012).is_ok());
        let err = AnnularAperture::new(0.01, 0.01).unwrap_err();
        assert!(err.to_string().contains("transfer matrix"));
        assert!(AnnularAperture::new(0.012, 0.008).is_err());
        assert!(AnnularAperture::with_samples(0.008, 0.012, 1).is_err());
        assert!(DetectorDisk::new(0.0).is_err());
        assert!(DetectorDisk::with_radial(1.0, 8).is_err());
    }
}
