//! Spin-to-orbital conversion of electron vortex (Bessel) beams in a magnetic
//! round lens, and the spin polarimeter built on it.
//!
//! A ring aperture with a unit phase ramp prepares an OAM-1 beam in the front
//! focal plane. The lens rotates the spinor by the convergence angle α while
//! Fourier-transforming the spatial part, so spin-flipped amplitudes pick up
//! J₀ and J₂ radial profiles. An on-axis detector disc therefore sees a net
//! longitudinal spin polarisation.
//!
//! - [`beamline`]: voltages, angles and detector geometry
//! - [`spinor`]: Pauli spinors, SU(2) rotations, density matrices
//! - [`transfer`]: Bessel functions via [`bessel`], the transfer matrix, annular beams
//! - [`polarimetry`]: densities, polarisation, detection efficiency, figure of merit
//! - [`sweep`]: parameter sweeps, parallel over rows with the `parallel` feature

pub mod beamline;
pub mod bessel;
pub mod error;
pub mod parallel;
pub mod polarimetry;
pub mod quadrature;
pub mod spinor;
pub mod sweep;
pub mod transfer;

pub use beamline::{AnnularAperture, BeamParams, ConvergenceSpec, DetectorDisk};
pub use error::{Result, StocError};
pub use parallel::Execution;
pub use polarimetry::{
    detection_efficiency, differential_polarisation, figure_of_merit, integrated_polarisation,
    optimise_figure_of_merit, spin_densities, FomOptimum, FomSearch, Illumination,
    PolarimetryResult, RadialProfile, SpinDensities,
};
pub use spinor::{Matrix2c, RotationSpec, SpinDensityMatrix, Spinor};
pub use sweep::{sweep, sweep_with, BeamSetting, SweepAxis, SweepRequest, SweepTable};
pub use transfer::{AnnularBeam, InputSpin};
