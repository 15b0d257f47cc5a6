//! Observables of the polarimeter: spin densities, differential and
//! detector-integrated longitudinal polarisation, detection efficiency and
//! the figure of merit.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::beamline::{AnnularAperture, BeamParams, ConvergenceSpec, DetectorDisk};
use crate::bessel::bessel_j012;
use crate::error::{Result, StocError};
use crate::parallel::{self, Execution};
use crate::quadrature::gauss_legendre;
use crate::transfer::AnnularBeam;

/// Diagonal spin densities ρ↑↑, ρ↓↓ of an unpolarised input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinDensities {
    pub rho_up: f64,
    pub rho_down: f64,
}

impl SpinDensities {
    pub fn total(&self) -> f64 {
        self.rho_up + self.rho_down
    }
}

/// Closed-form densities of a single-ring Bessel beam:
/// ρ↑↑ = ½(cos²(α/2) J₁² + sin²(α/2) J₀²), ρ↓↓ = ½(cos²(α/2) J₁² + sin²(α/2) J₂²).
pub fn spin_densities(qr: f64, alpha: f64) -> SpinDensities {
    debug_assert!(qr >= 0.0);
    let [j0, j1, j2] = bessel_j012(qr);
    let (s, c) = (0.5 * alpha).sin_cos();
    let (s2, c2) = (s * s, c * c);
    SpinDensities {
        rho_up: 0.5 * (c2 * j1 * j1 + s2 * j0 * j0),
        rho_down: 0.5 * (c2 * j1 * j1 + s2 * j2 * j2),
    }
}

/// (ρ↑↑ − ρ↓↓)/(ρ↑↑ + ρ↓↓) at reduced radius Qr. Defined as 0 for α = 0.
pub fn differential_polarisation(qr: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        return 0.0;
    }
    let [j0, j1, j2] = bessel_j012(qr);
    let (s, c) = (0.5 * alpha).sin_cos();
    let (s2, c2) = (s * s, c * c);
    let (a, b) = (j0 * j0, j2 * j2);
    let den = (a + b) * s2 + 2.0 * j1 * j1 * c2;
    if den == 0.0 {
        0.0
    } else {
        (a - b) * s2 / den
    }
}

/// How the ring aperture is illuminated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Illumination {
    /// Infinitely thin ring: a pure, unnormalisable Bessel beam.
    SingleRing(ConvergenceSpec),
    /// Finite-width ring: a normalisable superposition.
    Annular(AnnularAperture),
}

impl Illumination {
    pub fn single(alpha: f64) -> Result<Self> {
        Ok(Illumination::SingleRing(ConvergenceSpec::new(alpha)?))
    }

    pub fn annular(alpha_min: f64, alpha_max: f64) -> Result<Self> {
        Ok(Illumination::Annular(AnnularAperture::new(alpha_min, alpha_max)?))
    }

    fn max_lateral_wavenumber(&self, beam: &BeamParams) -> f64 {
        let alpha = match self {
            Illumination::SingleRing(c) => c.alpha,
            Illumination::Annular(a) => a.alpha_max,
        };
        beam.wavenumber * alpha.sin()
    }
}

/// Ascending radii with one sampled value each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() {
            return Err(StocError::config(
                "values",
                format!("{} radii but {} values", radii.len(), values.len()),
            ));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(StocError::config("radii", "must be strictly ascending"));
        }
        Ok(RadialProfile { radii, values })
    }

    /// Index and value of the largest sample.
    pub fn argmax(&self) -> Option<(usize, f64)> {
        self.values
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// p(Δr), DE(Δr) and FoM(Δr) for one detector disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarimetryResult {
    pub polarisation: f64,
    pub detection_efficiency: f64,
    pub figure_of_merit: f64,
}

/// ∫(ρ↑↑ − ρ↓↓) and ∫(ρ↑↑ + ρ↓↓) over the detector disc.
#[derive(Debug, Clone, Copy, PartialEq)]
struct DiscIntegrals {
    difference: f64,
    total: f64,
}

impl DiscIntegrals {
    fn polarisation(&self) -> f64 {
        if self.total == 0.0 {
            0.0
        } else {
            self.difference / self.total
        }
    }
}

/// Width of one radial panel, a quarter period of the fastest Bessel
/// oscillation; `None` when the beam has no lateral structure.
fn panel_width(q_max: f64) -> Option<f64> {
    (q_max > 0.0).then(|| FRAC_PI_2 / q_max)
}

/// Composite Gauss–Legendre sum of `f` over [0, upper] with panels no
/// wider than `width`.
fn radial_sum<const N: usize, F>(upper: f64, width: f64, order: usize, f: F) -> Result<[f64; N]>
where
    F: Fn(f64) -> Result<[f64; N]>,
{
    let panels = ((upper / width).ceil() as usize).max(1);
    let h = upper / panels as f64;
    let (x, w) = gauss_legendre(order);
    let mut acc = [0.0; N];
    for p in 0..panels {
        let lo = h * p as f64;
        for (xi, wi) in x.iter().zip(&w) {
            let r = lo + 0.5 * h * (xi + 1.0);
            let v = f(r)?;
            for c in 0..N {
                acc[c] += 0.5 * h * wi * v[c];
            }
        }
    }
    Ok(acc)
}

fn disc_integrals(
    detector: &DetectorDisk,
    beam: &BeamParams,
    illumination: &Illumination,
) -> Result<DiscIntegrals> {
    let width = match panel_width(illumination.max_lateral_wavenumber(beam)) {
        Some(w) => w,
        None => {
            // α = 0: ρ↑↑ = ρ↓↓ = ½J₁²(0) = 0 everywhere
            return Ok(DiscIntegrals {
                difference: 0.0,
                total: 0.0,
            });
        }
    };
    match illumination {
        Illumination::SingleRing(conv) => {
            // integrate in x = Qr; the common 2π/Q² factor cancels in p
            let q = beam.wavenumber * conv.alpha.sin();
            let (s, c) = (0.5 * conv.alpha).sin_cos();
            let (s2, c2) = (s * s, c * c);
            let [diff, sum, j1sq] = radial_sum(q * detector.radius, width * q, detector.n_radial, |x| {
                let [j0, j1, j2] = bessel_j012(x);
                let (a, b) = (j0 * j0, j2 * j2);
                Ok([x * (a - b), x * (a + b), x * j1 * j1])
            })?;
            Ok(DiscIntegrals {
                difference: 0.5 * s2 * diff,
                total: 0.5 * (s2 * sum + 2.0 * c2 * j1sq),
            })
        }
        Illumination::Annular(aperture) => {
            let ab = AnnularBeam::transverse(*beam, *aperture)?;
            let [diff, sum] = radial_sum(detector.radius, width, detector.n_radial, |r| {
                let (up, down) = ab.unpolarised_densities(r)?;
                Ok([TAU * r * (up - down), TAU * r * (up + down)])
            })?;
            Ok(DiscIntegrals {
                difference: diff,
                total: sum,
            })
        }
    }
}

/// p(Δr) = Tr_{s,Δr}[ρ σ_z] / Tr_{s,Δr}[ρ] for an on-axis detector disc.
pub fn integrated_polarisation(
    detector: &DetectorDisk,
    beam: &BeamParams,
    illumination: &Illumination,
) -> Result<f64> {
    Ok(disc_integrals(detector, beam, illumination)?.polarisation())
}

/// Fraction of the (unit) beam power landing on the detector disc.
///
/// Only defined for annular illumination: a pure Bessel beam carries
/// infinite power.
pub fn detection_efficiency(
    detector: &DetectorDisk,
    beam: &BeamParams,
    illumination: &Illumination,
) -> Result<f64> {
    require_annular(illumination)?;
    Ok(disc_integrals(detector, beam, illumination)?.total)
}

fn require_annular(illumination: &Illumination) -> Result<()> {
    match illumination {
        Illumination::Annular(_) => Ok(()),
        Illumination::SingleRing(_) => Err(StocError::Mode(
            "detection efficiency needs a finite-width annular aperture; a single-ring Bessel beam cannot be normalised"
                .into(),
        )),
    }
}

/// p·DE together with its two factors.
pub fn figure_of_merit(
    detector: &DetectorDisk,
    beam: &BeamParams,
    illumination: &Illumination,
) -> Result<PolarimetryResult> {
    require_annular(illumination)?;
    let d = disc_integrals(detector, beam, illumination)?;
    let polarisation = d.polarisation();
    Ok(PolarimetryResult {
        polarisation,
        detection_efficiency: d.total,
        figure_of_merit: polarisation * d.total,
    })
}

/// Coarse log-spaced scan followed by golden-section refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FomSearch {
    /// Smallest detector radius, nm.
    pub lo: f64,
    /// Largest detector radius, nm.
    pub hi: f64,
    pub coarse_points: usize,
    /// Relative bracket width at which refinement stops.
    pub rel_tolerance: f64,
}

impl Default for FomSearch {
    fn default() -> Self {
        FomSearch {
            lo: 0.01,
            hi: 5.0,
            coarse_points: 120,
            rel_tolerance: 1e-4,
        }
    }
}

impl FomSearch {
    pub fn grid(&self) -> Vec<f64> {
        log_grid(self.lo, self.hi, self.coarse_points)
    }
}

/// Location of the largest figure of merit, with the scan that bracketed it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FomOptimum {
    pub delta_r: f64,
    pub result: PolarimetryResult,
    pub scan: RadialProfile,
}

pub fn optimise_figure_of_merit(
    beam: &BeamParams,
    aperture: &AnnularAperture,
    search: &FomSearch,
    exec: Execution,
) -> Result<FomOptimum> {
    let illumination = Illumination::Annular(*aperture);
    if !(search.lo > 0.0 && search.hi > search.lo) || search.coarse_points < 3 {
        return Err(StocError::config("search", "need 0 < lo < hi and at least 3 points"));
    }
    let eval = |dr: f64| -> Result<PolarimetryResult> {
        figure_of_merit(&DetectorDisk::new(dr)?, beam, &illumination)
    };
    let grid = search.grid();
    let coarse: Vec<Result<PolarimetryResult>> = parallel::map(&grid, exec, |&dr| eval(dr));
    let coarse: Vec<PolarimetryResult> = coarse.into_iter().collect::<Result<_>>()?;
    let scan = RadialProfile::new(grid.clone(), coarse.iter().map(|r| r.figure_of_merit).collect())?;
    let (best, _) = scan.argmax().expect("non-empty scan");

    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(grid.len() - 1)];
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = eval(x1)?.figure_of_merit;
    let mut f2 = eval(x2)?.figure_of_merit;
    while (b - a) > search.rel_tolerance * 0.5 * (a + b) {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = eval(x2)?.figure_of_merit;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = eval(x1)?.figure_of_merit;
        }
    }
    let mut delta_r = 0.5 * (a + b);
    let mut result = eval(delta_r)?;
    // the coarse sample wins if refinement landed on a lower value
    if coarse[best].figure_of_merit > result.figure_of_merit {
        delta_r = grid[best];
        result = coarse[best];
    }
    Ok(FomOptimum {
        delta_r,
        result,
        scan,
    })
}

/// `count` points from `lo` to `hi` inclusive, equally spaced in log.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == count {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// `count` points from `lo` to `hi` inclusive, equally spaced.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (count - 1) as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinor::{conjugate_by, unpolarized_density, RotationSpec};
    use crate::transfer::transfer_matrix;
    use std::f64::consts::PI;

    // Closed-form ∫₀^X x J_n(x)² dx = X²/2 (J_n² − J_{n−1} J_{n+1}), with
    // J₋₁ = −J₁ and J₃ from the recurrence.
    fn lommel(n: usize, x: f64) -> f64 {
        let [j0, j1, j2] = bessel_j012(x);
        let j3 = 4.0 / x * j2 - j1;
        let jm1 = -j1;
        let j = [jm1, j0, j1, j2, j3];
        0.5 * x * x * (j[n + 1] * j[n + 1] - j[n] * j[n + 2])
    }

    fn single_ring_oracle(q: f64, dr: f64, alpha: f64) -> f64 {
        let x = q * dr;
        let (s, c) = (alpha / 2.0f64).sin_cos();
        let j1 = bessel_j012(x)[1];
        // x(J₀² − J₂²) = 2 d(J₁²)/dx
        let diff = s * s * 2.0 * j1 * j1;
        let total = s * s * (lommel(0, x) + lommel(2, x)) + 2.0 * c * c * lommel(1, x);
        diff / total
    }

    #[test]
    fn densities_examples() {
        let d = spin_densities(0.0, 0.6);
        assert!((d.rho_up - 0.5 * (0.3f64).sin().powi(2)).abs() < 1e-16);
        assert_eq!(d.rho_down, 0.0);
        for qr in [0.3, 2.0, 7.7] {
            let d = spin_densities(qr, 0.0);
            let j1 = bessel_j012(qr)[1];
            assert_eq!(d.rho_up, d.rho_down);
            assert!((d.rho_up - 0.5 * j1 * j1).abs() < 1e-16);
        }
        let (qr, alpha) = (1.7, 1.1);
        let t = transfer_matrix(qr, &RotationSpec::transverse(alpha), 0.0);
        let rho = conjugate_by(&t, &unpolarized_density());
        let d = spin_densities(qr, alpha);
        assert!((rho.rho_up() - d.rho_up).abs() < 1e-12);
        assert!((rho.rho_down() - d.rho_down).abs() < 1e-12);
    }

    #[test]
    fn differential_examples() {
        assert_eq!(differential_polarisation(0.0, 0.3), 1.0);
        assert_eq!(differential_polarisation(3.83, 0.0), 0.0);
        assert_eq!(differential_polarisation(0.0, 0.0), 0.0);
        let (qr, alpha) = (2.40483, 0.5);
        let [_, j1, j2] = bessel_j012(qr);
        let (s, c) = (alpha / 2.0f64).sin_cos();
        let expected = -j2 * j2 * s * s / (j2 * j2 * s * s + 2.0 * j1 * j1 * c * c);
        let p = differential_polarisation(qr, alpha);
        assert!(p < 0.0);
        assert!((p - expected).abs() < 1e-6);
    }

    #[test]
    fn single_ring_quadrature_matches_closed_form() {
        let beam = BeamParams::new(2e4).unwrap();
        for alpha in [0.01, 0.05, 0.4] {
            let q = beam.lateral_wavenumber(alpha).unwrap();
            for dr in [1e-3, 0.05, 0.2, 1.0, 3.7] {
                let p = integrated_polarisation(
                    &DetectorDisk::new(dr).unwrap(),
                    &beam,
                    &Illumination::single(alpha).unwrap(),
                )
                .unwrap();
                let o = single_ring_oracle(q, dr, alpha);
                assert!(((p - o) / o).abs() < 1e-9, "alpha={alpha} dr={dr}: {p} vs {o}");
            }
        }
    }

    #[test]
    fn zero_angle_is_unpolarised() {
        let beam = BeamParams::new(2e4).unwrap();
        let p = integrated_polarisation(
            &DetectorDisk::new(0.3).unwrap(),
            &beam,
            &Illumination::single(0.0).unwrap(),
        )
        .unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn tiny_angle_follows_small_argument_limit() {
        // For QΔr ≪ 1, p → 1 / (1 + (kΔr cos(α/2))²): as α → 0 the
        // polarisation is set by kΔr, not by α.
        let beam = BeamParams::new(2e4).unwrap();
        let alpha = 1e-9;
        for dr in [1e-3, 0.01, 0.1, 1.0] {
            let p = integrated_polarisation(
                &DetectorDisk::new(dr).unwrap(),
                &beam,
                &Illumination::single(alpha).unwrap(),
            )
            .unwrap();
            let kd = beam.wavenumber * dr;
            let expected = 1.0 / (1.0 + kd * kd);
            assert!(((p - expected) / expected).abs() < 1e-6, "dr={dr}: {p} vs {expected}");
        }
    }

    #[test]
    fn single_ring_has_no_detection_efficiency() {
        let beam = BeamParams::new(2e4).unwrap();
        let d = DetectorDisk::new(0.3).unwrap();
        let ill = Illumination::single(0.01).unwrap();
        assert!(matches!(detection_efficiency(&d, &beam, &ill), Err(StocError::Mode(_))));
        assert!(matches!(figure_of_merit(&d, &beam, &ill), Err(StocError::Mode(_))));
    }

    #[test]
    fn efficiency_limits() {
        let beam = BeamParams::new(2e4).unwrap();
        let ill = Illumination::annular(0.008, 0.012).unwrap();
        let small = detection_efficiency(&DetectorDisk::new(1e-6).unwrap(), &beam, &ill).unwrap();
        assert!(small < 1e-8);
        let large = detection_efficiency(&DetectorDisk::new(20.0).unwrap(), &beam, &ill).unwrap();
        assert!(large > 0.98 && large <= 1.0, "{large}");
        let fom = figure_of_merit(&DetectorDisk::new(0.25).unwrap(), &beam, &ill).unwrap();
        assert!(fom.figure_of_merit.abs() <= fom.detection_efficiency);
    }

    #[test]
    fn annular_radial_sum_converged() {
        let beam = BeamParams::new(2e4).unwrap();
        let ill = Illumination::annular(0.008, 0.012).unwrap();
        for dr in [0.07, 0.25, 1.3] {
            let a = figure_of_merit(&DetectorDisk::with_radial(dr, 16).unwrap(), &beam, &ill).unwrap();
            let b = figure_of_merit(&DetectorDisk::with_radial(dr, 40).unwrap(), &beam, &ill).unwrap();
            assert!(((a.detection_efficiency - b.detection_efficiency) / b.detection_efficiency).abs() < 1e-9);
            assert!(((a.polarisation - b.polarisation) / b.polarisation).abs() < 1e-9);
        }
    }

    #[test]
    fn profile_validation() {
        assert!(RadialProfile::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(RadialProfile::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        let p = RadialProfile::new(vec![0.0, 1.0, 2.0], vec![1.0, 3.0, 2.0]).unwrap();
        assert_eq!(p.argmax(), Some((1, 3.0)));
    }

    #[test]
    fn grids() {
        let g = log_grid(0.01, 5.0, 7);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[6], 5.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        let g = linear_grid(0.0, 1.0, 5);
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let _ = PI;
    }
}
