//! Spin-to-orbital conversion in the lens: the transfer matrix T between the
//! front focal plane and the observation plane, pure-state evolution, the
//! finite-width annular beam and closed-form angular-momentum expectations.
//!
//! All matrices omit the global phase i·e^{ikz}; no density depends on it.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beamline::{AnnularAperture, BeamParams};
use crate::bessel::bessel_j012;
use crate::error::{Result, StocError};
use crate::quadrature::{integrate_adaptive, Tolerance};
use crate::spinor::{Matrix2c, RotationSpec, Spinor};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Cylindrical coordinates (r in nm, φ in [0, 2π)) in the observation plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldPoint {
    pub r: f64,
    pub phi: f64,
}

impl FieldPoint {
    pub fn new(r: f64, phi: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(StocError::domain("r", format!("must be finite and ≥ 0, got {r}")));
        }
        if !phi.is_finite() {
            return Err(StocError::domain("phi", "azimuth must be finite"));
        }
        Ok(FieldPoint {
            r,
            phi: phi.rem_euclid(TAU),
        })
    }
}

/// Unnormalised spinor amplitudes sampled at a field point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinorSample {
    pub point: FieldPoint,
    pub value: Spinor,
}

/// Transfer matrix T(Qr) for a ring of lateral wavenumber Q, at azimuth `phi`.
///
/// ```text
/// T = ( J₁ e^{iφ}(c − i s cosθ)        −J₀ s sinθ e^{−iφ₀}        )
///     ( J₂ e^{2iφ} s sinθ e^{iφ₀}       J₁ e^{iφ}(c + i s cosθ)   )
/// ```
/// with c = cos(α/2), s = sin(α/2).
pub fn transfer_matrix(qr: f64, spec: &RotationSpec, phi: f64) -> Matrix2c {
    debug_assert!(qr >= 0.0);
    let [j0, j1, j2] = bessel_j012(qr);
    transfer_from_bessel(j0, j1, j2, spec, phi)
}

fn transfer_from_bessel(j0: f64, j1: f64, j2: f64, spec: &RotationSpec, phi: f64) -> Matrix2c {
    let (s, c) = (0.5 * spec.alpha).sin_cos();
    let (st, ct) = spec.theta.sin_cos();
    let e1 = Complex64::from_polar(1.0, phi);
    let e2 = Complex64::from_polar(1.0, 2.0 * phi);
    let p0 = Complex64::from_polar(1.0, spec.phi0);
    Matrix2c::new(
        e1 * Complex64::new(c, -s * ct) * j1,
        -p0.conj() * (j0 * s * st),
        e2 * p0 * (j2 * s * st),
        e1 * Complex64::new(c, s * ct) * j1,
    )
}

/// T·w for a pure input spinor.
pub fn evolve_pure(input: &Spinor, qr: f64, spec: &RotationSpec, phi: f64) -> Spinor {
    transfer_matrix(qr, spec, phi).apply(input)
}

/// Radial amplitudes of the annular beam at one radius, already divided by
/// the power normalisation. Each is ∫ J_l(Q r) f(α) Q dQ / N over the band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialAmplitudes {
    /// ∫ J₁ cos(α/2)
    pub j1_cos: f64,
    /// ∫ J₁ sin(α/2)
    pub j1_sin: f64,
    /// ∫ J₀ sin(α/2)
    pub j0_sin: f64,
    /// ∫ J₂ sin(α/2)
    pub j2_sin: f64,
}

/// Coherent superposition of Bessel beams passed by a finite-width ring
/// aperture, with uniform illumination weight Q dQ = k² sin α cos α dα.
///
/// Both the Bessel argument Q(α) = k sin α and the spinor rotation angle α
/// vary across the band. The amplitude is normalised so that an
/// unpolarised beam carries unit power, using Hankel–Parseval:
/// N² = π (Q₂² − Q₁²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnularBeam {
    pub beam: BeamParams,
    pub aperture: AnnularAperture,
    pub theta: f64,
    pub phi0: f64,
    norm: f64,
    scale: f64,
    tol: Tolerance,
}

impl AnnularBeam {
    pub fn new(beam: BeamParams, aperture: AnnularAperture, theta: f64, phi0: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(StocError::domain("theta", format!("must lie in [0, π], got {theta}")));
        }
        let q1 = beam.lateral_wavenumber(aperture.alpha_min)?;
        let q2 = beam.lateral_wavenumber(aperture.alpha_max)?;
        let norm = (PI * (q2 * q2 - q1 * q1)).sqrt();
        // ∫ Q dQ / N: the size of an amplitude whose Bessel factor is one
        let scale = 0.5 * (q2 * q2 - q1 * q1) / norm;
        Ok(AnnularBeam {
            beam,
            aperture,
            theta,
            phi0,
            norm,
            scale,
            tol: Tolerance::default(),
        })
    }

    /// Axis perpendicular to the optic axis (θ = π/2, φ₀ = 0).
    pub fn transverse(beam: BeamParams, aperture: AnnularAperture) -> Result<Self> {
        Self::new(beam, aperture, std::f64::consts::FRAC_PI_2, 0.0)
    }

    /// Overrides the tolerance of the band quadrature (default: relative
    /// 1e-10, absolute 1e-14 of the amplitude scale).
    pub fn with_tolerance(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }

    /// ∫ Q dQ / N. For a vanishing band width A(r) → band_weight · T(Q̄ r).
    pub fn band_weight(&self) -> f64 {
        self.scale
    }

    /// Largest lateral wavenumber in the band, nm⁻¹.
    pub fn max_lateral_wavenumber(&self) -> f64 {
        self.beam.wavenumber * self.aperture.alpha_max.sin()
    }

    pub fn lateral_band(&self) -> (f64, f64) {
        let k = self.beam.wavenumber;
        (k * self.aperture.alpha_min.sin(), k * self.aperture.alpha_max.sin())
    }

    pub fn radial_amplitudes(&self, r: f64) -> Result<RadialAmplitudes> {
        let k = self.beam.wavenumber;
        let (a1, a2) = (self.aperture.alpha_min, self.aperture.alpha_max);
        let (q1, q2) = self.lateral_band();
        let phase_span = (q2 - q1) * r;
        let panels = self.aperture.n_samples.max((0.5 * phase_span).ceil() as usize);
        let tol = Tolerance {
            abs: self.tol.abs * self.scale,
            ..self.tol
        };
        let inv_norm = k * k / self.norm;
        let v = integrate_adaptive(
            |alpha: f64| {
                let (sa, ca) = alpha.sin_cos();
                let [j0, j1, j2] = bessel_j012(k * sa * r);
                let (s, c) = (0.5 * alpha).sin_cos();
                let w = sa * ca * inv_norm;
                [j1 * c * w, j1 * s * w, j0 * s * w, j2 * s * w]
            },
            a1,
            a2,
            panels,
            tol,
        )?;
        Ok(RadialAmplitudes {
            j1_cos: v[0],
            j1_sin: v[1],
            j0_sin: v[2],
            j2_sin: v[3],
        })
    }

    /// Annular transfer matrix A(r, φ) assembled from precomputed amplitudes.
    pub fn matrix_from(&self, amp: &RadialAmplitudes, phi: f64) -> Matrix2c {
        let (st, ct) = self.theta.sin_cos();
        let e1 = Complex64::from_polar(1.0, phi);
        let e2 = Complex64::from_polar(1.0, 2.0 * phi);
        let p0 = Complex64::from_polar(1.0, self.phi0);
        Matrix2c::new(
            e1 * Complex64::new(amp.j1_cos, -amp.j1_sin * ct),
            -p0.conj() * (amp.j0_sin * st),
            e2 * p0 * (amp.j2_sin * st),
            e1 * Complex64::new(amp.j1_cos, amp.j1_sin * ct),
        )
    }

    pub fn matrix(&self, r: f64, phi: f64) -> Result<Matrix2c> {
        Ok(self.matrix_from(&self.radial_amplitudes(r)?, phi))
    }

    pub fn field(&self, input: &Spinor, r: f64, phi: f64) -> Result<Spinor> {
        Ok(self.matrix(r, phi)?.apply(input))
    }

    /// Diagonal of A (½𝟙) A† at radius r: (ρ↑↑, ρ↓↓) of an unpolarised input.
    pub fn unpolarised_densities(&self, r: f64) -> Result<(f64, f64)> {
        let a = self.radial_amplitudes(r)?;
        let ct = self.theta.cos();
        let st2 = self.theta.sin().powi(2);
        let diag = a.j1_cos * a.j1_cos + (a.j1_sin * ct).powi(2);
        let up = 0.5 * (diag + a.j0_sin * a.j0_sin * st2);
        let down = 0.5 * (diag + a.j2_sin * a.j2_sin * st2);
        Ok((up, down))
    }
}

/// Output spinor A(r, φ)·w of an annular aperture.
pub fn annular_field(
    input: &Spinor,
    point: FieldPoint,
    beam: &BeamParams,
    aperture: &AnnularAperture,
    theta: f64,
    phi0: f64,
) -> Result<Spinor> {
    AnnularBeam::new(*beam, *aperture, theta, phi0)?.field(input, point.r, point.phi)
}

/// Spin state prepared in the front focal plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputSpin {
    Up,
    Down,
}

impl InputSpin {
    pub fn spinor(self) -> Spinor {
        match self {
            InputSpin::Up => Spinor::UP,
            InputSpin::Down => Spinor::DOWN,
        }
    }
}

/// ⟨L_z⟩, ⟨S_z⟩, ⟨J_z⟩ in units of ħ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularMomenta {
    pub lz: f64,
    pub sz: f64,
    pub jz: f64,
}

/// Closed-form angular momenta after the lens for a pure spin input and a
/// rotation axis perpendicular to the optic axis.
///
/// Spin-up keeps OAM 1 with weight cos²(α/2) and flips into OAM 2 with
/// weight sin²(α/2); spin-down keeps OAM 1 and flips into OAM 0.
pub fn expectation_angular_momenta(input: InputSpin, alpha: f64) -> AngularMomenta {
    let (s, c) = (0.5 * alpha).sin_cos();
    let (c2, s2) = (c * c, s * s);
    match input {
        InputSpin::Up => {
            let lz = c2 + 2.0 * s2;
            let sz = 0.5 * (c2 - s2);
            AngularMomenta { lz, sz, jz: 1.5 }
        }
        InputSpin::Down => {
            let lz = c2;
            let sz = 0.5 * (s2 - c2);
            AngularMomenta { lz, sz, jz: 0.5 }
        }
    }
}

pub mod oracle {
    //! Brute-force azimuthal Fourier integral over the ring of point sources,
    //! free of any Bessel identity. Validation only.

    use super::*;

    /// (1/2π) ∫₀^{2π} e^{iQr cos(φ′−φ)} e^{iφ′} R(α; φ′) w dφ′, divided by the
    /// global factor i so that it is directly comparable with T·w.
    pub fn fourier_oracle(
        input: &Spinor,
        q: f64,
        r: f64,
        phi: f64,
        spec: &RotationSpec,
    ) -> Result<Spinor> {
        let x = q * r;
        let panels = 4 + (x / 2.0).ceil() as usize;
        let tol = Tolerance {
            rel: 1e-12,
            abs: 1e-15,
            max_intervals: 50_000,
        };
        let v = integrate_adaptive(
            |t: f64| {
                let phase = Complex64::from_polar(1.0, x * (t - phi).cos() + t);
                let w = crate::spinor::rotation_operator(spec, t).apply(input).scale(phase);
                [w.a_plus.re, w.a_plus.im, w.a_minus.re, w.a_minus.im]
            },
            0.0,
            TAU,
            panels,
            tol,
        )?;
        let out = Spinor::new(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]));
        Ok(out.scale(-I / TAU))
    }
}

#[cfg(test)]
mod tests {
    use super::oracle::fourier_oracle;
    use super::*;
    use crate::spinor::{conjugate_by, unpolarized_density};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn spinor_diff(a: &Spinor, b: &Spinor) -> f64 {
        (a.a_plus - b.a_plus).norm().max((a.a_minus - b.a_minus).norm())
    }

    #[test]
    fn unrotated_beam_is_pure_oam_one() {
        for qr in [0.0, 0.7, 3.3, 40.0] {
            let t = transfer_matrix(qr, &RotationSpec::new(0.0, 1.0, 0.4), 0.0);
            let j1 = bessel_j012(qr)[1];
            assert!(t.max_abs_diff(&Matrix2c::from_real(j1, 0.0, 0.0, j1)) < 1e-15);
        }
    }

    #[test]
    fn on_axis_only_spin_flip_survives() {
        let t = transfer_matrix(0.0, &RotationSpec::transverse(0.6), 0.0);
        let expected = Matrix2c::from_real(0.0, -(0.3f64).sin(), 0.0, 0.0);
        assert!(t.max_abs_diff(&expected) < 1e-16);
    }

    #[test]
    fn column_norm_matches_scalar_formula() {
        let (qr, alpha) = (1.2, 0.8);
        let t = transfer_matrix(qr, &RotationSpec::transverse(alpha), 0.37);
        let [_, j1, j2] = bessel_j012(qr);
        let (s, c) = (alpha / 2.0f64).sin_cos();
        let n = t.apply(&Spinor::UP).norm_sqr();
        assert!((n - (j1 * j1 * c * c + j2 * j2 * s * s)).abs() < 1e-15);
    }

    #[test]
    fn pure_evolution_examples() {
        let qr = 2.1;
        let phi = 0.8;
        let up = evolve_pure(&Spinor::UP, qr, &RotationSpec::transverse(0.0), phi);
        let j1 = bessel_j012(qr)[1];
        assert!((up.a_plus - Complex64::from_polar(j1, phi)).norm() < 1e-15);
        assert_eq!(up.a_minus.norm(), 0.0);

        let down = evolve_pure(&Spinor::DOWN, 0.0, &RotationSpec::transverse(0.6), 1.9);
        assert!((down.a_plus - Complex64::new(-(0.3f64).sin(), 0.0)).norm() < 1e-16);
        assert_eq!(down.a_minus.norm(), 0.0);

        let spec = RotationSpec::new(0.9, 1.2, 0.5);
        let w = Spinor::new(Complex64::new(0.6, 0.1), Complex64::new(-0.2, 0.768)).normalized();
        let t = transfer_matrix(1.7, &spec, 0.3);
        let out = evolve_pure(&w, 1.7, &spec, 0.3);
        let quad = (w.projector() * t.adjoint() * t).trace().re;
        assert!((out.norm_sqr() - quad).abs() < 1e-13);
    }

    #[test]
    fn spin_flip_transfers_orbital_angular_momentum() {
        // up → down channel winds as e^{2iφ}; down → up channel carries no winding
        let spec = RotationSpec::transverse(0.7);
        let (qr, phi, d) = (2.9, 0.4, 0.3);
        let a = evolve_pure(&Spinor::UP, qr, &spec, phi).a_minus;
        let b = evolve_pure(&Spinor::UP, qr, &spec, phi + d).a_minus;
        assert!((b / a - Complex64::from_polar(1.0, 2.0 * d)).norm() < 1e-13);
        let a = evolve_pure(&Spinor::DOWN, qr, &spec, phi).a_plus;
        let b = evolve_pure(&Spinor::DOWN, qr, &spec, phi + d).a_plus;
        assert!((b - a).norm() < 1e-15);
    }

    #[test]
    fn azimuthal_structure_of_entries() {
        let spec = RotationSpec::new(1.0, 0.8, 0.2);
        let (qr, phi, d) = (3.1, 1.1, 0.45);
        let t0 = transfer_matrix(qr, &spec, phi);
        let t1 = transfer_matrix(qr, &spec, phi + d);
        let ratio = |i: usize, j: usize| t1.m[i][j] / t0.m[i][j];
        assert!((ratio(0, 0) - Complex64::from_polar(1.0, d)).norm() < 1e-13);
        assert!((ratio(1, 0) - Complex64::from_polar(1.0, 2.0 * d)).norm() < 1e-13);
        assert!((ratio(0, 1) - 1.0).norm() < 1e-13);
        assert!((ratio(1, 1) - Complex64::from_polar(1.0, d)).norm() < 1e-13);
    }

    #[test]
    fn diagonal_without_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let spec = RotationSpec::new(0.0, rng.gen_range(0.0..PI), rng.gen_range(-PI..PI));
            let t = transfer_matrix(rng.gen_range(0.0..30.0), &spec, rng.gen_range(0.0..TAU));
            assert_eq!(t.m[0][1].norm(), 0.0);
            assert_eq!(t.m[1][0].norm(), 0.0);
        }
    }

    #[test]
    fn oracle_reproduces_closed_form() {
        let spec = RotationSpec::new(0.7, FRAC_PI_2, 0.4);
        let (q, r, phi) = (2.3, 1.0, 1.0);
        for w in [Spinor::UP, Spinor::DOWN] {
            let o = fourier_oracle(&w, q, r, phi, &spec).unwrap();
            let t = evolve_pure(&w, q * r, &spec, phi);
            assert!(spinor_diff(&o, &t) < 1e-9);
        }
        let o = fourier_oracle(&Spinor::UP, 5.0, 0.0, 0.3, &RotationSpec::transverse(0.0)).unwrap();
        assert!(o.norm_sqr() < 1e-24);
    }

    #[test]
    fn oracle_is_linear() {
        let spec = RotationSpec::new(0.5, 1.3, -0.7);
        let (w1, w2) = (Spinor::UP, Spinor::new(Complex64::new(0.3, 0.4), Complex64::new(0.0, -1.0)));
        let (a, b) = (Complex64::new(0.2, -1.1), Complex64::new(0.9, 0.3));
        let lhs = fourier_oracle(&(w1.scale(a) + w2.scale(b)), 3.0, 1.4, 0.2, &spec).unwrap();
        let rhs = fourier_oracle(&w1, 3.0, 1.4, 0.2, &spec).unwrap().scale(a)
            + fourier_oracle(&w2, 3.0, 1.4, 0.2, &spec).unwrap().scale(b);
        assert!(spinor_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn closed_form_angular_momenta() {
        let up = expectation_angular_momenta(InputSpin::Up, 0.0);
        assert_eq!((up.lz, up.sz, up.jz), (1.0, 0.5, 1.5));
        let down = expectation_angular_momenta(InputSpin::Down, PI);
        assert!(down.lz.abs() < 1e-15);
        assert!((down.sz - 0.5).abs() < 1e-15);
        assert_eq!(down.jz, 0.5);
        for i in 0..50 {
            let a = i as f64 * PI / 49.0;
            for (input, jz) in [(InputSpin::Up, 1.5), (InputSpin::Down, 0.5)] {
                let m = expectation_angular_momenta(input, a);
                assert!((m.lz + m.sz - jz).abs() < 1e-15);
                assert_eq!(m.jz, jz);
            }
        }
    }

    #[test]
    fn closed_form_matches_component_weights() {
        // ⟨S_z⟩ and ⟨L_z⟩ recomputed from the Bessel-free component weights of T w
        // in momentum space, where each channel carries equal Parseval weight.
        for alpha in [0.1, 0.9, 2.0] {
            let spec = RotationSpec::transverse(alpha);
            let (s, c) = (alpha / 2.0f64).sin_cos();
            for (input, m_up, m_down) in [(InputSpin::Up, 1.0, 2.0), (InputSpin::Down, 0.0, 1.0)] {
                let t = transfer_from_bessel(1.0, 1.0, 1.0, &spec, 0.0).apply(&input.spinor());
                let (wu, wd) = (t.a_plus.norm_sqr(), t.a_minus.norm_sqr());
                assert!((wu + wd - c * c - s * s).abs() < 1e-15);
                let m = expectation_angular_momenta(input, alpha);
                assert!((m.lz - (m_up * wu + m_down * wd)).abs() < 1e-14);
                assert!((m.sz - 0.5 * (wu - wd)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn conjugation_diagonal_matches_scalar_densities() {
        let (qr, alpha) = (1.5, 0.9);
        let t = transfer_matrix(qr, &RotationSpec::transverse(alpha), 0.0);
        let rho = conjugate_by(&t, &unpolarized_density());
        let [j0, j1, j2] = bessel_j012(qr);
        let (s, c) = (alpha / 2.0f64).sin_cos();
        assert!((rho.rho_up() - 0.5 * (c * c * j1 * j1 + s * s * j0 * j0)).abs() < 1e-15);
        assert!((rho.rho_down() - 0.5 * (c * c * j1 * j1 + s * s * j2 * j2)).abs() < 1e-15);
    }

    #[test]
    fn collapsed_annulus_matches_single_ring() {
        let beam = BeamParams::new(2e4).unwrap();
        let width = 1e-9;
        let ap = AnnularAperture::new(0.01 - width / 2.0, 0.01 + width / 2.0).unwrap();
        let ab = AnnularBeam::new(beam, ap, 1.1, 0.3).unwrap();
        let q = beam.lateral_wavenumber(0.01).unwrap();
        let spec = RotationSpec::new(0.01, 1.1, 0.3);
        for (r, phi) in [(0.05, 0.2), (0.3, 1.4), (1.7, 4.0)] {
            let a = ab.matrix(r, phi).unwrap().scale(Complex64::new(1.0 / ab.band_weight(), 0.0));
            let t = transfer_matrix(q * r, &spec, phi);
            let scale = t.m[0][0].norm().max(t.m[0][1].norm());
            assert!(a.max_abs_diff(&t) < 1e-6 * scale, "r={r}");
        }
    }

    #[test]
    fn annular_field_entry_point() {
        let beam = BeamParams::new(2e4).unwrap();
        let ap = AnnularAperture::new(0.008, 0.012).unwrap();
        let p = FieldPoint::new(0.2, 7.0).unwrap();
        assert!(p.phi < TAU);
        let w = annular_field(&Spinor::UP, p, &beam, &ap, FRAC_PI_2, 0.0).unwrap();
        let ab = AnnularBeam::transverse(beam, ap).unwrap();
        assert_eq!(w, ab.field(&Spinor::UP, 0.2, p.phi).unwrap());
        assert!(FieldPoint::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn densities_agree_with_matrix_route() {
        let beam = BeamParams::new(2e4).unwrap();
        let ap = AnnularAperture::new(0.008, 0.012).unwrap();
        let ab = AnnularBeam::new(beam, ap, 0.9, 0.6).unwrap();
        for r in [0.0, 0.1, 0.4, 2.0] {
            let (up, down) = ab.unpolarised_densities(r).unwrap();
            let rho = conjugate_by(&ab.matrix(r, 0.7).unwrap(), &unpolarized_density());
            assert!((rho.rho_up() - up).abs() < 1e-12 * (up + 1e-300).max(1.0));
            assert!((rho.rho_down() - down).abs() < 1e-12 * (down + 1e-300).max(1.0));
        }
    }
}
