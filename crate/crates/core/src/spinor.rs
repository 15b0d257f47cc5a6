//! Pauli-spinor algebra: two-component spinors, 2×2 complex matrices, the
//! SU(2) rotation operator and spin density matrices.

use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Spinor (a₊, a₋) in the σ_z eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spinor {
    pub a_plus: Complex64,
    pub a_minus: Complex64,
}

impl Spinor {
    pub const UP: Spinor = Spinor {
        a_plus: ONE,
        a_minus: ZERO,
    };
    pub const DOWN: Spinor = Spinor {
        a_plus: ZERO,
        a_minus: ONE,
    };

    pub fn new(a_plus: Complex64, a_minus: Complex64) -> Self {
        Spinor { a_plus, a_minus }
    }

    /// |a₊|² + |a₋|²
    pub fn norm_sqr(&self) -> f64 {
        self.a_plus.norm_sqr() + self.a_minus.norm_sqr()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        Spinor::new(self.a_plus / n, self.a_minus / n)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Spinor::new(self.a_plus * factor, self.a_minus * factor)
    }

    /// Outer product |w⟩⟨w|.
    pub fn projector(&self) -> Matrix2c {
        let (p, m) = (self.a_plus, self.a_minus);
        Matrix2c::new(p * p.conj(), p * m.conj(), m * p.conj(), m * m.conj())
    }
}

impl Add for Spinor {
    type Output = Spinor;
    fn add(self, rhs: Spinor) -> Spinor {
        Spinor::new(self.a_plus + rhs.a_plus, self.a_minus + rhs.a_minus)
    }
}

/// General complex 2×2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Matrix2c {
    pub m: [[Complex64; 2]; 2],
}

impl Matrix2c {
    pub const IDENTITY: Matrix2c = Matrix2c {
        m: [[ONE, ZERO], [ZERO, ONE]],
    };
    pub const ZERO: Matrix2c = Matrix2c {
        m: [[ZERO, ZERO], [ZERO, ZERO]],
    };

    pub fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        Matrix2c {
            m: [[m11, m12], [m21, m22]],
        }
    }

    pub fn from_real(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Matrix2c::new(m11.into(), m12.into(), m21.into(), m22.into())
    }

    /// Pauli matrices σ_x, σ_y, σ_z.
    pub fn pauli_x() -> Self {
        Matrix2c::from_real(0.0, 1.0, 1.0, 0.0)
    }

    pub fn pauli_y() -> Self {
        Matrix2c::new(ZERO, -I, I, ZERO)
    }

    pub fn pauli_z() -> Self {
        Matrix2c::from_real(1.0, 0.0, 0.0, -1.0)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Matrix2c::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn determinant(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let m = &self.m;
        Matrix2c::new(
            m[0][0] * factor,
            m[0][1] * factor,
            m[1][0] * factor,
            m[1][1] * factor,
        )
    }

    pub fn apply(&self, w: &Spinor) -> Spinor {
        let m = &self.m;
        Spinor::new(
            m[0][0] * w.a_plus + m[0][1] * w.a_minus,
            m[1][0] * w.a_plus + m[1][1] * w.a_minus,
        )
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix2c) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        d
    }
}

impl Mul for Matrix2c {
    type Output = Matrix2c;
    fn mul(self, rhs: Matrix2c) -> Matrix2c {
        let (a, b) = (&self.m, &rhs.m);
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Matrix2c { m: out }
    }
}

impl Add for Matrix2c {
    type Output = Matrix2c;
    fn add(self, rhs: Matrix2c) -> Matrix2c {
        let (a, b) = (&self.m, &rhs.m);
        Matrix2c::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

/// Rotation angle α about the Bloch-sphere axis with polar angle `theta`;
/// the axis azimuth follows the point source as φ′ = φ + `phi0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationSpec {
    pub alpha: f64,
    pub theta: f64,
    pub phi0: f64,
}

impl RotationSpec {
    /// Axis perpendicular to the optic axis (θ = π/2, φ₀ = 0), as used by
    /// the polarimetry pipeline.
    pub fn transverse(alpha: f64) -> Self {
        RotationSpec {
            alpha,
            theta: std::f64::consts::FRAC_PI_2,
            phi0: 0.0,
        }
    }

    pub fn new(alpha: f64, theta: f64, phi0: f64) -> Self {
        debug_assert!((0.0..=std::f64::consts::PI).contains(&theta));
        RotationSpec { alpha, theta, phi0 }
    }

    /// n̂·σ⃗ for the axis at source azimuth `phi`.
    pub fn axis_dot_sigma(&self, phi: f64) -> Matrix2c {
        let (st, ct) = self.theta.sin_cos();
        let e = Complex64::from_polar(1.0, phi + self.phi0);
        Matrix2c::new(ct.into(), e.conj() * st, e * st, (-ct).into())
    }
}

/// R = 𝟙 cos(α/2) − i sin(α/2) n̂·σ⃗, evaluated for the point source at
/// azimuth `phi`.
pub fn rotation_operator(spec: &RotationSpec, phi: f64) -> Matrix2c {
    let (s, c) = (0.5 * spec.alpha).sin_cos();
    Matrix2c::IDENTITY.scale(c.into()) + spec.axis_dot_sigma(phi).scale(-I * s)
}

/// Hermitian positive-semidefinite 2×2 spin density matrix. The trace is the
/// local intensity and is not normalised pointwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinDensityMatrix(Matrix2c);

impl SpinDensityMatrix {
    /// Wraps a matrix, symmetrising away rounding-level anti-Hermitian parts.
    pub fn from_matrix(m: Matrix2c) -> Self {
        let h = (m + m.adjoint()).scale(Complex64::new(0.5, 0.0));
        SpinDensityMatrix(h)
    }

    pub fn from_pure(w: &Spinor) -> Self {
        SpinDensityMatrix(w.projector())
    }

    pub fn matrix(&self) -> &Matrix2c {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn rho_up(&self) -> f64 {
        self.0.m[0][0].re
    }

    pub fn rho_down(&self) -> f64 {
        self.0.m[1][1].re
    }

    /// Tr[ρ σ_z] / Tr[ρ]; zero for a vanishing trace.
    pub fn longitudinal_polarisation(&self) -> f64 {
        let t = self.trace();
        if t == 0.0 {
            0.0
        } else {
            (self.rho_up() - self.rho_down()) / t
        }
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        let a = self.rho_up();
        let d = self.rho_down();
        let b = self.0.m[0][1].norm();
        let mean = 0.5 * (a + d);
        let half_gap = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        (mean - half_gap, mean + half_gap)
    }
}

/// ½·𝟙, the spin state of an unpolarised beam.
pub fn unpolarized_density() -> SpinDensityMatrix {
    SpinDensityMatrix(Matrix2c::from_real(0.5, 0.0, 0.0, 0.5))
}

/// T ρ T†
pub fn conjugate_by(t: &Matrix2c, rho: &SpinDensityMatrix) -> SpinDensityMatrix {
    SpinDensityMatrix::from_matrix(*t * rho.0 * t.adjoint())
}
