//! Beam-state value types.
//!
//! Amplitudes are stored unnormalized throughout: the squared norm of a Jones
//! vector is the probability that a photon is present in the beam during the
//! reference interval, and nothing ever renormalizes. The zero vector is a
//! valid state (a dark beam). Density matrices carry mean photon number as
//! their trace, so traces above 1 describe multiphoton inputs.

use std::fmt;
use std::ops::Add;

use num_complex::Complex64;

use crate::mat2::Mat2;

/// Structural tolerance for 2x2 matrix checks.
pub const STRUCT_TOL: f64 = 1e-12;

/// Unnormalized polarization amplitude of one beam.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JonesVector {
    /// Horizontal component.
    pub h: Complex64,
    /// Vertical component.
    pub v: Complex64,
}

impl JonesVector {
    /// The dark beam.
    pub const ZERO: JonesVector = JonesVector {
        h: Complex64::ZERO,
        v: Complex64::ZERO,
    };

    pub fn new(h: Complex64, v: Complex64) -> Self {
        JonesVector { h, v }
    }

    /// Probability that a photon is present in this beam; exactly 0 for a
    /// dark beam.
    pub fn presence_probability(self) -> f64 {
        self.h.norm_sqr() + self.v.norm_sqr()
    }

    pub fn scale(self, z: Complex64) -> Self {
        JonesVector::new(self.h * z, self.v * z)
    }

    /// Hermitian inner product, conjugate-linear in `self`.
    pub fn inner(self, other: Self) -> Complex64 {
        self.h.conj() * other.h + self.v.conj() * other.v
    }

    pub fn as_array(self) -> [Complex64; 2] {
        [self.h, self.v]
    }

    pub fn from_array(a: [Complex64; 2]) -> Self {
        JonesVector::new(a[0], a[1])
    }
}

impl Add for JonesVector {
    type Output = JonesVector;
    fn add(self, rhs: JonesVector) -> JonesVector {
        JonesVector::new(self.h + rhs.h, self.v + rhs.v)
    }
}

/// The joint state of the two interferometer beams.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoBeamState {
    pub beam1: JonesVector,
    pub beam2: JonesVector,
}

impl TwoBeamState {
    pub fn new(beam1: JonesVector, beam2: JonesVector) -> Self {
        TwoBeamState { beam1, beam2 }
    }

    /// Total presence probability; at most 1 for single-photon inputs.
    pub fn total_presence(self) -> f64 {
        self.beam1.presence_probability() + self.beam2.presence_probability()
    }
}

/// 2x2 polarization density matrix; trace = mean photon number per reference
/// interval.
///
/// Construction does not validate: tomography deliberately returns raw
/// least-squares estimates that may sit slightly outside the physical cone.
/// Call [`DensityMatrix::validate`] to get a structured verdict.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix {
    m: Mat2,
}

impl DensityMatrix {
    pub fn new(m: Mat2) -> Self {
        DensityMatrix { m }
    }

    /// Outer product psi psi*; its trace equals the presence probability.
    pub fn from_pure(psi: JonesVector) -> Self {
        let m = Mat2::new(
            psi.h * psi.h.conj(),
            psi.h * psi.v.conj(),
            psi.v * psi.h.conj(),
            psi.v * psi.v.conj(),
        );
        DensityMatrix { m }
    }

    pub fn matrix(&self) -> Mat2 {
        self.m
    }

    /// Mean photon number (real part of the trace).
    pub fn mean_photons(&self) -> f64 {
        self.m.trace().re
    }

    pub fn scale(&self, factor: f64) -> Self {
        DensityMatrix::new(self.m.scale(Complex64::new(factor, 0.0)))
    }

    /// Checks Hermiticity, positive semidefiniteness, and real trace within
    /// 1e-12. Eigenvalues are only meaningful for Hermitian matrices, so the
    /// PSD check is skipped when Hermiticity already failed.
    pub fn validate(&self) -> DensityVerdict {
        let mut violations = Vec::new();
        let herm_dev = self.m.max_abs_diff(self.m.adjoint());
        if herm_dev > STRUCT_TOL {
            violations.push(DensityViolation::NotHermitian { deviation: herm_dev });
        } else {
            let [lo, _] = self.m.hermitian_eigenvalues();
            if lo < -STRUCT_TOL {
                violations.push(DensityViolation::NegativeEigenvalue { eigenvalue: lo });
            }
        }
        let trace = self.m.trace();
        if trace.im.abs() > STRUCT_TOL {
            violations.push(DensityViolation::NonRealTrace { imaginary: trace.im });
        } else if trace.re < -STRUCT_TOL {
            violations.push(DensityViolation::NegativeTrace { trace: trace.re });
        }
        DensityVerdict { violations }
    }
}

/// One violated density-matrix property.
#[derive(Clone, Debug, PartialEq)]
pub enum DensityViolation {
    NotHermitian { deviation: f64 },
    NegativeEigenvalue { eigenvalue: f64 },
    NonRealTrace { imaginary: f64 },
    NegativeTrace { trace: f64 },
}

impl fmt::Display for DensityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityViolation::NotHermitian { deviation } => {
                write!(f, "not Hermitian (max |m - m*| = {deviation:.3e})")
            }
            DensityViolation::NegativeEigenvalue { eigenvalue } => {
                write!(f, "negative eigenvalue {eigenvalue:.6}")
            }
            DensityViolation::NonRealTrace { imaginary } => {
                write!(f, "trace is not real (imaginary part {imaginary:.3e})")
            }
            DensityViolation::NegativeTrace { trace } => {
                write!(f, "negative trace {trace:.6}")
            }
        }
    }
}

/// Outcome of [`DensityMatrix::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityVerdict {
    pub violations: Vec<DensityViolation>,
}

impl DensityVerdict {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for DensityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "valid density matrix");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}
