//! Dense 2x2 complex matrices with closed-form spectral helpers.
//!
//! Everything downstream (filters, splitters, density matrices) is 2x2, so the
//! algebra is hand-rolled rather than routed through a general matrix type.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// A 2x2 complex matrix in row-major order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub m: [[Complex64; 2]; 2],
}

impl Mat2 {
    pub const ZERO: Mat2 = Mat2 {
        m: [[Complex64::ZERO; 2]; 2],
    };

    pub const IDENTITY: Mat2 = Mat2 {
        m: [
            [Complex64::ONE, Complex64::ZERO],
            [Complex64::ZERO, Complex64::ONE],
        ],
    };

    pub fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        Mat2 {
            m: [[m00, m01], [m10, m11]],
        }
    }

    pub fn from_rows(rows: [[Complex64; 2]; 2]) -> Self {
        Mat2 { m: rows }
    }

    pub fn diag(d0: Complex64, d1: Complex64) -> Self {
        Mat2::new(d0, Complex64::ZERO, Complex64::ZERO, d1)
    }

    /// Real diagonal matrix, convenient for attenuations and polarizers.
    pub fn diag_real(d0: f64, d1: f64) -> Self {
        Mat2::diag(Complex64::new(d0, 0.0), Complex64::new(d1, 0.0))
    }

    pub fn scale(self, z: Complex64) -> Self {
        Mat2::new(
            self.m[0][0] * z,
            self.m[0][1] * z,
            self.m[1][0] * z,
            self.m[1][1] * z,
        )
    }

    /// Conjugate transpose.
    pub fn adjoint(self) -> Self {
        Mat2::new(
            self.m[0][0].conj(),
            self.m[1][0].conj(),
            self.m[0][1].conj(),
            self.m[1][1].conj(),
        )
    }

    pub fn trace(self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Matrix-vector product.
    pub fn apply(self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// Largest entry modulus.
    pub fn max_abs(self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(self, other: Self) -> f64 {
        (self - other).max_abs()
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    ///
    /// Reads only the real diagonal and the upper off-diagonal entry, so the
    /// caller must guarantee Hermiticity.
    pub fn hermitian_eigenvalues(self) -> [f64; 2] {
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let mean = 0.5 * (a + d);
        let disc = (0.25 * (a - d) * (a - d) + self.m[0][1].norm_sqr()).sqrt();
        [mean - disc, mean + disc]
    }

    /// Singular values, descending.
    pub fn singular_values(self) -> [f64; 2] {
        let [lo, hi] = (self.adjoint() * self).hermitian_eigenvalues();
        // A*A is positive semidefinite; negative rounding is clipped.
        [hi.max(0.0).sqrt(), lo.max(0.0).sqrt()]
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.m[0][0] + rhs.m[0][0],
            self.m[0][1] + rhs.m[0][1],
            self.m[1][0] + rhs.m[1][0],
            self.m[1][1] + rhs.m[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.m[0][0] - rhs.m[0][0],
            self.m[0][1] - rhs.m[0][1],
            self.m[1][0] - rhs.m[1][0],
            self.m[1][1] - rhs.m[1][1],
        )
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.m;
        let b = &rhs.m;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}
