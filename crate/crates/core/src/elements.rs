//! The apparatus vocabulary: beam splitters, linear filters, mirrors,
//! detectors.
//!
//! Physical validity is checked once, at construction; propagation code
//! trusts the invariants afterwards.

use num_complex::Complex64;
use thiserror::Error;

use crate::mat2::Mat2;
use crate::state::{JonesVector, TwoBeamState, STRUCT_TOL};

#[derive(Debug, Error)]
pub enum OpticsError {
    #[error("matrix is not unitary (max |s*s - I| = {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("matrix is not subunitary (largest eigenvalue of a*a = {max_eigenvalue:.6})")]
    NotSubunitary { max_eigenvalue: f64 },
    #[error("mirror phase has modulus {modulus:.6}, expected 1")]
    NotUnitPhase { modulus: f64 },
    #[error("detector efficiency {q} outside [0, 1]")]
    InvalidEfficiency { q: f64 },
}

/// Passes iff the largest eigenvalue of a*a is at most 1 + 1e-12, i.e. the
/// largest singular value of `a` does not exceed 1 within tolerance.
pub fn is_subunitary(a: &Mat2) -> bool {
    max_gram_eigenvalue(a) <= 1.0 + STRUCT_TOL
}

fn max_gram_eigenvalue(a: &Mat2) -> f64 {
    (a.adjoint() * *a).hermitian_eigenvalues()[1]
}

/// Non-polarizing beam splitter: one unitary 2x2 scattering matrix over the
/// two spatial modes, applied identically to each polarization component.
///
/// Entry names follow the scattering convention
/// `s = [[t1, r2], [r1, t2]]`: `t1` transmits beam 1, `r2` reflects beam 2
/// into beam 1, and so on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitter {
    s: Mat2,
}

impl BeamSplitter {
    pub fn new(s: Mat2) -> Result<Self, OpticsError> {
        let deviation = (s.adjoint() * s).max_abs_diff(Mat2::IDENTITY);
        if deviation > STRUCT_TOL {
            return Err(OpticsError::NotUnitary { deviation });
        }
        Ok(BeamSplitter { s })
    }

    /// The symmetric 50/50 splitter (1/sqrt2)[[1, i], [i, 1]].
    pub fn symmetric_5050() -> Self {
        let r = 1.0 / 2.0_f64.sqrt();
        BeamSplitter {
            s: Mat2::new(
                Complex64::new(r, 0.0),
                Complex64::new(0.0, r),
                Complex64::new(0.0, r),
                Complex64::new(r, 0.0),
            ),
        }
    }

    pub fn matrix(&self) -> Mat2 {
        self.s
    }

    pub fn t1(&self) -> Complex64 {
        self.s.m[0][0]
    }

    pub fn r2(&self) -> Complex64 {
        self.s.m[0][1]
    }

    pub fn r1(&self) -> Complex64 {
        self.s.m[1][0]
    }

    pub fn t2(&self) -> Complex64 {
        self.s.m[1][1]
    }

    /// (psi1, psi2) -> (t1 psi1 + r2 psi2, r1 psi1 + t2 psi2), componentwise
    /// over polarization. Unitarity makes this photon-conserving.
    pub fn apply(&self, state: &TwoBeamState) -> TwoBeamState {
        let b1 = state.beam1;
        let b2 = state.beam2;
        TwoBeamState::new(
            b1.scale(self.t1()) + b2.scale(self.r2()),
            b1.scale(self.r1()) + b2.scale(self.t2()),
        )
    }
}

/// Subunitary polarization transformation; the adjustable apparatus setting.
///
/// Any matrix with singular values at most 1 is accepted, not only the
/// rank-one polarizer products u v* it generalizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFilter {
    a: Mat2,
}

impl LinearFilter {
    pub fn new(a: Mat2) -> Result<Self, OpticsError> {
        let max_eigenvalue = max_gram_eigenvalue(&a);
        if max_eigenvalue > 1.0 + STRUCT_TOL {
            return Err(OpticsError::NotSubunitary { max_eigenvalue });
        }
        Ok(LinearFilter { a })
    }

    pub fn identity() -> Self {
        LinearFilter { a: Mat2::IDENTITY }
    }

    /// Total absorber; passes nothing.
    pub fn absorber() -> Self {
        LinearFilter { a: Mat2::ZERO }
    }

    /// Ideal polarizer projecting onto (cos theta, sin theta); theta in
    /// radians.
    pub fn polarizer(theta: f64) -> Self {
        let c = theta.cos();
        let s = theta.sin();
        LinearFilter {
            a: Mat2::new(
                Complex64::new(c * c, 0.0),
                Complex64::new(c * s, 0.0),
                Complex64::new(c * s, 0.0),
                Complex64::new(s * s, 0.0),
            ),
        }
    }

    /// Uniform attenuation by `factor` in [0, 1].
    pub fn attenuator(factor: f64) -> Result<Self, OpticsError> {
        LinearFilter::new(Mat2::diag_real(factor, factor))
    }

    /// This filter with both components multiplied by the unit phase
    /// e^{i theta}; subunitarity is preserved because the singular values are
    /// unchanged.
    pub fn phase_shifted(&self, theta: f64) -> Self {
        LinearFilter {
            a: self.a.scale(Complex64::from_polar(1.0, theta)),
        }
    }

    pub fn matrix(&self) -> Mat2 {
        self.a
    }

    pub fn apply(&self, s: &JonesVector) -> JonesVector {
        JonesVector::from_array(self.a.apply(s.as_array()))
    }
}

/// Mirror: a unit-modulus phase factor on one beam. The two-splitter
/// arrangement is insensitive to a common mirror phase, so the default is 1;
/// asymmetric netlists may configure it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mirror {
    phase: Complex64,
}

impl Mirror {
    pub fn new(phase: Complex64) -> Result<Self, OpticsError> {
        let modulus = phase.norm();
        if (modulus - 1.0).abs() > STRUCT_TOL {
            return Err(OpticsError::NotUnitPhase { modulus });
        }
        Ok(Mirror { phase })
    }

    pub fn identity() -> Self {
        Mirror {
            phase: Complex64::ONE,
        }
    }

    pub fn phase(&self) -> Complex64 {
        self.phase
    }

    pub fn apply(&self, s: &JonesVector) -> JonesVector {
        s.scale(self.phase)
    }
}

/// Photon counter with efficiency q.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Detector {
    q: f64,
}

impl Detector {
    pub fn new(q: f64) -> Result<Self, OpticsError> {
        if !(0.0..=1.0).contains(&q) || !q.is_finite() {
            return Err(OpticsError::InvalidEfficiency { q });
        }
        Ok(Detector { q })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// q times the presence probability; a probability for single-photon
    /// inputs, a mean count otherwise.
    pub fn detect(&self, s: &JonesVector) -> f64 {
        self.q * s.presence_probability()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn splitter_rejects_non_unitary() {
        let err = BeamSplitter::new(Mat2::diag_real(2.0, 1.0)).unwrap_err();
        assert!(matches!(err, OpticsError::NotUnitary { .. }));
    }

    #[test]
    fn splitter_single_pass_example() {
        let s = BeamSplitter::symmetric_5050();
        let input = TwoBeamState::new(JonesVector::new(c(1.0, 0.0), c(0.0, 0.0)), JonesVector::ZERO);
        let out = s.apply(&input);
        let r = 1.0 / 2.0_f64.sqrt();
        assert!((out.beam1.h - c(r, 0.0)).norm() <= 1e-15);
        assert!((out.beam2.h - c(0.0, r)).norm() <= 1e-15);
        assert_eq!(out.beam1.v, Complex64::ZERO);
        assert_eq!(out.beam2.v, Complex64::ZERO);
    }

    #[test]
    fn splitter_double_pass_example() {
        let s = BeamSplitter::symmetric_5050();
        let input = TwoBeamState::new(JonesVector::new(c(1.0, 0.0), c(0.0, 0.0)), JonesVector::ZERO);
        let out = s.apply(&s.apply(&input));
        // S^2 = i X: everything exits in beam 2 with phase i.
        assert!(out.beam1.presence_probability() <= 1e-30);
        assert!((out.beam2.h - c(0.0, 1.0)).norm() <= 1e-15);
    }

    #[test]
    fn filter_examples() {
        let id = LinearFilter::identity();
        let s = JonesVector::new(c(0.3, 0.1), c(-0.2, 0.5));
        assert_eq!(id.apply(&s), s);

        let dark = LinearFilter::absorber().apply(&s);
        assert_eq!(dark.presence_probability(), 0.0);

        let r = 1.0 / 2.0_f64.sqrt();
        let horizontal = LinearFilter::new(Mat2::diag_real(1.0, 0.0)).unwrap();
        let out = horizontal.apply(&JonesVector::new(c(r, 0.0), c(r, 0.0)));
        assert!((out.h - c(r, 0.0)).norm() <= 1e-15);
        assert_eq!(out.v, Complex64::ZERO);
        assert!((out.presence_probability() - 0.5).abs() <= 1e-15);
    }

    #[test]
    fn subunitarity_examples() {
        assert!(is_subunitary(&Mat2::IDENTITY));
        assert!(!is_subunitary(&Mat2::diag_real(2.0, 2.0)));
        let r = 1.0 / 2.0_f64.sqrt();
        let row = Mat2::new(c(r, 0.0), c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert!(is_subunitary(&row));
        assert!(LinearFilter::new(Mat2::diag_real(1.0, 1.0 + 1e-6)).is_err());
    }

    #[test]
    fn mirror_examples() {
        let m = Mirror::identity();
        let s = JonesVector::new(c(1.0, 0.0), c(0.0, 0.0));
        assert_eq!(m.apply(&s), s);

        let flip = Mirror::new(c(-1.0, 0.0)).unwrap();
        assert_eq!(flip.apply(&s).h, c(-1.0, 0.0));

        let quarter = Mirror::new(c(0.0, 1.0)).unwrap();
        let t = JonesVector::new(c(1.0, 0.0), c(1.0, 0.0));
        let out = quarter.apply(&t);
        assert_eq!(out.h, c(0.0, 1.0));
        assert!((out.presence_probability() - 2.0).abs() <= 1e-15);

        assert!(Mirror::new(c(0.5, 0.0)).is_err());
    }

    #[test]
    fn detector_examples() {
        let unit = Detector::new(1.0).unwrap();
        assert_eq!(unit.detect(&JonesVector::new(c(1.0, 0.0), c(0.0, 0.0))), 1.0);

        let off = Detector::new(0.0).unwrap();
        assert_eq!(off.detect(&JonesVector::new(c(0.3, 0.2), c(0.9, 0.0))), 0.0);

        let d = Detector::new(0.8).unwrap();
        let p = d.detect(&JonesVector::new(c(0.5, 0.0), c(0.5, 0.0)));
        assert!((p - 0.4).abs() <= 1e-15);

        assert!(Detector::new(1.5).is_err());
        assert!(Detector::new(-0.1).is_err());
    }

    fn arb_filter() -> impl Strategy<Value = LinearFilter> {
        proptest::array::uniform8(-2.0..2.0f64).prop_map(|e| {
            let raw = Mat2::new(
                Complex64::new(e[0], e[1]),
                Complex64::new(e[2], e[3]),
                Complex64::new(e[4], e[5]),
                Complex64::new(e[6], e[7]),
            );
            let [s1, _] = raw.singular_values();
            if s1 <= 1.0 {
                LinearFilter::new(raw).unwrap()
            } else {
                LinearFilter::new(raw.scale(Complex64::new(1.0 / (s1 * (1.0 + 1e-12)), 0.0))).unwrap()
            }
        })
    }

    fn arb_jones() -> impl Strategy<Value = JonesVector> {
        proptest::array::uniform4(-1.0..1.0f64)
            .prop_map(|e| JonesVector::new(Complex64::new(e[0], e[1]), Complex64::new(e[2], e[3])))
    }

    proptest! {
        #[test]
        fn splitter_conserves_presence(
            theta in 0.01..1.56f64,
            phi in 0.0..std::f64::consts::TAU,
            s in arb_jones(),
            t in arb_jones(),
        ) {
            // Parameterized unitary: [[cos, -sin e^{-i phi}], [sin e^{i phi}, cos]].
            let m = Mat2::new(
                Complex64::new(theta.cos(), 0.0),
                -Complex64::from_polar(theta.sin(), -phi),
                Complex64::from_polar(theta.sin(), phi),
                Complex64::new(theta.cos(), 0.0),
            );
            let bs = BeamSplitter::new(m).unwrap();
            let state = TwoBeamState::new(s, t);
            let out = bs.apply(&state);
            prop_assert!((out.total_presence() - state.total_presence()).abs() <= 1e-12);
        }

        #[test]
        fn filter_never_increases_presence(f in arb_filter(), s in arb_jones()) {
            let before = s.presence_probability();
            let after = f.apply(&s).presence_probability();
            prop_assert!(after <= before + 1e-12);
        }

        #[test]
        fn filter_composition_matches_product(f1 in arb_filter(), f2 in arb_filter(), s in arb_jones()) {
            let chained = f2.apply(&f1.apply(&s));
            let product = f2.matrix() * f1.matrix();
            let combined = JonesVector::from_array(product.apply(s.as_array()));
            prop_assert!((chained.h - combined.h).norm() <= 1e-12);
            prop_assert!((chained.v - combined.v).norm() <= 1e-12);
        }
    }
}
