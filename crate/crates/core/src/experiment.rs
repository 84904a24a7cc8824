//! The two-splitter interference experiment: closed-form quantum predictions
//! for the witness Delta(A1, A2), the density-matrix generalization, the
//! entangled preparation arrangement, and fringe fitting.
//!
//! Conventions: a photon enters beam 1 as `psi1` while beam 2 is dark, passes
//! splitter `sa`, one filter per arm, a mirror per arm, splitter `sb`, and a
//! detector of efficiency `q` on output beam 1. Writing c1 = t1a*t1b and
//! c2 = r1a*r2b for the two path amplitude products, the detector amplitude is
//! c1*A1*psi1 + c2*A2*psi1 and the witness closed form is
//! Delta = 2q*Re[kappa * <A1 psi1, A2 psi1>] with kappa = conj(c1)*c2.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{DetectorTap, NetElement, Netlist};
use crate::elements::{BeamSplitter, Detector, LinearFilter, Mirror};
use crate::state::{DensityMatrix, DensityVerdict, JonesVector, TwoBeamState};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("detector efficiency {q} outside [0, 1]")]
    InvalidEfficiency { q: f64 },
    #[error("density matrix rho1 is invalid: {verdict}")]
    InvalidDensity { verdict: DensityVerdict },
}

/// The input state entering beam 1 (beam 2 is dark by definition).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Source {
    Pure(JonesVector),
    Mixed(DensityMatrix),
}

impl Source {
    /// The input density matrix; the outer product for a pure source.
    pub fn density(&self) -> DensityMatrix {
        match self {
            Source::Pure(psi) => DensityMatrix::from_pure(*psi),
            Source::Mixed(rho) => *rho,
        }
    }
}

/// Fixed apparatus: the two splitters, the detector efficiency, and the
/// source. The filters are the adjustable settings and are passed per call.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub sa: BeamSplitter,
    pub sb: BeamSplitter,
    pub q: f64,
    pub source: Source,
}

impl ExperimentConfig {
    pub fn new(
        sa: BeamSplitter,
        sb: BeamSplitter,
        q: f64,
        source: Source,
    ) -> Result<Self, ExperimentError> {
        if !(0.0..=1.0).contains(&q) || !q.is_finite() {
            return Err(ExperimentError::InvalidEfficiency { q });
        }
        if let Source::Mixed(rho) = &source {
            let verdict = rho.validate();
            if !verdict.passed() {
                return Err(ExperimentError::InvalidDensity { verdict });
            }
        }
        Ok(ExperimentConfig { sa, sb, q, source })
    }

    /// The dark-port demonstrator: symmetric 50/50 splitters, q = 1,
    /// psi1 = (1, 0).
    pub fn dark_port_default() -> Self {
        ExperimentConfig {
            sa: BeamSplitter::symmetric_5050(),
            sb: BeamSplitter::symmetric_5050(),
            q: 1.0,
            source: Source::Pure(JonesVector::new(Complex64::ONE, Complex64::ZERO)),
        }
    }

    /// Path amplitude products (c1, c2) = (t1a*t1b, r1a*r2b).
    pub fn path_coefficients(&self) -> (Complex64, Complex64) {
        (self.sa.t1() * self.sb.t1(), self.sa.r1() * self.sb.r2())
    }

    /// Apparatus constant kappa = conj(t1a*t1b) * (r1a*r2b), recomputed from
    /// the splitters on every call so it can never go stale.
    pub fn kappa(&self) -> Complex64 {
        let (c1, c2) = self.path_coefficients();
        c1.conj() * c2
    }

    pub fn psi1(&self) -> Option<JonesVector> {
        match self.source {
            Source::Pure(psi) => Some(psi),
            Source::Mixed(_) => None,
        }
    }
}

/// The three detection probabilities of one witness evaluation and the
/// witness value itself.
///
/// `delta` is computed by the producing operation's defining formula: the
/// kappa closed form for the quantum predictions, the exact difference
/// p_both - p_1 - p_2 for quadrature and Monte Carlo estimates. Their
/// agreement is a tested property, not an identity of this struct.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaResult {
    pub p_both: f64,
    pub p_1: f64,
    pub p_2: f64,
    pub delta: f64,
}

/// Detection probability p(A1, A2) = q |c1 A1 psi1 + c2 A2 psi1|^2, or its
/// trace form q Re tr(rho K*K) with K = c1 A1 + c2 A2 for mixed sources.
pub fn p_quantum(cfg: &ExperimentConfig, a1: &LinearFilter, a2: &LinearFilter) -> f64 {
    let (c1, c2) = cfg.path_coefficients();
    match &cfg.source {
        Source::Pure(psi) => {
            let detector_amp = a1.apply(psi).scale(c1) + a2.apply(psi).scale(c2);
            cfg.q * detector_amp.presence_probability()
        }
        Source::Mixed(rho) => {
            let k = a1.matrix().scale(c1) + a2.matrix().scale(c2);
            cfg.q * (rho.matrix() * (k.adjoint() * k)).trace().re
        }
    }
}

/// The quantum witness. The delta field carries the closed form
/// 2q*Re[kappa * <A1 psi, A2 psi>]; the probability fields are computed
/// independently through p_quantum.
pub fn delta_quantum(cfg: &ExperimentConfig, a1: &LinearFilter, a2: &LinearFilter) -> DeltaResult {
    let delta = match &cfg.source {
        Source::Pure(psi) => {
            let overlap = a1.apply(psi).inner(a2.apply(psi));
            2.0 * cfg.q * (cfg.kappa() * overlap).re
        }
        Source::Mixed(_) => return delta_quantum_mixed(cfg, a1, a2),
    };
    DeltaResult {
        p_both: p_quantum(cfg, a1, a2),
        p_1: p_quantum(cfg, a1, &LinearFilter::absorber()),
        p_2: p_quantum(cfg, &LinearFilter::absorber(), a2),
        delta,
    }
}

/// Density-matrix form of the witness: Delta = 2q*Re[kappa * tr(rho A1*A2)].
/// Pure sources are promoted to their outer product; linear in tr(rho), so a
/// trace-m input reports m times the single-photon witness (mean counts).
pub fn delta_quantum_mixed(
    cfg: &ExperimentConfig,
    a1: &LinearFilter,
    a2: &LinearFilter,
) -> DeltaResult {
    let rho = cfg.source.density();
    let mixed_cfg = ExperimentConfig {
        source: Source::Mixed(rho),
        ..*cfg
    };
    let overlap = (rho.matrix() * (a1.matrix().adjoint() * a2.matrix()))
        .trace();
    DeltaResult {
        p_both: p_quantum(&mixed_cfg, a1, a2),
        p_1: p_quantum(&mixed_cfg, a1, &LinearFilter::absorber()),
        p_2: p_quantum(&mixed_cfg, &LinearFilter::absorber(), a2),
        delta: 2.0 * cfg.q * (cfg.kappa() * overlap).re,
    }
}

/// The entangled preparation half-arrangement: the photon enters the second
/// splitter port (beam 1 dark), so the arms carry (A1 r2a psi2, A2 t2a psi2),
/// a path-polarization entangled pair for generic filters.
pub fn prepare_entangled(
    sa: &BeamSplitter,
    a1: &LinearFilter,
    a2: &LinearFilter,
    psi2: JonesVector,
) -> TwoBeamState {
    TwoBeamState::new(
        a1.apply(&psi2.scale(sa.r2())),
        a2.apply(&psi2.scale(sa.t2())),
    )
}

/// The full two-splitter arrangement as a netlist: sa, per-arm filters,
/// per-arm unit-phase mirrors, sb, detector on beam 1.
pub fn mach_zehnder_netlist(
    cfg: &ExperimentConfig,
    a1: &LinearFilter,
    a2: &LinearFilter,
) -> Netlist {
    Netlist::new(
        2,
        vec![
            NetElement::splitter(1, 2, cfg.sa),
            NetElement::filter(1, *a1),
            NetElement::filter(2, *a2),
            NetElement::mirror(1, Mirror::identity()),
            NetElement::mirror(2, Mirror::identity()),
            NetElement::splitter(1, 2, cfg.sb),
        ],
        vec![DetectorTap {
            beam: 1,
            detector: Detector::new(cfg.q).expect("config q validated"),
        }],
    )
    .expect("fixed two-beam arrangement is structurally valid")
}

/// Least-squares fit of y ~ amplitude*cos(theta + phase) + offset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FringeFit {
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    pub max_residual: f64,
}

/// Fits a sinusoid to (settings, values) by ordinary least squares on the
/// basis {cos, sin, 1}. Needs at least 3 samples spanning distinct settings.
pub fn fit_phase_fringe(settings: &[f64], values: &[f64]) -> FringeFit {
    assert_eq!(settings.len(), values.len());
    assert!(settings.len() >= 3, "need at least 3 samples to fit a fringe");
    let n = settings.len();
    let design = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => settings[i].cos(),
        1 => settings[i].sin(),
        _ => 1.0,
    });
    let rhs = DVector::from_row_slice(values);
    let svd = design.clone().svd(true, true);
    let coef = svd
        .solve(&rhs, 1e-14)
        .expect("SVD computed with singular vectors");
    let (a, b, offset) = (coef[0], coef[1], coef[2]);
    let max_residual = (0..n)
        .map(|i| (values[i] - (a * settings[i].cos() + b * settings[i].sin() + offset)).abs())
        .fold(0.0, f64::max);
    FringeFit {
        amplitude: a.hypot(b),
        phase: (-b).atan2(a),
        offset,
        max_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat2::Mat2;
    use crate::circuit::detection_probabilities;
    use crate::circuit::NBeamState;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kappa_of_dark_port_config() {
        let cfg = ExperimentConfig::dark_port_default();
        let kappa = cfg.kappa();
        assert!((kappa - c(-0.25, 0.0)).norm() <= 1e-15);
    }

    #[test]
    fn p_quantum_examples() {
        let cfg = ExperimentConfig::dark_port_default();
        let id = LinearFilter::identity();
        let zero = LinearFilter::absorber();

        assert!(p_quantum(&cfg, &id, &id) <= 1e-30);
        assert!((p_quantum(&cfg, &id, &zero) - 0.25).abs() <= 1e-15);
        assert!((p_quantum(&cfg, &zero, &id) - 0.25).abs() <= 1e-15);
        assert_eq!(p_quantum(&cfg, &zero, &zero), 0.0);
    }

    #[test]
    fn delta_quantum_dark_port() {
        let cfg = ExperimentConfig::dark_port_default();
        let id = LinearFilter::identity();
        let r = delta_quantum(&cfg, &id, &id);
        assert!(r.p_both.abs() <= 1e-15);
        assert!((r.p_1 - 0.25).abs() <= 1e-15);
        assert!((r.p_2 - 0.25).abs() <= 1e-15);
        assert!((r.delta + 0.5).abs() <= 1e-15);
    }

    #[test]
    fn delta_vanishes_for_absorber_or_orthogonal_settings() {
        let cfg = ExperimentConfig::dark_port_default();
        let id = LinearFilter::identity();
        let zero = LinearFilter::absorber();
        assert_eq!(delta_quantum(&cfg, &zero, &id).delta, 0.0);
        assert_eq!(delta_quantum(&cfg, &id, &zero).delta, 0.0);

        let h = LinearFilter::new(Mat2::diag_real(1.0, 0.0)).unwrap();
        let v = LinearFilter::new(Mat2::diag_real(0.0, 1.0)).unwrap();
        let r = delta_quantum(&cfg, &h, &v);
        assert_eq!(r.delta, 0.0);
        assert!((r.p_both - r.p_1 - r.p_2).abs() <= 1e-15);
    }

    #[test]
    fn mixed_matches_pure_and_scales() {
        let psi = JonesVector::new(c(0.6, 0.1), c(-0.3, 0.4));
        let cfg = ExperimentConfig::new(
            BeamSplitter::symmetric_5050(),
            BeamSplitter::symmetric_5050(),
            0.9,
            Source::Pure(psi),
        )
        .unwrap();
        let a1 = LinearFilter::polarizer(0.3);
        let a2 = LinearFilter::polarizer(1.1).phase_shifted(0.7);

        let pure = delta_quantum(&cfg, &a1, &a2);
        let mixed = delta_quantum_mixed(&cfg, &a1, &a2);
        assert!((pure.delta - mixed.delta).abs() <= 1e-12);
        assert!((pure.p_both - mixed.p_both).abs() <= 1e-12);

        let rho10 = DensityMatrix::from_pure(psi).scale(10.0);
        let cfg10 = ExperimentConfig::new(cfg.sa, cfg.sb, cfg.q, Source::Mixed(rho10)).unwrap();
        let scaled = delta_quantum_mixed(&cfg10, &a1, &a2);
        assert!((scaled.delta - 10.0 * mixed.delta).abs() <= 1e-12);
    }

    #[test]
    fn unpolarized_mixed_dark_port() {
        let rho = DensityMatrix::new(Mat2::diag_real(0.5, 0.5));
        let cfg = ExperimentConfig::new(
            BeamSplitter::symmetric_5050(),
            BeamSplitter::symmetric_5050(),
            1.0,
            Source::Mixed(rho),
        )
        .unwrap();
        let id = LinearFilter::identity();
        let r = delta_quantum_mixed(&cfg, &id, &id);
        assert!((r.delta + 0.5).abs() <= 1e-15);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let s = BeamSplitter::symmetric_5050();
        assert!(matches!(
            ExperimentConfig::new(s, s, 1.5, Source::Pure(JonesVector::ZERO)),
            Err(ExperimentError::InvalidEfficiency { .. })
        ));
        let bad = DensityMatrix::new(Mat2::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)));
        assert!(matches!(
            ExperimentConfig::new(s, s, 1.0, Source::Mixed(bad)),
            Err(ExperimentError::InvalidDensity { .. })
        ));
    }

    #[test]
    fn prepare_entangled_examples() {
        let sa = BeamSplitter::symmetric_5050();
        let zero = LinearFilter::absorber();
        let dark = prepare_entangled(&sa, &zero, &zero, JonesVector::new(c(1.0, 0.0), c(0.0, 0.0)));
        assert_eq!(dark.total_presence(), 0.0);

        let r = 1.0 / 2.0_f64.sqrt();
        let psi2 = JonesVector::new(c(r, 0.0), c(r, 0.0));
        let h = LinearFilter::new(Mat2::diag_real(1.0, 0.0)).unwrap();
        let v = LinearFilter::new(Mat2::diag_real(0.0, 1.0)).unwrap();
        let out = prepare_entangled(&sa, &h, &v, psi2);
        assert!((out.beam1.h - c(0.0, 0.5)).norm() <= 1e-15);
        assert!(out.beam1.v.norm() <= 1e-15);
        assert!(out.beam2.h.norm() <= 1e-15);
        assert!((out.beam2.v - c(0.5, 0.0)).norm() <= 1e-15);

        let id = LinearFilter::identity();
        let psi2 = JonesVector::new(c(0.3, 0.4), c(-0.5, 0.1));
        let out = prepare_entangled(&sa, &id, &id, psi2);
        assert!((out.total_presence() - psi2.presence_probability()).abs() <= 1e-12);
    }

    #[test]
    fn netlist_agrees_with_closed_form() {
        let cfg = ExperimentConfig::dark_port_default();
        let a1 = LinearFilter::polarizer(0.4);
        let a2 = LinearFilter::polarizer(1.3).phase_shifted(0.2);
        let net = mach_zehnder_netlist(&cfg, &a1, &a2);
        let input = NBeamState::single(2, 1, cfg.psi1().unwrap());
        let p_net = detection_probabilities(&net, &input).unwrap()[0].1;
        assert!((p_net - p_quantum(&cfg, &a1, &a2)).abs() <= 1e-12);
    }

    #[test]
    fn fringe_fit_recovers_sinusoid() {
        let thetas: Vec<f64> = (0..48).map(|i| i as f64 * std::f64::consts::TAU / 48.0).collect();
        let values: Vec<f64> = thetas.iter().map(|t| 0.37 * (t + 0.9).cos() - 0.11).collect();
        let fit = fit_phase_fringe(&thetas, &values);
        assert!((fit.amplitude - 0.37).abs() <= 1e-12);
        assert!((fit.phase - 0.9).abs() <= 1e-12);
        assert!((fit.offset + 0.11).abs() <= 1e-12);
        assert!(fit.max_residual <= 1e-12);
    }

    proptest! {
        #[test]
        fn witness_is_homogeneous_in_filter_scale(s in 0.0..1.0f64, th1 in 0.0..3.2f64, th2 in 0.0..3.2f64) {
            let cfg = ExperimentConfig::dark_port_default();
            let a1 = LinearFilter::polarizer(th1);
            let a2 = LinearFilter::polarizer(th2);
            let scaled = LinearFilter::new(a1.matrix().scale(c(s, 0.0))).unwrap();
            let base = delta_quantum(&cfg, &a1, &a2).delta;
            let got = delta_quantum(&cfg, &scaled, &a2).delta;
            prop_assert!((got - s * base).abs() <= 1e-12);
        }

        #[test]
        fn witness_is_additive_in_second_setting(th in 0.0..3.2f64, w in 0.0..0.5f64) {
            let cfg = ExperimentConfig::dark_port_default();
            let a1 = LinearFilter::polarizer(th);
            // b and cmat are scaled so b, cmat, and b + cmat are all subunitary.
            let b = LinearFilter::new(Mat2::diag_real(w, 0.0)).unwrap();
            let cmat = LinearFilter::new(Mat2::diag_real(0.0, 1.0 - w)).unwrap();
            let sum = LinearFilter::new(b.matrix() + cmat.matrix()).unwrap();
            let lhs = delta_quantum(&cfg, &a1, &sum).delta;
            let rhs = delta_quantum(&cfg, &a1, &b).delta + delta_quantum(&cfg, &a1, &cmat).delta;
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }

        #[test]
        fn phase_shift_rotates_witness(theta in 0.0..std::f64::consts::TAU) {
            let cfg = ExperimentConfig::dark_port_default();
            let a1 = LinearFilter::identity();
            let a2 = LinearFilter::identity();
            let psi = cfg.psi1().unwrap();
            let expected = 2.0 * cfg.q
                * (cfg.kappa() * Complex64::from_polar(1.0, theta) * a1.apply(&psi).inner(a2.apply(&psi))).re;
            let got = delta_quantum(&cfg, &a1, &a2.phase_shifted(theta)).delta;
            prop_assert!((got - expected).abs() <= 1e-12);
        }
    }
}
