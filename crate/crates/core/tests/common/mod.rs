//! Shared random generators for the acceptance suite. All randomness is
//! ChaCha8-seeded so every run sees the same cases.

use interferolab::elements::{BeamSplitter, LinearFilter};
use interferolab::experiment::{ExperimentConfig, Source};
use interferolab::mat2::Mat2;
use interferolab::reck::haar_unitary;
use interferolab::state::{DensityMatrix, JonesVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian, E|z|^2 = 1.
pub fn gaussian_c<R: Rng>(rng: &mut R) -> Complex64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    Complex64::from_polar((-u1.ln()).sqrt(), std::f64::consts::TAU * u2)
}

pub fn haar_mat2<R: Rng>(rng: &mut R) -> Mat2 {
    let u = haar_unitary(2, rng);
    Mat2::new(u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)])
}

pub fn random_splitter<R: Rng>(rng: &mut R) -> BeamSplitter {
    BeamSplitter::new(haar_mat2(rng)).expect("Haar matrices are unitary")
}

/// Random subunitary filter with top singular value uniform in [0, 1).
pub fn random_filter<R: Rng>(rng: &mut R) -> LinearFilter {
    loop {
        let g = Mat2::new(
            gaussian_c(rng),
            gaussian_c(rng),
            gaussian_c(rng),
            gaussian_c(rng),
        );
        let sigma = g.singular_values()[0];
        if sigma < 1e-9 {
            continue;
        }
        let target: f64 = rng.random();
        return LinearFilter::new(g.scale(Complex64::new(target / sigma, 0.0)))
            .expect("scaled below unit singular value");
    }
}

/// Random Jones vector with |psi| < 1 (presence probability below 1).
pub fn random_jones_bounded<R: Rng>(rng: &mut R) -> JonesVector {
    loop {
        let h = gaussian_c(rng);
        let v = gaussian_c(rng);
        let norm = (h.norm_sqr() + v.norm_sqr()).sqrt();
        if norm < 1e-9 {
            continue;
        }
        let radius: f64 = rng.random();
        let scale = Complex64::new(radius / norm, 0.0);
        return JonesVector::new(h * scale, v * scale);
    }
}

pub fn random_config<R: Rng>(rng: &mut R) -> ExperimentConfig {
    ExperimentConfig::new(
        random_splitter(rng),
        random_splitter(rng),
        rng.random(),
        Source::Pure(random_jones_bounded(rng)),
    )
    .expect("generated parameters are valid")
}

/// Random valid density matrix with the given trace, via a Gram matrix.
pub fn random_density<R: Rng>(rng: &mut R, trace: f64) -> DensityMatrix {
    loop {
        let g = Mat2::new(
            gaussian_c(rng),
            gaussian_c(rng),
            gaussian_c(rng),
            gaussian_c(rng),
        );
        let gram = g * g.adjoint();
        let tr = gram.trace().re;
        if tr < 1e-9 {
            continue;
        }
        return DensityMatrix::new(gram.scale(Complex64::new(trace / tr, 0.0)));
    }
}
