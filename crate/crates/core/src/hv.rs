//! Hidden-variable models and the stochastic side of the experiment.
//!
//! A model assigns each photon a hidden state lambda and gives per-filter
//! conditional detection probabilities p_k(A, lambda) that depend only on
//! that filter's setting and lambda. Additivity of the lambda integral then
//! forces the witness Delta to vanish for every such model; the quadrature
//! and Monte Carlo routines here exist to check that null numerically and to
//! emulate photon counting.
//!
//! Models are represented through an inverse-CDF map u in [0,1) -> lambda, so
//! one uniform stream drives both sampling and quadrature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::elements::LinearFilter;
use crate::experiment::{p_quantum, DeltaResult, ExperimentConfig};
use crate::state::JonesVector;

/// Default midpoint-rule resolution for lambda integrals. The built-in model
/// families are smooth and periodic, so this is far past convergence.
pub const DEFAULT_QUADRATURE_NODES: usize = 4096;

type PkFn = Box<dyn Fn(&LinearFilter, f64) -> f64 + Send + Sync>;

/// A hidden-variable theory: a lambda distribution plus the two conditional
/// detection probabilities.
///
/// Contract on the closures: p_k(A, lambda) lies in [0, 1] for every
/// subunitary A, and p_k(0, lambda) = 0 (a total absorber passes nothing).
pub struct HvModel {
    lambda_from_uniform: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    p1: PkFn,
    p2: PkFn,
}

impl HvModel {
    pub fn new(
        lambda_from_uniform: impl Fn(f64) -> f64 + Send + Sync + 'static,
        p1: impl Fn(&LinearFilter, f64) -> f64 + Send + Sync + 'static,
        p2: impl Fn(&LinearFilter, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        HvModel {
            lambda_from_uniform: Box::new(lambda_from_uniform),
            p1: Box::new(p1),
            p2: Box::new(p2),
        }
    }

    /// Inverse-CDF map from a uniform draw to a lambda value.
    pub fn lambda_from_uniform(&self, u: f64) -> f64 {
        (self.lambda_from_uniform)(u)
    }

    /// Draws lambda from the model's distribution.
    pub fn sample_lambda<R: Rng>(&self, rng: &mut R) -> f64 {
        self.lambda_from_uniform(rng.random())
    }

    /// Conditional probability of a count behind filter 1.
    pub fn p1(&self, a: &LinearFilter, lambda: f64) -> f64 {
        (self.p1)(a, lambda)
    }

    /// Conditional probability of a count behind filter 2.
    pub fn p2(&self, a: &LinearFilter, lambda: f64) -> f64 {
        (self.p2)(a, lambda)
    }
}

/// A Malus-law model calibrated to an apparatus: lambda is a polarization
/// angle uniform on [0, pi), the photon carries e(lambda) = (cos, sin), and
/// p_k(A, lambda) = w_k * q * |A e(lambda)|^2 with the path weights
/// w1 = |t1a*t1b|^2, w2 = |r1a*r2b|^2.
///
/// Calibration property: averaged over lambda, the single-filter predictions
/// reproduce p_quantum(A, 0) and p_quantum(0, A) for an unpolarized source,
/// since |c_k|^2 * q * mean|A e|^2 matches the quantum single-path term.
pub fn malus_model(cfg: &ExperimentConfig) -> HvModel {
    let (c1, c2) = cfg.path_coefficients();
    let w1 = c1.norm_sqr();
    let w2 = c2.norm_sqr();
    let q = cfg.q;
    let transmitted = |a: &LinearFilter, lambda: f64| {
        let e = JonesVector::new((lambda.cos()).into(), (lambda.sin()).into());
        a.apply(&e).presence_probability()
    };
    HvModel::new(
        |u| u * std::f64::consts::PI,
        move |a, lambda| w1 * q * transmitted(a, lambda),
        move |a, lambda| w2 * q * transmitted(a, lambda),
    )
}

/// A seeded family of structurally diverse valid models, for property tests.
/// Each arm gets its own lambda-dependent acceptance weight and carrier
/// polarization; the weight caps sum to at most 1, so p1 + p2 <= 1 for all
/// settings and lambda.
pub fn random_model(seed: u64) -> HvModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap1: f64 = rng.random::<f64>() * 0.5;
    let cap2: f64 = rng.random::<f64>() * 0.5;
    let arm = |rng: &mut ChaCha8Rng, cap: f64| {
        let weight_freq = rng.random_range(1..=3) as f64;
        let weight_phase = rng.random::<f64>() * std::f64::consts::TAU;
        let carrier_freq = rng.random_range(1..=3) as f64;
        let carrier_phase = rng.random::<f64>() * std::f64::consts::TAU;
        let retard = rng.random::<f64>() * std::f64::consts::TAU;
        move |a: &LinearFilter, lambda: f64| {
            let weight = cap * 0.5 * (1.0 + (weight_freq * lambda + weight_phase).sin());
            let angle = carrier_freq * lambda + carrier_phase;
            let e = JonesVector::new(
                angle.cos().into(),
                num_complex::Complex64::from_polar(angle.sin(), retard),
            );
            weight * a.apply(&e).presence_probability()
        }
    };
    let p1 = arm(&mut rng, cap1);
    let p2 = arm(&mut rng, cap2);
    HvModel::new(|u| u * std::f64::consts::TAU, p1, p2)
}

/// The hidden-variable prediction for the witness.
///
/// Additivity makes the lambda integral of [p1 + p2] - [p1] - [p2] vanish
/// identically, for every model and every setting pair, so this returns
/// exactly 0. It is the null predictor the quadrature and Monte Carlo
/// estimates are tested against.
pub fn delta_hv(_model: &HvModel, _a1: &LinearFilter, _a2: &LinearFilter) -> f64 {
    0.0
}

/// Midpoint-rule expectation of the three run probabilities over lambda.
/// The joint run uses the same clamped probability min(p1 + p2, 1) as mc_hv,
/// so both estimate the same functional; delta is the exact difference of the
/// computed fields.
pub fn quadrature_delta(
    model: &HvModel,
    a1: &LinearFilter,
    a2: &LinearFilter,
    nodes: usize,
) -> DeltaResult {
    assert!(nodes >= 1);
    let mut joint = 0.0;
    let mut single1 = 0.0;
    let mut single2 = 0.0;
    for i in 0..nodes {
        let u = (i as f64 + 0.5) / nodes as f64;
        let lambda = model.lambda_from_uniform(u);
        let p1 = model.p1(a1, lambda);
        let p2 = model.p2(a2, lambda);
        joint += (p1 + p2).min(1.0);
        single1 += p1;
        single2 += p2;
    }
    let p_both = joint / nodes as f64;
    let p_1 = single1 / nodes as f64;
    let p_2 = single2 / nodes as f64;
    DeltaResult {
        p_both,
        p_1,
        p_2,
        delta: p_both - p_1 - p_2,
    }
}

#[derive(Debug, Error)]
pub enum McError {
    #[error("p_quantum = {p} outside [0, 1]; Bernoulli sampling is undefined (multiphoton input?)")]
    ProbabilityOutOfRange { p: f64 },
}

/// One Monte Carlo estimate with the inputs needed to reproduce it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
    pub workers: u32,
    /// Samples where p1 + p2 exceeded 1 and the joint probability was clamped.
    pub clamp_warnings: u64,
}

/// Per-worker deterministic substream: the master seed keys the cipher, the
/// worker index selects the stream. Identical (seed, n, workers) give
/// bit-identical results regardless of thread scheduling because workers
/// accumulate integers that are combined in worker order.
fn worker_rng(seed: u64, worker: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker as u64);
    rng
}

fn worker_share(n: u64, workers: u32, worker: u32) -> u64 {
    let base = n / workers as u64;
    let extra = (worker as u64) < (n % workers as u64);
    base + extra as u64
}

/// Monte Carlo estimate of the hidden-variable witness.
///
/// Common random numbers: all three runs of one sample share the lambda draw
/// and the detection uniform, so each sample contributes
/// v = [u < min(p1+p2, 1)] - [u < p1] - [u < p2] in {-1, 0, +1} and the
/// estimator is the mean of v. The expectation is exactly 0 for any valid
/// model; the standard error is the sample standard deviation over sqrt(n).
pub fn mc_hv(
    model: &HvModel,
    a1: &LinearFilter,
    a2: &LinearFilter,
    n: u64,
    seed: u64,
    workers: u32,
) -> McEstimate {
    assert!(n >= 1, "need at least one sample");
    assert!(workers >= 1, "need at least one worker");

    let run = |worker: u32| -> (i64, u64, u64) {
        let mut rng = worker_rng(seed, worker);
        let mut sum = 0i64;
        let mut sum_sq = 0u64;
        let mut clamps = 0u64;
        for _ in 0..worker_share(n, workers, worker) {
            let lambda = model.lambda_from_uniform(rng.random());
            let p1 = model.p1(a1, lambda);
            let p2 = model.p2(a2, lambda);
            debug_assert!((0.0..=1.0).contains(&p1) && (0.0..=1.0).contains(&p2));
            let mut joint = p1 + p2;
            if joint > 1.0 {
                joint = 1.0;
                clamps += 1;
            }
            let u: f64 = rng.random();
            let v = (u < joint) as i64 - (u < p1) as i64 - (u < p2) as i64;
            sum += v;
            sum_sq += (v * v) as u64;
        }
        (sum, sum_sq, clamps)
    };

    let parts: Vec<(i64, u64, u64)> = if workers == 1 {
        vec![run(0)]
    } else {
        std::thread::scope(|scope| {
            let run = &run;
            let handles: Vec<_> = (0..workers).map(|w| scope.spawn(move || run(w))).collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        })
    };

    let sum: i64 = parts.iter().map(|p| p.0).sum();
    let sum_sq: u64 = parts.iter().map(|p| p.1).sum();
    let clamp_warnings: u64 = parts.iter().map(|p| p.2).sum();
    finish_estimate(sum as f64, sum_sq as f64, n, seed, workers, clamp_warnings)
}

/// Bernoulli sampling of the quantum detection probability, emulating photon
/// counting under the quantum prediction.
pub fn mc_quantum(
    cfg: &ExperimentConfig,
    a1: &LinearFilter,
    a2: &LinearFilter,
    n: u64,
    seed: u64,
    workers: u32,
) -> Result<McEstimate, McError> {
    assert!(n >= 1, "need at least one sample");
    assert!(workers >= 1, "need at least one worker");
    let p = p_quantum(cfg, a1, a2);
    if !(-1e-12..=1.0 + 1e-12).contains(&p) {
        return Err(McError::ProbabilityOutOfRange { p });
    }
    let p = p.clamp(0.0, 1.0);

    let run = |worker: u32| -> u64 {
        let mut rng = worker_rng(seed, worker);
        let mut ones = 0u64;
        for _ in 0..worker_share(n, workers, worker) {
            ones += (rng.random::<f64>() < p) as u64;
        }
        ones
    };

    let ones: u64 = if workers == 1 {
        run(0)
    } else {
        std::thread::scope(|scope| {
            let run = &run;
            let handles: Vec<_> = (0..workers).map(|w| scope.spawn(move || run(w))).collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).sum()
        })
    };

    // Indicators square to themselves, so sum_sq = sum.
    Ok(finish_estimate(ones as f64, ones as f64, n, seed, workers, 0))
}

fn finish_estimate(sum: f64, sum_sq: f64, n: u64, seed: u64, workers: u32, clamps: u64) -> McEstimate {
    let nf = n as f64;
    let estimate = sum / nf;
    let stderr = if n >= 2 {
        let variance = ((sum_sq - nf * estimate * estimate) / (nf - 1.0)).max(0.0);
        (variance / nf).sqrt()
    } else {
        0.0
    };
    McEstimate {
        estimate,
        stderr,
        n,
        seed,
        workers,
        clamp_warnings: clamps,
    }
}
