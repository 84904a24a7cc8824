//! Jones-calculus simulation of single-photon interferometry.
//!
//! The crate models a two-beam interferometer with polarization filters in
//! its arms, computes the interference witness
//! Delta = p(A1,A2) - p(A1,0) - p(0,A2) under both quantum mechanics and
//! additive hidden-variable models, and provides the surrounding lab bench:
//! an n-beam netlist engine, Monte Carlo photon counting, density-matrix
//! tomography from witness data, and a compiler from n x n (sub)unitary
//! operators to staged two-mode circuits.
//!
//! Amplitudes are unnormalized: |psi|^2 is the probability that the photon
//! is present in the reference time interval, so states with total presence
//! below 1 are meaningful and density matrices may carry trace above 1 for
//! multiphoton sources.

pub mod circuit;
pub mod elements;
pub mod experiment;
pub mod hv;
pub mod io;
pub mod mat2;
pub mod reck;
pub mod state;
pub mod tomography;

pub use circuit::{detection_probabilities, evolve, NBeamState, Netlist};
pub use elements::{BeamSplitter, Detector, LinearFilter, Mirror, OpticsError};
pub use experiment::{
    delta_quantum, delta_quantum_mixed, fit_phase_fringe, p_quantum, DeltaResult,
    ExperimentConfig, Source,
};
pub use hv::{malus_model, mc_hv, mc_quantum, quadrature_delta, HvModel, McEstimate};
pub use mat2::Mat2;
pub use reck::{compile, decompose_subunitary, decompose_unitary, to_netlist, TargetOperator};
pub use state::{DensityMatrix, JonesVector, TwoBeamState};
pub use tomography::{default_design, infer_density, Measurement};
