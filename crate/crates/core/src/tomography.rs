//! Density-matrix inference from witness measurements.
//!
//! Each measurement is a filter pair (A1, A2) together with an observed
//! witness value. The witness is linear in the source density matrix, so a
//! set of measurements fixes rho through a linear system in the four real
//! coordinates (rho00, rho11, Re rho10, Im rho10). The estimate is returned
//! as measured, without projection onto the physical set; run validate() on
//! the result to check physicality.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::elements::LinearFilter;
use crate::experiment::ExperimentConfig;
use crate::mat2::Mat2;
use crate::state::DensityMatrix;

/// One calibrated witness observation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measurement {
    pub a1: LinearFilter,
    pub a2: LinearFilter,
    pub delta: f64,
}

/// Relative singular-value cutoff for the design rank test.
const RANK_TOL: f64 = 1e-10;

/// Real coordinates of rho, in the order used throughout this module.
pub const COORDINATE_LABELS: [&str; 4] = ["rho00", "rho11", "Re rho10", "Im rho10"];

fn directions_display(dirs: &[[f64; 4]]) -> String {
    dirs.iter()
        .map(|d| {
            let terms: Vec<String> = d
                .iter()
                .zip(COORDINATE_LABELS)
                .filter(|(v, _)| v.abs() > 1e-6)
                .map(|(v, label)| format!("{v:+.3} {label}"))
                .collect();
            terms.join(" ")
        })
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum TomographyError {
    #[error("no measurements supplied")]
    Empty,
    #[error("witness sensitivity 2*q*kappa is zero for this apparatus; no setting can probe the source")]
    ZeroSensitivity,
    #[error(
        "measurement design has rank {rank} < 4; unconstrained: {}",
        directions_display(.null_directions)
    )]
    RankDeficient {
        rank: usize,
        null_directions: Vec<[f64; 4]>,
    },
}

/// Coordinate basis: rho = x0*B0 + x1*B1 + x2*B2 + x3*B3 gives
/// rho00 = x0, rho11 = x1, rho10 = x2 + i*x3.
fn coordinate_basis() -> [Mat2; 4] {
    let i = Complex64::new(0.0, 1.0);
    [
        Mat2::diag_real(1.0, 0.0),
        Mat2::diag_real(0.0, 1.0),
        Mat2::new(Complex64::ZERO, Complex64::ONE, Complex64::ONE, Complex64::ZERO),
        Mat2::new(Complex64::ZERO, -i, i, Complex64::ZERO),
    ]
}

/// Row of the design matrix for one filter pair: the witness response to each
/// coordinate of rho.
fn design_row(cfg: &ExperimentConfig, a1: &LinearFilter, a2: &LinearFilter) -> [f64; 4] {
    let kappa = cfg.kappa();
    let m = a1.matrix().adjoint() * a2.matrix();
    let mut row = [0.0; 4];
    for (k, b) in coordinate_basis().iter().enumerate() {
        row[k] = 2.0 * cfg.q * (kappa * (*b * m).trace()).re;
    }
    row
}

/// Least-squares estimate of the source density matrix from witness data.
///
/// The apparatus in `cfg` fixes the response coefficients; the source stored
/// in `cfg` is ignored. Requires the design to have full rank 4, otherwise
/// the unconstrained coordinate directions are reported.
pub fn infer_density(
    measurements: &[Measurement],
    cfg: &ExperimentConfig,
) -> Result<DensityMatrix, TomographyError> {
    if measurements.is_empty() {
        return Err(TomographyError::Empty);
    }
    if 2.0 * cfg.q * cfg.kappa().norm() == 0.0 {
        return Err(TomographyError::ZeroSensitivity);
    }

    let mut rows = Vec::with_capacity(4 * measurements.len());
    for m in measurements {
        rows.extend_from_slice(&design_row(cfg, &m.a1, &m.a2));
    }
    let f = DMatrix::from_row_slice(measurements.len(), 4, &rows);
    let b = DVector::from_iterator(measurements.len(), measurements.iter().map(|m| m.delta));

    let svd = f.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = RANK_TOL * sigma_max;
    let rank = svd.singular_values.iter().filter(|s| **s > cutoff).count();
    if rank < 4 {
        // Economy SVD of a tall-but-narrow or short matrix does not expose the
        // full null space, so read it off the 4x4 normal matrix instead.
        let ftf = f.transpose() * &f;
        let eig = nalgebra::linalg::SymmetricEigen::new(ftf);
        let mut null_directions = Vec::new();
        for j in 0..4 {
            if eig.eigenvalues[j] <= cutoff * cutoff {
                let col = eig.eigenvectors.column(j);
                let mut dir = [col[0], col[1], col[2], col[3]];
                // Sign convention: largest component positive.
                let lead = dir
                    .iter()
                    .cloned()
                    .fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
                if lead < 0.0 {
                    dir.iter_mut().for_each(|v| *v = -*v);
                }
                null_directions.push(dir);
            }
        }
        return Err(TomographyError::RankDeficient {
            rank,
            null_directions,
        });
    }

    let x = svd.solve(&b, cutoff).expect("SVD factors requested");
    let basis = coordinate_basis();
    let mut rho = Mat2::ZERO;
    for (k, bk) in basis.iter().enumerate() {
        rho = rho + bk.scale(Complex64::new(x[k], 0.0));
    }
    Ok(DensityMatrix::new(rho))
}

/// A four-setting design that spans all of rho for any apparatus with nonzero
/// sensitivity: A1 is the identity and A2 runs over a Hermitian basis rotated
/// by the phase of the apparatus constant, so the witness sees the real part
/// of a real quantity and no coordinate is projected out.
pub fn default_design(
    cfg: &ExperimentConfig,
) -> Result<Vec<(LinearFilter, LinearFilter)>, TomographyError> {
    let kappa = cfg.kappa();
    if 2.0 * cfg.q * kappa.norm() == 0.0 {
        return Err(TomographyError::ZeroSensitivity);
    }
    let phase = kappa.conj() / kappa.norm();
    let i = Complex64::new(0.0, 1.0);
    let probes = [
        Mat2::IDENTITY,
        Mat2::new(Complex64::ZERO, Complex64::ONE, Complex64::ONE, Complex64::ZERO),
        Mat2::new(Complex64::ZERO, -i, i, Complex64::ZERO),
        Mat2::diag_real(1.0, -1.0),
    ];
    Ok(probes
        .iter()
        .map(|p| {
            let a2 = LinearFilter::new(p.scale(phase)).expect("unit-phase rotation of a unitary");
            (LinearFilter::identity(), a2)
        })
        .collect())
}
