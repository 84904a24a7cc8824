//! Compilation of n-mode linear operators into staged two-mode circuits.
//!
//! A unitary is factored by forward Givens elimination: working down each
//! column, a two-mode rotation zeroes one below-diagonal entry, and the
//! leftover diagonal becomes per-mode phases. Undoing the product gives the
//! operator as phases followed by at most n(n-1)/2 mixers. A subunitary
//! operator goes through its SVD: compile V^H, attenuate each mode by its
//! singular value, compile U.
//!
//! Stage `modes` and `eliminated` indices are 0-based matrix coordinates;
//! conversion to 1-based beam numbering happens in `to_netlist`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::circuit::{DetectorTap, NetElement, Netlist};
use crate::elements::{BeamSplitter, LinearFilter, Mirror};
use crate::mat2::Mat2;

/// Detection threshold separating "unitary" from "needs attenuation", and the
/// compiled-circuit accuracy bound `verify` enforces.
pub const COMPILE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Unitary,
    Subunitary,
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("operator matrix is empty")]
    Empty,
    #[error("operator matrix is {rows}x{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not unitary: max |U*U - I| entry is {deviation:e}")]
    NotUnitary { deviation: f64 },
    #[error("matrix is not subunitary: max eigenvalue of A*A is {max_eigenvalue} > 1")]
    NotSubunitary { max_eigenvalue: f64 },
    #[error("singular value {value} exceeds 1; passive elements cannot amplify")]
    SingularValueTooLarge { value: f64 },
}

/// A validated compilation input with its detected kind.
#[derive(Clone, Debug)]
pub struct TargetOperator {
    matrix: DMatrix<Complex64>,
    kind: OperatorKind,
}

impl TargetOperator {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self, CompileError> {
        check_square(&matrix)?;
        let kind = if unitarity_deviation(&matrix) <= COMPILE_TOL {
            OperatorKind::Unitary
        } else {
            let sigma_max = max_singular_value(&matrix);
            if sigma_max * sigma_max > 1.0 + COMPILE_TOL {
                return Err(CompileError::NotSubunitary {
                    max_eigenvalue: sigma_max * sigma_max,
                });
            }
            OperatorKind::Subunitary
        };
        Ok(TargetOperator { matrix, kind })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }
}

/// One physical layer of the compiled circuit, applied in list order.
#[derive(Clone, Debug)]
pub enum Stage {
    /// Two-mode unitary acting on the ordered mode pair.
    Mixer {
        modes: (usize, usize),
        matrix: Mat2,
        /// Below-diagonal entry of the target this mixer's inverse zeroed.
        eliminated: Option<(usize, usize)>,
    },
    /// Unit-modulus phase on one mode.
    Phase { mode: usize, phase: Complex64 },
    /// Real loss factor in [0, 1] on one mode.
    Attenuation { mode: usize, factor: f64 },
}

#[derive(Clone, Debug)]
pub struct CompiledCircuit {
    pub n_modes: usize,
    pub stages: Vec<Stage>,
}

impl CompiledCircuit {
    pub fn mixer_count(&self) -> usize {
        self.stages
            .iter()
            .filter(|s| matches!(s, Stage::Mixer { .. }))
            .count()
    }

    pub fn attenuation_factors(&self) -> Vec<f64> {
        self.stages
            .iter()
            .filter_map(|s| match s {
                Stage::Attenuation { factor, .. } => Some(*factor),
                _ => None,
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyReport {
    pub max_error: f64,
    pub pass: bool,
}

fn check_square(m: &DMatrix<Complex64>) -> Result<(), CompileError> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(CompileError::Empty);
    }
    if m.nrows() != m.ncols() {
        return Err(CompileError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let gram = m.adjoint() * m;
    let n = m.ncols();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { Complex64::ONE } else { Complex64::ZERO };
            dev = dev.max((gram[(i, j)] - target).norm());
        }
    }
    dev
}

fn max_singular_value(m: &DMatrix<Complex64>) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Factors a unitary into phases followed by two-mode mixers.
pub fn decompose_unitary(u: &DMatrix<Complex64>) -> Result<CompiledCircuit, CompileError> {
    check_square(u)?;
    let deviation = unitarity_deviation(u);
    if deviation > COMPILE_TOL {
        return Err(CompileError::NotUnitary { deviation });
    }

    let n = u.nrows();
    let mut a = u.clone();
    // Inverted rotations, in elimination order; each zeroed a[(r, c)].
    let mut givens: Vec<Stage> = Vec::new();

    for c in 0..n {
        for r in (c + 1)..n {
            let y = a[(r, c)];
            if y == Complex64::ZERO {
                continue;
            }
            let x = a[(c, c)];
            let r_hat = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let g = [
                [x.conj() / r_hat, y.conj() / r_hat],
                [-y / r_hat, x / r_hat],
            ];
            for k in (c + 1)..n {
                let top = a[(c, k)];
                let bot = a[(r, k)];
                a[(c, k)] = g[0][0] * top + g[0][1] * bot;
                a[(r, k)] = g[1][0] * top + g[1][1] * bot;
            }
            a[(c, c)] = Complex64::new(r_hat, 0.0);
            a[(r, c)] = Complex64::ZERO;
            // The circuit applies the inverse rotation, the adjoint of g.
            givens.push(Stage::Mixer {
                modes: (c, r),
                matrix: Mat2::new(g[0][0].conj(), g[1][0].conj(), g[0][1].conj(), g[1][1].conj()),
                eliminated: Some((r, c)),
            });
        }
    }

    let mut stages: Vec<Stage> = Vec::with_capacity(n + givens.len());
    for mode in 0..n {
        let d = a[(mode, mode)];
        let phase = if d.norm() == 0.0 {
            Complex64::ONE
        } else {
            d / d.norm()
        };
        stages.push(Stage::Phase { mode, phase });
    }
    stages.extend(givens.into_iter().rev());
    Ok(CompiledCircuit { n_modes: n, stages })
}

/// Factors a subunitary operator as compile(V^H), per-mode attenuations,
/// compile(U), from the SVD M = U diag(sigma) V^H.
pub fn decompose_subunitary(m: &DMatrix<Complex64>) -> Result<CompiledCircuit, CompileError> {
    check_square(m)?;
    let n = m.nrows();
    let svd = m.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if sigma_max > 1.0 + COMPILE_TOL {
        return Err(CompileError::SingularValueTooLarge { value: sigma_max });
    }
    let u = svd.u.expect("SVD factors requested");
    let v_t = svd.v_t.expect("SVD factors requested");

    let mut stages = decompose_unitary(&v_t)?.stages;
    for mode in 0..n {
        stages.push(Stage::Attenuation {
            mode,
            factor: svd.singular_values[mode].min(1.0),
        });
    }
    stages.extend(decompose_unitary(&u)?.stages);
    Ok(CompiledCircuit { n_modes: n, stages })
}

/// Compiles a validated operator, choosing the factorization by kind.
pub fn compile(op: &TargetOperator) -> Result<CompiledCircuit, CompileError> {
    match op.kind {
        OperatorKind::Unitary => decompose_unitary(&op.matrix),
        OperatorKind::Subunitary => decompose_subunitary(&op.matrix),
    }
}

/// Multiplies the staged circuit back into an n x n matrix.
pub fn reconstruct(circuit: &CompiledCircuit) -> DMatrix<Complex64> {
    let n = circuit.n_modes;
    let mut p = DMatrix::<Complex64>::identity(n, n);
    for stage in &circuit.stages {
        match stage {
            Stage::Mixer {
                modes: (i, j),
                matrix,
                ..
            } => {
                for k in 0..n {
                    let top = p[(*i, k)];
                    let bot = p[(*j, k)];
                    p[(*i, k)] = matrix.m[0][0] * top + matrix.m[0][1] * bot;
                    p[(*j, k)] = matrix.m[1][0] * top + matrix.m[1][1] * bot;
                }
            }
            Stage::Phase { mode, phase } => {
                for k in 0..n {
                    p[(*mode, k)] *= phase;
                }
            }
            Stage::Attenuation { mode, factor } => {
                for k in 0..n {
                    p[(*mode, k)] *= Complex64::new(*factor, 0.0);
                }
            }
        }
    }
    p
}

/// Compares the reconstructed circuit against the target, entrywise.
pub fn verify(circuit: &CompiledCircuit, target: &DMatrix<Complex64>) -> VerifyReport {
    let diff = reconstruct(circuit) - target;
    let max_error = diff.iter().map(|z| z.norm()).fold(0.0, f64::max);
    VerifyReport {
        max_error,
        pass: max_error <= COMPILE_TOL,
    }
}

/// Lowers the staged circuit to netlist elements, dropping stages that are
/// exactly the identity. Modes become 1-based beams.
pub fn to_netlist(circuit: &CompiledCircuit) -> Netlist {
    let mut elements = Vec::new();
    for (index, stage) in circuit.stages.iter().enumerate() {
        match stage {
            Stage::Mixer {
                modes: (i, j),
                matrix,
                eliminated,
            } => {
                let splitter = BeamSplitter::new(*matrix).expect("mixers are unitary");
                let mut el = NetElement::splitter(i + 1, j + 1, splitter);
                if let Some((r, c)) = eliminated {
                    el = el.with_note(format!("stage {index}: eliminates entry ({r},{c})"));
                }
                elements.push(el);
            }
            Stage::Phase { mode, phase } => {
                if *phase == Complex64::ONE {
                    continue;
                }
                let mirror = Mirror::new(*phase).expect("phases have unit modulus");
                elements.push(
                    NetElement::mirror(mode + 1, mirror)
                        .with_note(format!("residual phase on mode {mode}")),
                );
            }
            Stage::Attenuation { mode, factor } => {
                if *factor == 1.0 {
                    continue;
                }
                let filter = LinearFilter::attenuator(*factor).expect("factors lie in [0, 1]");
                elements.push(
                    NetElement::filter(mode + 1, filter)
                        .with_note(format!("singular value on mode {mode}")),
                );
            }
        }
    }
    Netlist::new(circuit.n_modes, elements, Vec::<DetectorTap>::new())
        .expect("compiled stages index valid beams")
}

/// Haar-distributed random unitary: QR of a complex Ginibre matrix with the
/// R-diagonal phase fix.
pub fn haar_unitary<R: Rng>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    assert!(n >= 1);
    let g = DMatrix::from_fn(n, n, |_, _| {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        Complex64::from_polar((-u1.ln()).sqrt(), std::f64::consts::TAU * u2)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let lambda = if d.norm() == 0.0 {
            Complex64::ONE
        } else {
            d / d.norm()
        };
        for i in 0..n {
            q[(i, j)] *= lambda;
        }
    }
    q
}
