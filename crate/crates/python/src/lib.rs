//! Python bindings for the interferolab core. Matrices cross the boundary
//! as nested lists of complex numbers; stochastic results carry their seed
//! so every number is reproducible.

use interferolab::io::serialize_netlist;
use interferolab::reck;
use interferolab::tomography::TomographyError;
use interferolab::{
    delta_quantum, malus_model, p_quantum, quadrature_delta, BeamSplitter, DensityMatrix,
    DeltaResult, ExperimentConfig, JonesVector, LinearFilter, Mat2, McEstimate, Measurement,
    Source, TargetOperator,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn mat2_from_py(rows: &[Vec<Complex64>]) -> PyResult<Mat2> {
    if rows.len() != 2 || rows.iter().any(|r| r.len() != 2) {
        return Err(PyValueError::new_err("expected a 2x2 matrix as nested lists"));
    }
    Ok(Mat2::from_rows([
        [rows[0][0], rows[0][1]],
        [rows[1][0], rows[1][1]],
    ]))
}

fn mat2_to_py(m: &Mat2) -> Vec<Vec<Complex64>> {
    m.m.iter().map(|row| row.to_vec()).collect()
}

fn dmatrix_from_py(rows: &[Vec<Complex64>]) -> PyResult<DMatrix<Complex64>> {
    let n_rows = rows.len();
    if n_rows == 0 {
        return Err(PyValueError::new_err("matrix must not be empty"));
    }
    let n_cols = rows[0].len();
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(PyValueError::new_err("matrix rows have unequal lengths"));
    }
    Ok(DMatrix::from_fn(n_rows, n_cols, |i, j| rows[i][j]))
}

fn dmatrix_to_py(m: &DMatrix<Complex64>) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn stochastic_inputs(n: u64, workers: u32) -> PyResult<()> {
    if n < 1 {
        return Err(PyValueError::new_err("n must be at least 1"));
    }
    if workers < 1 {
        return Err(PyValueError::new_err("workers must be at least 1"));
    }
    Ok(())
}

/// Fixed apparatus: two beam splitters, detector efficiency, and the source.
#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct Config {
    inner: ExperimentConfig,
}

#[pymethods]
impl Config {
    #[new]
    #[pyo3(signature = (sa, sb, q, psi1 = None, rho1 = None))]
    fn new(
        sa: Vec<Vec<Complex64>>,
        sb: Vec<Vec<Complex64>>,
        q: f64,
        psi1: Option<Vec<Complex64>>,
        rho1: Option<Vec<Vec<Complex64>>>,
    ) -> PyResult<Self> {
        let sa = BeamSplitter::new(mat2_from_py(&sa)?).map_err(value_err)?;
        let sb = BeamSplitter::new(mat2_from_py(&sb)?).map_err(value_err)?;
        let source = match (psi1, rho1) {
            (Some(psi), None) => {
                if psi.len() != 2 {
                    return Err(PyValueError::new_err("psi1 must have two components"));
                }
                Source::Pure(JonesVector::new(psi[0], psi[1]))
            }
            (None, Some(rho)) => Source::Mixed(DensityMatrix::new(mat2_from_py(&rho)?)),
            _ => return Err(PyValueError::new_err("provide exactly one of psi1 or rho1")),
        };
        ExperimentConfig::new(sa, sb, q, source)
            .map(|inner| Config { inner })
            .map_err(value_err)
    }

    /// Symmetric 50/50 splitters, q = 1, horizontal single-photon input.
    #[staticmethod]
    fn dark_port() -> Self {
        Config {
            inner: ExperimentConfig::dark_port_default(),
        }
    }

    #[getter]
    fn q(&self) -> f64 {
        self.inner.q
    }

    /// Path coefficient product governing the interference term.
    fn kappa(&self) -> Complex64 {
        self.inner.kappa()
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(q={}, kappa={})",
            self.inner.q,
            self.inner.kappa()
        )
    }
}

/// A subunitary Jones filter: the adjustable analyzer in each arm.
#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct Filter {
    inner: LinearFilter,
}

#[pymethods]
impl Filter {
    #[new]
    fn new(matrix: Vec<Vec<Complex64>>) -> PyResult<Self> {
        LinearFilter::new(mat2_from_py(&matrix)?)
            .map(|inner| Filter { inner })
            .map_err(value_err)
    }

    #[staticmethod]
    fn identity() -> Self {
        Filter {
            inner: LinearFilter::identity(),
        }
    }

    /// Fully absorbing filter (a blocked arm).
    #[staticmethod]
    fn zero() -> Self {
        Filter {
            inner: LinearFilter::absorber(),
        }
    }

    #[staticmethod]
    fn polarizer(theta: f64) -> Self {
        Filter {
            inner: LinearFilter::polarizer(theta),
        }
    }

    fn phase_shifted(&self, theta: f64) -> Self {
        Filter {
            inner: self.inner.phase_shifted(theta),
        }
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        mat2_to_py(&self.inner.matrix())
    }

    fn __repr__(&self) -> String {
        format!("Filter({:?})", self.inner.matrix().m)
    }
}

/// The three run probabilities and the interference witness.
#[pyclass(frozen, name = "DeltaResult")]
struct PyDeltaResult {
    #[pyo3(get)]
    p_both: f64,
    #[pyo3(get)]
    p_1: f64,
    #[pyo3(get)]
    p_2: f64,
    #[pyo3(get)]
    delta: f64,
}

#[pymethods]
impl PyDeltaResult {
    fn __repr__(&self) -> String {
        format!(
            "DeltaResult(p_both={}, p_1={}, p_2={}, delta={})",
            self.p_both, self.p_1, self.p_2, self.delta
        )
    }
}

impl From<DeltaResult> for PyDeltaResult {
    fn from(r: DeltaResult) -> Self {
        PyDeltaResult {
            p_both: r.p_both,
            p_1: r.p_1,
            p_2: r.p_2,
            delta: r.delta,
        }
    }
}

/// A Monte Carlo estimate with its standard error and reproduction inputs.
#[pyclass(frozen, name = "McResult")]
struct PyMcResult {
    #[pyo3(get)]
    estimate: f64,
    #[pyo3(get)]
    stderr: f64,
    #[pyo3(get)]
    n: u64,
    #[pyo3(get)]
    seed: u64,
    #[pyo3(get)]
    workers: u32,
    #[pyo3(get)]
    clamp_warnings: u64,
}

#[pymethods]
impl PyMcResult {
    fn __repr__(&self) -> String {
        format!(
            "McResult(estimate={}, stderr={}, n={}, seed={}, workers={}, clamp_warnings={})",
            self.estimate, self.stderr, self.n, self.seed, self.workers, self.clamp_warnings
        )
    }
}

impl From<McEstimate> for PyMcResult {
    fn from(e: McEstimate) -> Self {
        PyMcResult {
            estimate: e.estimate,
            stderr: e.stderr,
            n: e.n,
            seed: e.seed,
            workers: e.workers,
            clamp_warnings: e.clamp_warnings,
        }
    }
}

/// Quantum witness for one setting pair.
#[pyfunction]
fn delta(config: Config, a1: Filter, a2: Filter) -> PyDeltaResult {
    delta_quantum(&config.inner, &a1.inner, &a2.inner).into()
}

/// Joint detection probability with both arms open.
#[pyfunction]
fn p(config: Config, a1: Filter, a2: Filter) -> f64 {
    p_quantum(&config.inner, &a1.inner, &a2.inner)
}

/// Hidden-variable witness for the Malus model via quadrature. Zero up to
/// integration error, for any settings: that is the point of the witness.
#[pyfunction]
#[pyo3(signature = (config, a1, a2, nodes = 4096))]
fn hv_delta_malus(config: Config, a1: Filter, a2: Filter, nodes: usize) -> PyResult<PyDeltaResult> {
    if nodes < 1 {
        return Err(PyValueError::new_err("nodes must be at least 1"));
    }
    Ok(quadrature_delta(&malus_model(&config.inner), &a1.inner, &a2.inner, nodes).into())
}

/// Monte Carlo estimate of the hidden-variable witness (Malus model).
#[pyfunction]
#[pyo3(signature = (config, a1, a2, n, seed, workers = 1))]
fn mc_hv(config: Config, a1: Filter, a2: Filter, n: u64, seed: u64, workers: u32) -> PyResult<PyMcResult> {
    stochastic_inputs(n, workers)?;
    Ok(interferolab::mc_hv(&malus_model(&config.inner), &a1.inner, &a2.inner, n, seed, workers).into())
}

/// Monte Carlo estimate of the joint detection probability.
#[pyfunction]
#[pyo3(signature = (config, a1, a2, n, seed, workers = 1))]
fn mc_quantum(config: Config, a1: Filter, a2: Filter, n: u64, seed: u64, workers: u32) -> PyResult<PyMcResult> {
    stochastic_inputs(n, workers)?;
    interferolab::mc_quantum(&config.inner, &a1.inner, &a2.inner, n, seed, workers)
        .map(Into::into)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Compile an operator to a netlist. Returns (netlist JSON, max
/// reconstruction error); with check=True, fails if the error exceeds
/// the compilation tolerance.
#[pyfunction]
#[pyo3(signature = (matrix, check = false))]
fn compile_operator(matrix: Vec<Vec<Complex64>>, check: bool) -> PyResult<(String, f64)> {
    let m = dmatrix_from_py(&matrix)?;
    let op = TargetOperator::new(m.clone()).map_err(value_err)?;
    let circuit = interferolab::compile(&op).map_err(value_err)?;
    let report = reck::verify(&circuit, &m);
    if check && !report.pass {
        return Err(PyRuntimeError::new_err(format!(
            "reconstruction error {:e} exceeds {:e}",
            report.max_error,
            reck::COMPILE_TOL
        )));
    }
    Ok((serialize_netlist(&reck::to_netlist(&circuit)), report.max_error))
}

/// Settings that make the witness-to-state map invertible for this apparatus.
#[pyfunction]
fn default_design(config: Config) -> PyResult<Vec<(Filter, Filter)>> {
    interferolab::default_design(&config.inner)
        .map(|pairs| {
            pairs
                .into_iter()
                .map(|(a1, a2)| (Filter { inner: a1 }, Filter { inner: a2 }))
                .collect()
        })
        .map_err(value_err)
}

/// Infer the input density matrix from (a1, a2, delta) measurements.
/// Returns (rho as nested lists, valid, violations).
#[pyfunction]
fn infer_density(
    measurements: Vec<(Filter, Filter, f64)>,
    config: Config,
) -> PyResult<(Vec<Vec<Complex64>>, bool, Vec<String>)> {
    let ms: Vec<Measurement> = measurements
        .iter()
        .map(|(a1, a2, d)| Measurement {
            a1: a1.inner,
            a2: a2.inner,
            delta: *d,
        })
        .collect();
    let rho = interferolab::infer_density(&ms, &config.inner).map_err(|e| match e {
        TomographyError::RankDeficient { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => value_err(e),
    })?;
    let verdict = rho.validate();
    Ok((
        mat2_to_py(&rho.matrix()),
        verdict.passed(),
        verdict.violations.iter().map(|v| v.to_string()).collect(),
    ))
}

/// A Haar-random unitary, reproducible from the seed.
#[pyfunction]
fn haar_unitary(n: usize, seed: u64) -> PyResult<Vec<Vec<Complex64>>> {
    if n < 1 {
        return Err(PyValueError::new_err("n must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(dmatrix_to_py(&reck::haar_unitary(n, &mut rng)))
}

#[pymodule]
fn interferolab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Config>()?;
    m.add_class::<Filter>()?;
    m.add_class::<PyDeltaResult>()?;
    m.add_class::<PyMcResult>()?;
    m.add_function(wrap_pyfunction!(delta, m)?)?;
    m.add_function(wrap_pyfunction!(p, m)?)?;
    m.add_function(wrap_pyfunction!(hv_delta_malus, m)?)?;
    m.add_function(wrap_pyfunction!(mc_hv, m)?)?;
    m.add_function(wrap_pyfunction!(mc_quantum, m)?)?;
    m.add_function(wrap_pyfunction!(compile_operator, m)?)?;
    m.add_function(wrap_pyfunction!(default_design, m)?)?;
    m.add_function(wrap_pyfunction!(infer_density, m)?)?;
    m.add_function(wrap_pyfunction!(haar_unitary, m)?)?;
    Ok(())
}
