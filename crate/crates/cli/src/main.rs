//! Command-line surface for the interferometer simulator.
//!
//! Exit codes form a stable pipeline contract: 0 success, 1 runtime or
//! estimation failure, 2 input validation failure. All stochastic commands
//! require a seed (flag or INTERFEROLAB_SEED) and embed it in their output so
//! every published number is reproducible by re-invocation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use interferolab::elements::LinearFilter;
use interferolab::experiment::{delta_quantum, ExperimentConfig};
use interferolab::hv::{malus_model, mc_hv, mc_quantum, McEstimate};
use interferolab::io::{
    parse_config, parse_filter_json, parse_matrix, parse_measurements_csv, serialize_netlist,
    write_sweep_csv, FormatError, SweepRow,
};
use interferolab::reck::{compile, to_netlist, verify, OperatorKind, Stage, TargetOperator};
use interferolab::state::DensityMatrix;
use interferolab::tomography::{infer_density, TomographyError};

#[derive(Parser)]
#[command(
    name = "interferolab",
    version,
    about = "Two-beam interferometer simulator: quantum vs hidden-variable witness, sweeps, Monte Carlo counting, operator compilation, tomography"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

/// Filter settings accept "identity", "zero", "polarizer:THETA" (radians), or
/// a 2x2 complex matrix as JSON [[ [re,im], [re,im] ], [ [re,im], [re,im] ]].
#[derive(Subcommand)]
enum Cmd {
    /// Closed-form witness delta = p(A1,A2) - p(A1,0) - p(0,A2) as JSON
    Delta {
        /// Experiment config JSON; defaults to the dark-port demonstrator
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "identity")]
        a1: String,
        #[arg(long, default_value = "identity")]
        a2: String,
        /// Output path; standard output when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep a setting parameter and emit one CSV row per value
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "identity")]
        a1: String,
        #[arg(long, default_value = "identity")]
        a2: String,
        /// Number of grid points over the range, endpoints included
        #[arg(long)]
        steps: usize,
        /// Swept interval LO:HI in radians
        #[arg(long, default_value = "0:6.283185307179586")]
        range: String,
        #[arg(long, value_enum, default_value_t = SweepParam::Phase)]
        param: SweepParam,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of the hidden-variable witness (Malus model)
    McHv {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "identity")]
        a1: String,
        #[arg(long, default_value = "identity")]
        a2: String,
        #[arg(long)]
        samples: u64,
        #[arg(long, env = "INTERFEROLAB_SEED")]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo photon counting of the quantum joint probability p(A1,A2)
    McQuantum {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "identity")]
        a1: String,
        #[arg(long, default_value = "identity")]
        a2: String,
        #[arg(long)]
        samples: u64,
        #[arg(long, env = "INTERFEROLAB_SEED")]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile an n x n (sub)unitary matrix into a staged netlist
    Compile {
        /// Matrix file: JSON rows of [re, im] pairs
        matrix: PathBuf,
        /// Netlist destination; standard output when omitted (the
        /// verification report then goes to standard error)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit nonzero if the reconstruction error exceeds 1e-10
        #[arg(long)]
        check: bool,
    },
    /// Infer the source density matrix from a measurement CSV
    Tomo {
        /// CSV with columns a1, a2 (matrices as JSON), delta
        measurements: PathBuf,
        /// Apparatus config JSON; defaults to the dark-port demonstrator
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepParam {
    /// Multiply A2 by the unit phase e^(i theta)
    Phase,
    /// Replace A2 with polarizer(theta)
    Angle,
}

enum CliError {
    /// Exit 1: the inputs were well-formed but the run failed.
    Runtime(String),
    /// Exit 2: the inputs themselves are invalid.
    Validation(String),
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn load_config(path: &Option<PathBuf>) -> Result<ExperimentConfig, CliError> {
    match path {
        None => Ok(ExperimentConfig::dark_port_default()),
        Some(p) => Ok(parse_config(&read(p)?)?),
    }
}

fn parse_filter(spec: &str, name: &str) -> Result<LinearFilter, CliError> {
    if spec == "identity" {
        return Ok(LinearFilter::identity());
    }
    if spec == "zero" {
        return Ok(LinearFilter::absorber());
    }
    if let Some(theta) = spec.strip_prefix("polarizer:") {
        let theta: f64 = theta
            .parse()
            .map_err(|e| CliError::Validation(format!("{name}: bad polarizer angle: {e}")))?;
        return Ok(LinearFilter::polarizer(theta));
    }
    if spec.trim_start().starts_with('[') {
        return Ok(parse_filter_json(spec, name)?);
    }
    Err(CliError::Validation(format!(
        "{name}: unrecognized filter {spec:?} (expected \"identity\", \"zero\", \"polarizer:THETA\", or a 2x2 complex matrix as JSON)"
    )))
}

fn parse_range(range: &str) -> Result<(f64, f64), CliError> {
    let bad = || {
        CliError::Validation(format!(
            "--range must be LO:HI with finite LO < HI, got {range:?}"
        ))
    };
    let (lo, hi) = range.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    text
}

#[derive(Serialize)]
struct DeltaOut {
    p_both: f64,
    p_1: f64,
    p_2: f64,
    delta_qm: f64,
    delta_hv: f64,
}

#[derive(Serialize)]
struct McOut {
    estimate: f64,
    stderr: f64,
    n: u64,
    seed: u64,
    workers: u32,
    clamp_warnings: u64,
}

impl From<McEstimate> for McOut {
    fn from(e: McEstimate) -> Self {
        McOut {
            estimate: e.estimate,
            stderr: e.stderr,
            n: e.n,
            seed: e.seed,
            workers: e.workers,
            clamp_warnings: e.clamp_warnings,
        }
    }
}

#[derive(Serialize)]
struct CompileReport {
    kind: &'static str,
    n_modes: usize,
    mixers: usize,
    phases: usize,
    attenuations: usize,
    max_error: f64,
    pass: bool,
}

#[derive(Serialize)]
struct TomoOut {
    rho: [[[f64; 2]; 2]; 2],
    mean_photons: f64,
    valid: bool,
    violations: Vec<String>,
}

fn stochastic_inputs(samples: u64, workers: u32) -> Result<(), CliError> {
    if samples < 1 {
        return Err(CliError::Validation("--samples must be at least 1".into()));
    }
    if workers < 1 {
        return Err(CliError::Validation("--workers must be at least 1".into()));
    }
    Ok(())
}

fn run(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Delta { config, a1, a2, out } => {
            let cfg = load_config(&config)?;
            let a1 = parse_filter(&a1, "a1")?;
            let a2 = parse_filter(&a2, "a2")?;
            let r = delta_quantum(&cfg, &a1, &a2);
            emit(
                &out,
                &json_line(&DeltaOut {
                    p_both: r.p_both,
                    p_1: r.p_1,
                    p_2: r.p_2,
                    delta_qm: r.delta,
                    delta_hv: 0.0,
                }),
            )
        }
        Cmd::Sweep {
            config,
            a1,
            a2,
            steps,
            range,
            param,
            out,
        } => {
            let cfg = load_config(&config)?;
            let a1 = parse_filter(&a1, "a1")?;
            let a2 = parse_filter(&a2, "a2")?;
            if steps < 2 {
                return Err(CliError::Validation("--steps must be at least 2".into()));
            }
            let (lo, hi) = parse_range(&range)?;
            let rows: Vec<SweepRow> = (0..steps)
                .map(|j| {
                    let theta = lo + (hi - lo) * j as f64 / (steps - 1) as f64;
                    let setting_a2 = match param {
                        SweepParam::Phase => a2.phase_shifted(theta),
                        SweepParam::Angle => LinearFilter::polarizer(theta),
                    };
                    let r = delta_quantum(&cfg, &a1, &setting_a2);
                    SweepRow {
                        setting: theta,
                        p_both: r.p_both,
                        p_1: r.p_1,
                        p_2: r.p_2,
                        delta_qm: r.delta,
                        delta_hv: 0.0,
                        stderr: None,
                    }
                })
                .collect();
            emit(&out, &write_sweep_csv(&rows))
        }
        Cmd::McHv {
            config,
            a1,
            a2,
            samples,
            seed,
            workers,
            out,
        } => {
            let cfg = load_config(&config)?;
            let a1 = parse_filter(&a1, "a1")?;
            let a2 = parse_filter(&a2, "a2")?;
            stochastic_inputs(samples, workers)?;
            let model = malus_model(&cfg);
            let est = mc_hv(&model, &a1, &a2, samples, seed, workers);
            emit(&out, &json_line(&McOut::from(est)))
        }
        Cmd::McQuantum {
            config,
            a1,
            a2,
            samples,
            seed,
            workers,
            out,
        } => {
            let cfg = load_config(&config)?;
            let a1 = parse_filter(&a1, "a1")?;
            let a2 = parse_filter(&a2, "a2")?;
            stochastic_inputs(samples, workers)?;
            let est = mc_quantum(&cfg, &a1, &a2, samples, seed, workers)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            emit(&out, &json_line(&McOut::from(est)))
        }
        Cmd::Compile { matrix, out, check } => {
            let m = parse_matrix(&read(&matrix)?)?;
            let op = TargetOperator::new(m.clone())
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let circuit = compile(&op).map_err(|e| CliError::Validation(e.to_string()))?;
            let netlist_text = serialize_netlist(&to_netlist(&circuit));
            let report = verify(&circuit, &m);
            let report_text = json_line(&CompileReport {
                kind: match op.kind() {
                    OperatorKind::Unitary => "unitary",
                    OperatorKind::Subunitary => "subunitary",
                },
                n_modes: circuit.n_modes,
                mixers: circuit.mixer_count(),
                phases: circuit
                    .stages
                    .iter()
                    .filter(|s| matches!(s, Stage::Phase { .. }))
                    .count(),
                attenuations: circuit
                    .stages
                    .iter()
                    .filter(|s| matches!(s, Stage::Attenuation { .. }))
                    .count(),
                max_error: report.max_error,
                pass: report.pass,
            });
            // The netlist follows --out; the report takes whichever of
            // stdout/stderr the netlist leaves free.
            match &out {
                Some(_) => {
                    emit(&out, &netlist_text)?;
                    print!("{report_text}");
                }
                None => {
                    print!("{netlist_text}");
                    eprint!("{report_text}");
                }
            }
            if check && !report.pass {
                return Err(CliError::Runtime(format!(
                    "reconstruction error {:e} exceeds 1e-10",
                    report.max_error
                )));
            }
            Ok(())
        }
        Cmd::Tomo {
            measurements,
            config,
            out,
        } => {
            let ms = parse_measurements_csv(&read(&measurements)?)?;
            let cfg = load_config(&config)?;
            let rho = infer_density(&ms, &cfg).map_err(|e| match e {
                TomographyError::RankDeficient { .. } => CliError::Runtime(e.to_string()),
                _ => CliError::Validation(e.to_string()),
            })?;
            emit(&out, &json_line(&tomo_out(&rho)))
        }
    }
}

fn tomo_out(rho: &DensityMatrix) -> TomoOut {
    let m = rho.matrix();
    let c = |i: usize, j: usize| [m.m[i][j].re, m.m[i][j].im];
    let verdict = rho.validate();
    TomoOut {
        rho: [[c(0, 0), c(0, 1)], [c(1, 0), c(1, 1)]],
        mean_photons: rho.mean_photons(),
        valid: verdict.passed(),
        violations: verdict.violations.iter().map(|v| v.to_string()).collect(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
