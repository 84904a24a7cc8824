//! File formats: JSON configs, netlists, and matrices; CSV sweeps and
//! measurement tables.
//!
//! Complex scalars are `[re, im]` pairs, 2x2 matrices are row-major pairs of
//! pairs, and every parser round-trips its serializer exactly. CSV floats are
//! printed with 17 significant digits so values survive a round trip
//! bit-for-bit; output uses LF line endings.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{CircuitError, DetectorTap, NetElement, Netlist};
use crate::elements::{BeamSplitter, Detector, LinearFilter, Mirror, OpticsError};
use crate::experiment::{ExperimentConfig, ExperimentError, Source};
use crate::mat2::Mat2;
use crate::state::{DensityMatrix, JonesVector};
use crate::tomography::Measurement;
use nalgebra::DMatrix;

pub type CJson = [f64; 2];
pub type MJson = [[CJson; 2]; 2];

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{context}: {message}")]
    Parse { context: String, message: String },
    #[error("{name}: {source}")]
    Element { name: String, source: OpticsError },
    #[error("config must set exactly one of \"psi1\" and \"rho1\"")]
    SourceChoice,
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("element {index} ({kind}): expected {expected} beam(s), got {got}")]
    BeamArity {
        index: usize,
        kind: String,
        expected: usize,
        got: usize,
    },
    #[error("element {index}: unknown type {kind:?}")]
    UnknownType { index: usize, kind: String },
    #[error("element {index} ({kind}): missing parameter {param:?}")]
    MissingParam {
        index: usize,
        kind: &'static str,
        param: &'static str,
    },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("csv row {row}: {message}")]
    Csv { row: usize, message: String },
}

fn c_json(z: Complex64) -> CJson {
    [z.re, z.im]
}

fn c_from(j: CJson) -> Complex64 {
    Complex64::new(j[0], j[1])
}

fn mat_json(m: &Mat2) -> MJson {
    [
        [c_json(m.m[0][0]), c_json(m.m[0][1])],
        [c_json(m.m[1][0]), c_json(m.m[1][1])],
    ]
}

fn mat_from(j: &MJson) -> Mat2 {
    Mat2::new(c_from(j[0][0]), c_from(j[0][1]), c_from(j[1][0]), c_from(j[1][1]))
}

// --- experiment config ---

#[derive(Deserialize, Serialize)]
struct ConfigFile {
    sa: MJson,
    sb: MJson,
    q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    psi1: Option<[CJson; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho1: Option<MJson>,
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, FormatError> {
    let file: ConfigFile = serde_json::from_str(text).map_err(|e| FormatError::Parse {
        context: "config".into(),
        message: e.to_string(),
    })?;
    let sa = BeamSplitter::new(mat_from(&file.sa)).map_err(|source| FormatError::Element {
        name: "beamsplitter sa".into(),
        source,
    })?;
    let sb = BeamSplitter::new(mat_from(&file.sb)).map_err(|source| FormatError::Element {
        name: "beamsplitter sb".into(),
        source,
    })?;
    let source = match (&file.psi1, &file.rho1) {
        (Some(psi), None) => Source::Pure(JonesVector::new(c_from(psi[0]), c_from(psi[1]))),
        (None, Some(rho)) => Source::Mixed(DensityMatrix::new(mat_from(rho))),
        _ => return Err(FormatError::SourceChoice),
    };
    Ok(ExperimentConfig::new(sa, sb, file.q, source)?)
}

pub fn serialize_config(cfg: &ExperimentConfig) -> String {
    let (psi1, rho1) = match cfg.source {
        Source::Pure(psi) => (Some([c_json(psi.h), c_json(psi.v)]), None),
        Source::Mixed(rho) => (None, Some(mat_json(&rho.matrix()))),
    };
    let file = ConfigFile {
        sa: mat_json(&cfg.sa.matrix()),
        sb: mat_json(&cfg.sb.matrix()),
        q: cfg.q,
        psi1,
        rho1,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("plain data serializes");
    text.push('\n');
    text
}

// --- netlists ---

#[derive(Deserialize, Serialize, Default)]
struct ParamsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s: Option<MJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<MJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phase: Option<CJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
}

#[derive(Deserialize, Serialize)]
struct ElementFile {
    #[serde(rename = "type")]
    kind: String,
    beams: Vec<usize>,
    params: ParamsFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Deserialize, Serialize)]
struct NetlistFile {
    n_beams: usize,
    elements: Vec<ElementFile>,
}

fn one_beam(index: usize, kind: &str, beams: &[usize]) -> Result<usize, FormatError> {
    if beams.len() != 1 {
        return Err(FormatError::BeamArity {
            index,
            kind: kind.into(),
            expected: 1,
            got: beams.len(),
        });
    }
    Ok(beams[0])
}

/// Parses a netlist. Detector entries are accepted at any position; they
/// always observe the fully evolved state.
pub fn parse_netlist(text: &str) -> Result<Netlist, FormatError> {
    let file: NetlistFile = serde_json::from_str(text).map_err(|e| FormatError::Parse {
        context: "netlist".into(),
        message: e.to_string(),
    })?;
    let mut elements = Vec::new();
    let mut detectors = Vec::new();
    for (index, el) in file.elements.iter().enumerate() {
        let named = |source| FormatError::Element {
            name: format!("element {index} ({})", el.kind),
            source,
        };
        match el.kind.as_str() {
            "beamsplitter" => {
                if el.beams.len() != 2 {
                    return Err(FormatError::BeamArity {
                        index,
                        kind: el.kind.clone(),
                        expected: 2,
                        got: el.beams.len(),
                    });
                }
                let s = el.params.s.as_ref().ok_or(FormatError::MissingParam {
                    index,
                    kind: "beamsplitter",
                    param: "s",
                })?;
                let splitter = BeamSplitter::new(mat_from(s)).map_err(named)?;
                let mut net = NetElement::splitter(el.beams[0], el.beams[1], splitter);
                if let Some(note) = &el.note {
                    net = net.with_note(note.clone());
                }
                elements.push(net);
            }
            "filter" => {
                let beam = one_beam(index, &el.kind, &el.beams)?;
                let a = el.params.a.as_ref().ok_or(FormatError::MissingParam {
                    index,
                    kind: "filter",
                    param: "a",
                })?;
                let filter = LinearFilter::new(mat_from(a)).map_err(named)?;
                let mut net = NetElement::filter(beam, filter);
                if let Some(note) = &el.note {
                    net = net.with_note(note.clone());
                }
                elements.push(net);
            }
            "mirror" => {
                let beam = one_beam(index, &el.kind, &el.beams)?;
                let phase = el.params.phase.ok_or(FormatError::MissingParam {
                    index,
                    kind: "mirror",
                    param: "phase",
                })?;
                let mirror = Mirror::new(c_from(phase)).map_err(named)?;
                let mut net = NetElement::mirror(beam, mirror);
                if let Some(note) = &el.note {
                    net = net.with_note(note.clone());
                }
                elements.push(net);
            }
            "detector" => {
                let beam = one_beam(index, &el.kind, &el.beams)?;
                let q = el.params.q.ok_or(FormatError::MissingParam {
                    index,
                    kind: "detector",
                    param: "q",
                })?;
                let detector = Detector::new(q).map_err(named)?;
                detectors.push(DetectorTap { beam, detector });
            }
            _ => {
                return Err(FormatError::UnknownType {
                    index,
                    kind: el.kind.clone(),
                })
            }
        }
    }
    Ok(Netlist::new(file.n_beams, elements, detectors)?)
}

pub fn serialize_netlist(netlist: &Netlist) -> String {
    use crate::circuit::ElementKind;
    let mut elements: Vec<ElementFile> = netlist
        .elements()
        .iter()
        .map(|el| {
            let (kind, beams, params) = match &el.kind {
                ElementKind::Splitter { beams, splitter } => (
                    "beamsplitter",
                    vec![beams.0, beams.1],
                    ParamsFile {
                        s: Some(mat_json(&splitter.matrix())),
                        ..ParamsFile::default()
                    },
                ),
                ElementKind::Filter { beam, filter } => (
                    "filter",
                    vec![*beam],
                    ParamsFile {
                        a: Some(mat_json(&filter.matrix())),
                        ..ParamsFile::default()
                    },
                ),
                ElementKind::Mirror { beam, mirror } => (
                    "mirror",
                    vec![*beam],
                    ParamsFile {
                        phase: Some(c_json(mirror.phase())),
                        ..ParamsFile::default()
                    },
                ),
            };
            ElementFile {
                kind: kind.into(),
                beams,
                params,
                note: el.note.clone(),
            }
        })
        .collect();
    for tap in netlist.detectors() {
        elements.push(ElementFile {
            kind: "detector".into(),
            beams: vec![tap.beam],
            params: ParamsFile {
                q: Some(tap.detector.q()),
                ..ParamsFile::default()
            },
            note: None,
        });
    }
    let file = NetlistFile {
        n_beams: netlist.n_beams(),
        elements,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("plain data serializes");
    text.push('\n');
    text
}

// --- n x n matrices ---

pub fn parse_matrix(text: &str) -> Result<DMatrix<Complex64>, FormatError> {
    let rows: Vec<Vec<CJson>> = serde_json::from_str(text).map_err(|e| FormatError::Parse {
        context: "matrix".into(),
        message: e.to_string(),
    })?;
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(FormatError::Parse {
                context: "matrix".into(),
                message: format!("row {i} has {} entries, expected {ncols}", row.len()),
            });
        }
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| c_from(rows[i][j])))
}

pub fn serialize_matrix(m: &DMatrix<Complex64>) -> String {
    let rows: Vec<Vec<CJson>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| c_json(m[(i, j)])).collect())
        .collect();
    let mut text = serde_json::to_string_pretty(&rows).expect("plain data serializes");
    text.push('\n');
    text
}

/// Parses a 2x2 complex matrix into a filter; `name` labels errors.
pub fn parse_filter_json(text: &str, name: &str) -> Result<LinearFilter, FormatError> {
    let j: MJson = serde_json::from_str(text).map_err(|e| FormatError::Parse {
        context: name.into(),
        message: e.to_string(),
    })?;
    LinearFilter::new(mat_from(&j)).map_err(|source| FormatError::Element {
        name: name.into(),
        source,
    })
}

// --- sweep CSV ---

pub const SWEEP_HEADER: &str = "setting,p_both,p_1,p_2,delta_qm,delta_hv,stderr";

/// One sweep CSV row; fields mirror the columns exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub setting: f64,
    pub p_both: f64,
    pub p_1: f64,
    pub p_2: f64,
    pub delta_qm: f64,
    pub delta_hv: f64,
    /// Empty column for closed-form rows.
    pub stderr: Option<f64>,
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let stderr = r.stderr.map(fmt).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt(r.setting),
            fmt(r.p_both),
            fmt(r.p_1),
            fmt(r.p_2),
            fmt(r.delta_qm),
            fmt(r.delta_hv),
            stderr
        ));
    }
    out
}

pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>, FormatError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != SWEEP_HEADER {
        return Err(FormatError::Csv {
            row: 0,
            message: format!("expected header {SWEEP_HEADER:?}, got {header:?}"),
        });
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let row = i + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(FormatError::Csv {
                row,
                message: format!("expected 7 fields, got {}", fields.len()),
            });
        }
        let num = |k: usize| -> Result<f64, FormatError> {
            fields[k].parse().map_err(|e| FormatError::Csv {
                row,
                message: format!("field {k}: {e}"),
            })
        };
        let stderr = if fields[6].is_empty() {
            None
        } else {
            Some(num(6)?)
        };
        rows.push(SweepRow {
            setting: num(0)?,
            p_both: num(1)?,
            p_1: num(2)?,
            p_2: num(3)?,
            delta_qm: num(4)?,
            delta_hv: num(5)?,
            stderr,
        });
    }
    Ok(rows)
}

// --- measurement CSV ---

pub const MEASUREMENT_HEADER: [&str; 3] = ["a1", "a2", "delta"];

/// Measurement tables put each 2x2 filter matrix in one CSV cell as compact
/// JSON; the csv layer handles the quoting.
pub fn write_measurements_csv(measurements: &[Measurement]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(MEASUREMENT_HEADER).expect("vec sink");
    for m in measurements {
        let a1 = serde_json::to_string(&mat_json(&m.a1.matrix())).expect("plain data serializes");
        let a2 = serde_json::to_string(&mat_json(&m.a2.matrix())).expect("plain data serializes");
        w.write_record([a1, a2, fmt(m.delta)]).expect("vec sink");
    }
    String::from_utf8(w.into_inner().expect("vec sink")).expect("utf-8 by construction")
}

pub fn parse_measurements_csv(text: &str) -> Result<Vec<Measurement>, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| FormatError::Csv {
            row: 0,
            message: e.to_string(),
        })?
        .clone();
    if headers.iter().ne(MEASUREMENT_HEADER) {
        return Err(FormatError::Csv {
            row: 0,
            message: format!("expected header a1,a2,delta, got {headers:?}"),
        });
    }
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| FormatError::Csv {
            row,
            message: e.to_string(),
        })?;
        if record.len() != 3 {
            return Err(FormatError::Csv {
                row,
                message: format!("expected 3 fields, got {}", record.len()),
            });
        }
        let filter = |cell: &str, which: &str| -> Result<LinearFilter, FormatError> {
            let j: MJson = serde_json::from_str(cell).map_err(|e| FormatError::Csv {
                row,
                message: format!("{which}: {e}"),
            })?;
            LinearFilter::new(mat_from(&j)).map_err(|source| FormatError::Element {
                name: format!("measurement row {row}, column {which}"),
                source,
            })
        };
        let a1 = filter(&record[0], "a1")?;
        let a2 = filter(&record[1], "a2")?;
        let delta: f64 = record[2].parse().map_err(|e| FormatError::Csv {
            row,
            message: format!("delta: {e}"),
        })?;
        out.push(Measurement { a1, a2, delta });
    }
    Ok(out)
}
