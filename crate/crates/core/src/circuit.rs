//! Feed-forward netlist evaluation over indexed beams.
//!
//! A netlist is an ordered list of placed elements over `n_beams` beams, plus
//! terminal detector taps. Evaluation is a single left-to-right pass; the
//! representation cannot express feedback, so topological validity reduces to
//! the index checks done at construction. Beam indices are 1-based in netlists
//! and files.

use thiserror::Error;

use crate::elements::{BeamSplitter, Detector, LinearFilter, Mirror};
use crate::state::{JonesVector, TwoBeamState};

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("element {index} ({kind}): beam {beam} out of range 1..={n_beams}")]
    BeamOutOfRange {
        index: usize,
        kind: &'static str,
        beam: usize,
        n_beams: usize,
    },
    #[error("element {index} (beamsplitter): beam indices must be distinct, got ({beam}, {beam})")]
    SplitterBeamsEqual { index: usize, beam: usize },
    #[error("netlist must have at least one beam")]
    NoBeams,
    #[error("input has {got} beams, netlist expects {expected}")]
    BeamCountMismatch { expected: usize, got: usize },
}

/// One placed transform element.
#[derive(Clone, Debug, PartialEq)]
pub enum ElementKind {
    Splitter {
        beams: (usize, usize),
        splitter: BeamSplitter,
    },
    Filter {
        beam: usize,
        filter: LinearFilter,
    },
    Mirror {
        beam: usize,
        mirror: Mirror,
    },
}

impl ElementKind {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ElementKind::Splitter { .. } => "beamsplitter",
            ElementKind::Filter { .. } => "filter",
            ElementKind::Mirror { .. } => "mirror",
        }
    }
}

/// A placed element with an optional free-text annotation (kept through
/// serialization; the compiler notes which stage produced each element).
#[derive(Clone, Debug, PartialEq)]
pub struct NetElement {
    pub kind: ElementKind,
    pub note: Option<String>,
}

impl NetElement {
    pub fn splitter(beam_a: usize, beam_b: usize, splitter: BeamSplitter) -> Self {
        NetElement {
            kind: ElementKind::Splitter {
                beams: (beam_a, beam_b),
                splitter,
            },
            note: None,
        }
    }

    pub fn filter(beam: usize, filter: LinearFilter) -> Self {
        NetElement {
            kind: ElementKind::Filter { beam, filter },
            note: None,
        }
    }

    pub fn mirror(beam: usize, mirror: Mirror) -> Self {
        NetElement {
            kind: ElementKind::Mirror { beam, mirror },
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// A detector tap: reads q times the presence probability of one beam without
/// altering the state.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorTap {
    pub beam: usize,
    pub detector: Detector,
}

/// Validated feed-forward circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct Netlist {
    n_beams: usize,
    elements: Vec<NetElement>,
    detectors: Vec<DetectorTap>,
}

impl Netlist {
    pub fn new(
        n_beams: usize,
        elements: Vec<NetElement>,
        detectors: Vec<DetectorTap>,
    ) -> Result<Self, CircuitError> {
        if n_beams == 0 {
            return Err(CircuitError::NoBeams);
        }
        let check = |index: usize, kind: &'static str, beam: usize| {
            if beam == 0 || beam > n_beams {
                Err(CircuitError::BeamOutOfRange {
                    index,
                    kind,
                    beam,
                    n_beams,
                })
            } else {
                Ok(())
            }
        };
        for (index, el) in elements.iter().enumerate() {
            match &el.kind {
                ElementKind::Splitter { beams: (a, b), .. } => {
                    check(index, "beamsplitter", *a)?;
                    check(index, "beamsplitter", *b)?;
                    if a == b {
                        return Err(CircuitError::SplitterBeamsEqual { index, beam: *a });
                    }
                }
                ElementKind::Filter { beam, .. } => check(index, "filter", *beam)?,
                ElementKind::Mirror { beam, .. } => check(index, "mirror", *beam)?,
            }
        }
        for (index, tap) in detectors.iter().enumerate() {
            check(index, "detector", tap.beam)?;
        }
        Ok(Netlist {
            n_beams,
            elements,
            detectors,
        })
    }

    pub fn n_beams(&self) -> usize {
        self.n_beams
    }

    pub fn elements(&self) -> &[NetElement] {
        &self.elements
    }

    pub fn detectors(&self) -> &[DetectorTap] {
        &self.detectors
    }
}

/// Joint state of n indexed beams; the state space is the direct sum of the
/// per-beam polarization spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct NBeamState {
    pub beams: Vec<JonesVector>,
}

impl NBeamState {
    pub fn new(beams: Vec<JonesVector>) -> Self {
        NBeamState { beams }
    }

    /// All beams dark except `beam` (1-based), which carries `psi`.
    pub fn single(n_beams: usize, beam: usize, psi: JonesVector) -> Self {
        assert!(beam >= 1 && beam <= n_beams, "beam index out of range");
        let mut beams = vec![JonesVector::ZERO; n_beams];
        beams[beam - 1] = psi;
        NBeamState { beams }
    }

    pub fn total_presence(&self) -> f64 {
        self.beams.iter().map(|b| b.presence_probability()).sum()
    }

    pub fn scale(&self, z: num_complex::Complex64) -> Self {
        NBeamState::new(self.beams.iter().map(|b| b.scale(z)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.beams.len(), other.beams.len());
        NBeamState::new(
            self.beams
                .iter()
                .zip(&other.beams)
                .map(|(a, b)| *a + *b)
                .collect(),
        )
    }
}

/// Applies every element in order and returns the final state.
pub fn evolve(net: &Netlist, input: &NBeamState) -> Result<NBeamState, CircuitError> {
    if input.beams.len() != net.n_beams {
        return Err(CircuitError::BeamCountMismatch {
            expected: net.n_beams,
            got: input.beams.len(),
        });
    }
    let mut beams = input.beams.clone();
    for el in &net.elements {
        match &el.kind {
            ElementKind::Splitter {
                beams: (a, b),
                splitter,
            } => {
                let pair = TwoBeamState::new(beams[a - 1], beams[b - 1]);
                let out = splitter.apply(&pair);
                beams[a - 1] = out.beam1;
                beams[b - 1] = out.beam2;
            }
            ElementKind::Filter { beam, filter } => {
                beams[beam - 1] = filter.apply(&beams[beam - 1]);
            }
            ElementKind::Mirror { beam, mirror } => {
                beams[beam - 1] = mirror.apply(&beams[beam - 1]);
            }
        }
    }
    Ok(NBeamState::new(beams))
}

/// Evolves the input and reads every detector tap, in declaration order.
pub fn detection_probabilities(
    net: &Netlist,
    input: &NBeamState,
) -> Result<Vec<(usize, f64)>, CircuitError> {
    let out = evolve(net, input)?;
    Ok(net
        .detectors
        .iter()
        .map(|tap| (tap.beam, tap.detector.detect(&out.beams[tap.beam - 1])))
        .collect())
}
