//! Line-delimited JSON event log of a trial.
//!
//! The first line is `{"header": {...}}`, then one event object per line, and
//! finally `{"verdict": {...}}` once the trial has been analysed.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::fusion::{Channel, ModeId};
use crate::ledger::Verdict;
use crate::lattice::TorusCoord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    SigmaError,
    PsiError,
    Move,
    Detect,
    Fusion,
    Absorb,
    Monodromy,
    PsiDeposit,
    Syndrome,
    Hypothesis,
    FermionCorrection,
}

/// One recorded event.
///
/// `round` is the time slab for events between measurements and the
/// measurement index for `detect`, `syndrome` and `hypothesis`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub round: u32,
    pub kind: EventKind,
    pub cells: Vec<[u32; 2]>,
    pub modes: Vec<ModeId>,
    pub outcome: Option<Channel>,
}

impl Event {
    pub fn new(round: u32, kind: EventKind, cells: &[TorusCoord], modes: &[ModeId]) -> Self {
        Event {
            round,
            kind,
            cells: cells.iter().map(|c| [c.x, c.y]).collect(),
            modes: modes.to_vec(),
            outcome: None,
        }
    }

    pub fn with_outcome(mut self, outcome: Channel) -> Self {
        self.outcome = Some(outcome);
        self
    }

    pub fn cell(&self, i: usize) -> TorusCoord {
        let [x, y] = self.cells[i];
        TorusCoord::new(x, y)
    }

    pub fn coords(&self) -> Vec<TorusCoord> {
        (0..self.cells.len()).map(|i| self.cell(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    #[serde(rename = "L")]
    pub l: u32,
    pub p: f64,
    #[serde(rename = "T")]
    pub rounds: u32,
    pub trial: u64,
    pub master_seed: u64,
    pub trial_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub events: Vec<Event>,
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    header: TraceHeader,
}

#[derive(Serialize, Deserialize)]
struct VerdictLine {
    verdict: Verdict,
}

/// A parsed trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub trace: Trace,
    pub verdict: Option<Verdict>,
}

pub fn write_trace<W: Write>(mut out: W, trace: &Trace, verdict: Option<&Verdict>) -> Result<(), SimError> {
    serde_json::to_writer(
        &mut out,
        &HeaderLine {
            header: trace.header.clone(),
        },
    )?;
    out.write_all(b"\n")?;
    for e in &trace.events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    if let Some(v) = verdict {
        serde_json::to_writer(&mut out, &VerdictLine { verdict: v.clone() })?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn trace_to_string(trace: &Trace, verdict: Option<&Verdict>) -> String {
    let mut buf = Vec::new();
    write_trace(&mut buf, trace, verdict).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn read_trace<R: BufRead>(input: R) -> Result<TraceFile, SimError> {
    let mut header = None;
    let mut events = Vec::new();
    let mut verdict = None;
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |e: serde_json::Error| SimError::Parse {
            line: line_no,
            message: e.to_string(),
        };
        if header.is_none() {
            let h: HeaderLine = serde_json::from_str(&line).map_err(parse_err)?;
            header = Some(h.header);
            continue;
        }
        if verdict.is_some() {
            return Err(SimError::Parse {
                line: line_no,
                message: "content after the verdict line".into(),
            });
        }
        if line.trim_start().starts_with("{\"verdict\"") {
            let v: VerdictLine = serde_json::from_str(&line).map_err(parse_err)?;
            verdict = Some(v.verdict);
        } else {
            let e: Event = serde_json::from_str(&line).map_err(parse_err)?;
            events.push(e);
        }
    }
    let header = header.ok_or(SimError::Parse {
        line: 1,
        message: "missing header line".into(),
    })?;
    Ok(TraceFile {
        trace: Trace { header, events },
        verdict,
    })
}
