//! Deferred fermion correction.
//!
//! Fermions are never moved during the run, so every change of the ψ charge
//! of a cell between two measurements is an event. At readout the events are
//! paired by minimum-weight matching under the 2+1D L1 distance and each pair
//! is joined by a shortest spatial path.

use serde::{Deserialize, Serialize};

use crate::engine::{Event, EventKind, Trace};
use crate::error::SimError;
use crate::lattice::{EdgeSet, SpaceTimeCell, Torus, TorusCoord};
use crate::matching::{mwpm, MatchNode, Metric, SpacetimeL1};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Appearance,
    Disappearance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FermionCause {
    /// A ψ-pair error put a fermion on an empty cell.
    PsiError,
    /// A ψ-pair error hit a cell already holding a fermion.
    AnnihilationOnOccupied,
    /// An anyon took up a fermion.
    Swallow,
    /// Two anyons fused to ψ.
    FusionOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FermionEvent {
    pub location: SpaceTimeCell,
    pub polarity: Polarity,
    pub cause: FermionCause,
}

/// Pairs of fermion events and the spatial paths joining them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FermionCorrection {
    /// Indices into the event list.
    pub pairs: Vec<(usize, usize)>,
    pub paths: Vec<Vec<TorusCoord>>,
    pub weight: u64,
}

impl FermionCorrection {
    pub fn edges(&self, torus: &Torus) -> EdgeSet {
        let mut set = EdgeSet::new(torus.size());
        for p in &self.paths {
            set.toggle_path(torus, p);
        }
        set
    }

    pub fn to_events(&self, round: u32) -> Vec<Event> {
        self.paths
            .iter()
            .map(|p| Event::new(round, EventKind::FermionCorrection, p, &[]))
            .collect()
    }
}

struct FieldReplay {
    torus: Torus,
    occupied: Vec<bool>,
    field: Vec<bool>,
    /// ψ bit at the last measurement and cause of the latest change, for cells touched in the current slab.
    touched: Vec<Option<(bool, FermionCause)>>,
    dirty: Vec<usize>,
}

impl FieldReplay {
    fn set(&mut self, c: TorusCoord, value: bool, cause: FermionCause) {
        let i = self.torus.cell_index(c);
        match &mut self.touched[i] {
            Some((_, k)) => *k = cause,
            slot @ None => {
                *slot = Some((self.field[i], cause));
                self.dirty.push(i);
            }
        }
        self.field[i] = value;
    }

    fn flush(&mut self, t: u32, out: &mut Vec<FermionEvent>) {
        self.dirty.sort_unstable();
        for i in self.dirty.drain(..) {
            let (before, cause) = self.touched[i].take().expect("dirty cell is touched");
            if before != self.field[i] {
                out.push(FermionEvent {
                    location: SpaceTimeCell::at(self.torus.cell_at(i), t),
                    polarity: if self.field[i] {
                        Polarity::Appearance
                    } else {
                        Polarity::Disappearance
                    },
                    cause,
                });
            }
        }
    }
}

/// Fermion events of a completed trace, ordered by measurement round then cell.
pub fn collect_fermion_events(trace: &Trace) -> Result<Vec<FermionEvent>, SimError> {
    let torus = Torus::new(trace.header.l)?;
    let n = torus.num_cells();
    let mut r = FieldReplay {
        torus,
        occupied: vec![false; n],
        field: vec![false; n],
        touched: vec![None; n],
        dirty: Vec::new(),
    };
    let mut out = Vec::new();
    let mut slab = 0;
    for e in &trace.events {
        let in_slab = matches!(
            e.kind,
            EventKind::SigmaError
                | EventKind::PsiError
                | EventKind::Move
                | EventKind::Fusion
                | EventKind::Absorb
                | EventKind::Monodromy
                | EventKind::PsiDeposit
        );
        if !in_slab {
            continue;
        }
        if e.round != slab {
            r.flush(slab, &mut out);
            slab = e.round;
        }
        let ci = |k: usize| torus.cell_index(e.cell(k));
        match e.kind {
            EventKind::SigmaError => {
                for k in 0..2 {
                    r.occupied[ci(k)] = true;
                }
            }
            EventKind::Move => {
                r.occupied[ci(0)] = false;
                r.occupied[ci(1)] = true;
            }
            EventKind::Fusion => r.occupied[ci(0)] = false,
            EventKind::PsiError => {
                for k in 0..2 {
                    let i = ci(k);
                    if !r.occupied[i] {
                        let cause = if r.field[i] {
                            FermionCause::AnnihilationOnOccupied
                        } else {
                            FermionCause::PsiError
                        };
                        r.set(e.cell(k), !r.field[i], cause);
                    }
                }
            }
            EventKind::Absorb => {
                if r.field[ci(0)] {
                    r.set(e.cell(0), false, FermionCause::Swallow);
                }
            }
            EventKind::PsiDeposit => {
                let i = ci(0);
                r.set(e.cell(0), !r.field[i], FermionCause::FusionOutcome);
            }
            _ => {}
        }
    }
    r.flush(slab, &mut out);
    if out.len() % 2 == 1 {
        return Err(SimError::Invariant(format!(
            "odd number of fermion events ({})",
            out.len()
        )));
    }
    Ok(out)
}

/// Minimum-weight pairing of the events with shortest correction paths.
pub fn match_fermion_events(events: &[FermionEvent], l: u32) -> Result<FermionCorrection, SimError> {
    let torus = Torus::new(l)?;
    let nodes: Vec<MatchNode> = events
        .iter()
        .enumerate()
        .map(|(id, e)| MatchNode {
            id,
            location: e.location,
        })
        .collect();
    let metric = SpacetimeL1 { l };
    let m = mwpm(&nodes, &metric)?;
    let mut paths = Vec::with_capacity(m.pairs.len());
    for &(i, j) in &m.pairs {
        let (a, b) = (events[i].location.pos, events[j].location.pos);
        paths.push(torus.path_in_class(a, b, torus.reduced_class(a, b))?);
    }
    debug_assert_eq!(
        m.weight,
        m.pairs
            .iter()
            .map(|&(i, j)| metric.distance(events[i].location, events[j].location))
            .sum::<u64>()
    );
    Ok(FermionCorrection {
        pairs: m.pairs,
        paths,
        weight: m.weight,
    })
}
