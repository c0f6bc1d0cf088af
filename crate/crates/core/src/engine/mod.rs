//! The per-round simulation loop.
//!
//! Each slab runs, in order: the decoder's planned moves, error sampling and
//! application, a flawless charge measurement of every cell, and matching of
//! the new syndromes followed by replanning. After the noisy rounds the loop
//! continues with `p = 0` until no anyon is left, then the trace is analysed.

mod chains;
mod config;
mod trace;

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use chains::{pair_loose_ends, Chain, ChainBook, End, JoinOutcome, LooseLink};
pub use config::{mix64, trial_seed, Config};
pub use trace::{read_trace, trace_to_string, write_trace, Event, EventKind, Trace, TraceFile, TraceHeader};

use crate::error::SimError;
use crate::fusion::{Channel, FermionField, ModeId, PairingState};
use crate::lattice::{Dir, SpaceTimeCell, Torus, TorusCoord};
use crate::ledger::{self, Verdict};
use crate::matching::{mwpm, Manhattan, MatchNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Sigma,
    Psi,
}

/// An error event on the edge joining two adjacent cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorEvent {
    pub kind: ErrorKind,
    pub cells: (TorusCoord, TorusCoord),
}

/// An error forced into a given slab, applied after the sampled ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Injection {
    pub slab: u32,
    pub error: ErrorEvent,
}

/// Counters of conditions that should never occur.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineDiagnostics {
    pub parity_violations: u64,
    pub odd_syndrome_rounds: u64,
    pub odd_anyon_rounds: u64,
    pub syndrome_mismatches: u64,
    pub dangling_after_matching: u64,
    pub string_inconsistencies: u64,
    pub completion_non_monotone: u64,
}

impl EngineDiagnostics {
    pub fn total(&self) -> u64 {
        self.parity_violations
            + self.odd_syndrome_rounds
            + self.odd_anyon_rounds
            + self.syndrome_mismatches
            + self.dangling_after_matching
            + self.string_inconsistencies
            + self.completion_non_monotone
    }

    pub fn add(&mut self, o: &EngineDiagnostics) {
        self.parity_violations += o.parity_violations;
        self.odd_syndrome_rounds += o.odd_syndrome_rounds;
        self.odd_anyon_rounds += o.odd_anyon_rounds;
        self.syndrome_mismatches += o.syndrome_mismatches;
        self.dangling_after_matching += o.dangling_after_matching;
        self.string_inconsistencies += o.string_inconsistencies;
        self.completion_non_monotone += o.completion_non_monotone;
    }
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trace: Trace,
    /// `None` when completion timed out.
    pub verdict: Option<Verdict>,
    pub diagnostics: EngineDiagnostics,
    pub completion_rounds: u32,
}

impl TrialOutcome {
    pub fn timed_out(&self) -> bool {
        self.verdict.is_none()
    }

    pub fn to_jsonl(&self) -> String {
        trace_to_string(&self.trace, self.verdict.as_ref())
    }
}

/// Draws the errors of one slab: for every edge in index order a σ-pair and a
/// ψ-pair each with probability `p`; when both fire only the σ-pair is kept.
pub fn sample_errors<R: Rng>(torus: &Torus, p: f64, rng: &mut R) -> Vec<ErrorEvent> {
    let mut out = Vec::new();
    for e in torus.edges() {
        let sigma = rng.gen_bool(p);
        let psi = rng.gen_bool(p);
        let kind = match (sigma, psi) {
            (true, _) => ErrorKind::Sigma,
            (false, true) => ErrorKind::Psi,
            (false, false) => continue,
        };
        out.push(ErrorEvent {
            kind,
            cells: torus.edge_endpoints(e),
        });
    }
    out
}

/// Runs trial `index` of `config` with its derived seed.
pub fn run_trial(config: &Config, index: u64) -> Result<TrialOutcome, SimError> {
    Simulation::new(config, index)?.run()
}

/// State of one trial.
pub struct Simulation {
    cfg: Config,
    torus: Torus,
    rng: ChaCha8Rng,
    header: TraceHeader,
    st: PairingState,
    field: FermionField,
    occ: Vec<Option<ModeId>>,
    presence: Vec<bool>,
    tracked: BTreeSet<ModeId>,
    chains: ChainBook,
    plans: Vec<(ModeId, Dir)>,
    events: Vec<Event>,
    diag: EngineDiagnostics,
    injections: Vec<Injection>,
    slab: u32,
    // Scratch for the current slab.
    toggled: Vec<bool>,
    deaths: BTreeMap<ModeId, TorusCoord>,
}

impl Simulation {
    pub fn new(config: &Config, index: u64) -> Result<Self, SimError> {
        config.validate()?;
        Ok(Self::with_seed(config, index, trial_seed(config.seed, index)))
    }

    pub fn with_seed(config: &Config, index: u64, seed: u64) -> Self {
        let torus = Torus::new(config.l).expect("validated lattice size");
        let n = torus.num_cells();
        Simulation {
            cfg: config.clone(),
            torus,
            rng: ChaCha8Rng::seed_from_u64(seed),
            header: TraceHeader {
                l: config.l,
                p: config.p,
                rounds: config.rounds,
                trial: index,
                master_seed: config.seed,
                trial_seed: seed,
            },
            st: PairingState::new(torus),
            field: FermionField::new(torus),
            occ: vec![None; n],
            presence: vec![false; n],
            tracked: BTreeSet::new(),
            chains: ChainBook::new(),
            plans: Vec::new(),
            events: Vec::new(),
            diag: EngineDiagnostics::default(),
            injections: Vec::new(),
            slab: 0,
            toggled: vec![false; n],
            deaths: BTreeMap::new(),
        }
    }

    pub fn inject(&mut self, injection: Injection) {
        self.injections.push(injection);
    }

    pub fn pairing(&self) -> &PairingState {
        &self.st
    }

    pub fn fermions(&self) -> &FermionField {
        &self.field
    }

    pub fn chains(&self) -> &ChainBook {
        &self.chains
    }

    pub fn plans(&self) -> &[(ModeId, Dir)] {
        &self.plans
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn diagnostics(&self) -> &EngineDiagnostics {
        &self.diag
    }

    pub fn slab(&self) -> u32 {
        self.slab
    }

    fn idx(&self, c: TorusCoord) -> usize {
        self.torus.cell_index(c)
    }

    fn check_parity(&mut self) {
        if (self.field.count() + self.st.psi_pairs()) % 2 != 0 {
            self.diag.parity_violations += 1;
        }
    }

    fn fuse_at(&mut self, c: TorusCoord, x: ModeId, y: ModeId) -> Result<(), SimError> {
        let (a, b) = (x.min(y), x.max(y));
        let rng = &mut self.rng;
        let r = self.st.measure_pair(a, b, &mut || {
            if rng.gen_bool(0.5) {
                Channel::Psi
            } else {
                Channel::Vacuum
            }
        })?;
        self.events
            .push(Event::new(self.slab, EventKind::Fusion, &[c], &[a, b]).with_outcome(r.outcome));
        let i = self.idx(c);
        self.occ[i] = None;
        if r.outcome == Channel::Psi {
            self.field.toggle(c);
            self.events.push(Event::new(self.slab, EventKind::PsiDeposit, &[c], &[]));
        }
        Ok(())
    }

    fn absorb_at(&mut self, c: TorusCoord, m: ModeId) -> Result<(), SimError> {
        self.field.clear(c);
        self.st.absorb_psi(m)?;
        self.events.push(Event::new(self.slab, EventKind::Absorb, &[c], &[m]));
        Ok(())
    }

    /// Executes the planned moves in ascending mode order.
    pub fn execute_moves(&mut self) -> Result<(), SimError> {
        let plans = std::mem::take(&mut self.plans);
        for (m, dir) in plans {
            if !self.st.is_alive(m) {
                continue;
            }
            let rec = self.st.move_mode(m, dir)?;
            self.events
                .push(Event::new(self.slab, EventKind::Move, &[rec.from, rec.to], &[m]));
            for x in &rec.crossings {
                self.events.push(Event::new(
                    self.slab,
                    EventKind::Monodromy,
                    &[x.cell],
                    &[m, x.pair.0, x.pair.1],
                ));
            }
            self.chains.on_move(m, dir);
            let (fi, ti) = (self.idx(rec.from), self.idx(rec.to));
            self.occ[fi] = None;
            self.toggled[fi] ^= true;
            self.toggled[ti] ^= true;
            if let Some(o) = self.occ[ti] {
                self.fuse_at(rec.to, o, m)?;
                self.chains.join(o, m);
            } else {
                if self.field.has_psi(rec.to) {
                    self.absorb_at(rec.to, m)?;
                }
                self.occ[ti] = Some(m);
            }
            self.check_parity();
        }
        Ok(())
    }

    /// Applies error events in order, resolving fusions and absorptions immediately.
    pub fn apply_errors(&mut self, errors: &[ErrorEvent]) -> Result<(), SimError> {
        for e in errors {
            let (c1, c2) = e.cells;
            match e.kind {
                ErrorKind::Sigma => {
                    let (n1, n2) = self.st.create_sigma_pair(c1, c2)?;
                    self.events
                        .push(Event::new(self.slab, EventKind::SigmaError, &[c1, c2], &[n1, n2]));
                    for (c, n) in [(c1, n1), (c2, n2)] {
                        let i = self.idx(c);
                        if self.field.has_psi(c) {
                            self.absorb_at(c, n)?;
                        }
                        if let Some(o) = self.occ[i] {
                            self.fuse_at(c, o, n)?;
                            if self.tracked.contains(&o) {
                                self.deaths.insert(o, c);
                            }
                        } else {
                            self.occ[i] = Some(n);
                        }
                    }
                }
                ErrorKind::Psi => {
                    self.events.push(Event::new(self.slab, EventKind::PsiError, &[c1, c2], &[]));
                    for c in [c1, c2] {
                        match self.occ[self.idx(c)] {
                            Some(o) => {
                                self.st.absorb_psi(o)?;
                                self.events.push(Event::new(self.slab, EventKind::Absorb, &[c], &[o]));
                            }
                            None => {
                                self.field.toggle(c);
                            }
                        }
                    }
                }
            }
            self.check_parity();
        }
        Ok(())
    }

    /// Measures every cell and returns the syndrome cells of this slab.
    pub fn measure_and_extract(&mut self) -> Vec<TorusCoord> {
        let t = self.slab;
        let mut syndrome = Vec::new();
        let mut births: BTreeMap<TorusCoord, Vec<ModeId>> = BTreeMap::new();
        let mut alive = 0;
        for i in 0..self.torus.num_cells() {
            let c = self.torus.cell_at(i);
            let now = self.occ[i].is_some();
            if let Some(m) = self.occ[i] {
                alive += 1;
                self.events.push(Event::new(t, EventKind::Detect, &[c], &[m]));
                if !self.tracked.contains(&m) {
                    births.entry(c).or_default().push(m);
                }
            }
            if now != (self.presence[i] ^ self.toggled[i]) {
                syndrome.push(c);
                self.events.push(Event::new(t, EventKind::Syndrome, &[c], &[]));
            }
            self.presence[i] = now;
            self.toggled[i] = false;
        }
        if syndrome.len() % 2 == 1 {
            self.diag.odd_syndrome_rounds += 1;
        }
        if alive % 2 == 1 {
            self.diag.odd_anyon_rounds += 1;
        }

        let mut deaths: BTreeMap<TorusCoord, Vec<ModeId>> = BTreeMap::new();
        for (&m, &c) in &self.deaths {
            deaths.entry(c).or_default().push(m);
        }
        self.deaths.clear();
        let cells: BTreeSet<TorusCoord> = deaths.keys().chain(births.keys()).copied().collect();
        let mut dangling = Vec::new();
        for c in cells {
            let d = deaths.get(&c).map_or(&[][..], Vec::as_slice);
            let b = births.get(&c).map_or(&[][..], Vec::as_slice);
            let links = pair_loose_ends(d, b);
            if links.iter().any(LooseLink::is_dangling) {
                dangling.push(c);
            }
            self.chains.apply_links(&links, SpaceTimeCell::at(c, t));
        }
        if dangling != syndrome {
            self.diag.syndrome_mismatches += 1;
        }
        if !self.st.strings_consistent() {
            self.diag.string_inconsistencies += 1;
        }
        self.tracked = self.occ.iter().flatten().copied().collect();
        syndrome
    }

    /// Matches this slab's syndromes and plans the next slab's moves.
    pub fn match_and_replan(&mut self, syndrome: &[TorusCoord]) -> Result<(), SimError> {
        let t = self.slab;
        let nodes: Vec<MatchNode> = syndrome
            .iter()
            .enumerate()
            .map(|(id, &c)| MatchNode {
                id,
                location: SpaceTimeCell::at(c, t),
            })
            .collect();
        if nodes.len() % 2 == 0 {
            let h = mwpm(&nodes, &Manhattan { l: self.cfg.l })?;
            for (i, j) in h.pairs {
                let (a, b) = (syndrome[i], syndrome[j]);
                self.events.push(Event::new(t, EventKind::Hypothesis, &[a, b], &[]));
                let class = self.torus.reduced_class(a, b);
                self.chains
                    .connect(SpaceTimeCell::at(a, t), SpaceTimeCell::at(b, t), class);
            }
        }
        if self.chains.dangling() > 0 {
            self.diag.dangling_after_matching += 1;
        }
        self.plans = self.chains.plans(&self.torus);
        Ok(())
    }

    /// Runs one full slab with error probability `p`.
    pub fn step(&mut self, p: f64) -> Result<(), SimError> {
        self.slab += 1;
        self.execute_moves()?;
        let mut errors = sample_errors(&self.torus, p, &mut self.rng);
        let slab = self.slab;
        errors.extend(self.injections.iter().filter(|i| i.slab == slab).map(|i| i.error));
        self.apply_errors(&errors)?;
        let syndrome = self.measure_and_extract();
        self.match_and_replan(&syndrome)
    }

    /// Runs the noisy rounds and the noiseless completion, then analyses the trace.
    pub fn run(mut self) -> Result<TrialOutcome, SimError> {
        for _ in 0..self.cfg.rounds {
            self.step(self.cfg.p)?;
        }
        let cap = self.cfg.completion_cap(self.st.alive_count());
        let mut completion_rounds = 0;
        let mut key = (self.chains.total_length(), self.st.alive_count());
        while self.st.alive_count() > 0 || self.slab < self.last_injection() {
            if completion_rounds >= cap {
                return Ok(TrialOutcome {
                    trace: Trace {
                        header: self.header,
                        events: self.events,
                    },
                    verdict: None,
                    diagnostics: self.diag,
                    completion_rounds,
                });
            }
            self.step(0.0)?;
            completion_rounds += 1;
            let next = (self.chains.total_length(), self.st.alive_count());
            if next >= key && self.st.alive_count() > 0 {
                self.diag.completion_non_monotone += 1;
            }
            key = next;
        }
        let mut trace = Trace {
            header: self.header,
            events: self.events,
        };
        let analysis = ledger::analyze(&trace)?;
        trace.events.extend(analysis.correction_events());
        Ok(TrialOutcome {
            trace,
            verdict: Some(analysis.verdict),
            diagnostics: self.diag,
            completion_rounds,
        })
    }

    fn last_injection(&self) -> u32 {
        self.injections.iter().map(|i| i.slab).max().unwrap_or(0)
    }
}
