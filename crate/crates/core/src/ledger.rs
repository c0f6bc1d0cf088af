//! Post-trial accounting and the logical verdict.
//!
//! The trace is replayed through a fresh [`PairingState`] with the recorded
//! fusion outcomes. The σ error set of each slab is split canonically into
//! strings ending on the slab's syndromes and closed loops. Together with the
//! hypothesis strings and the anyon world-lines these strings form a graph in
//! which every syndrome vertex has one string of each kind; its connected
//! components are the [`LedgerComponent`]s. Each component closes up into a
//! cycle `O = Aˢ ⊎ W` whose spatial winding decides the σ sector.
//!
//! The ψ sector follows the fermionic charge along the history. Every anyon
//! carries a flag telling whether a fermion rides on it, with the invariant
//! that a pair's channel equals the XOR of its two flags. Monodromies and
//! fusions that would break the invariant are repaired by sending a fermion
//! along a pair string. The fermion error edges, the moves of flagged anyons,
//! these transfer paths and the readout correction form a closed set whose
//! winding decides the ψ sector.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::{pair_loose_ends, Event, EventKind, LooseLink, Trace};
use crate::error::SimError;
use crate::fermion::{collect_fermion_events, match_fermion_events, FermionCorrection, FermionEvent};
use crate::fusion::{Crossing, ModeId, PairingState};
use crate::lattice::{decompose_edge_set, DualEdge, EdgeSet, SpaceTimeCell, Torus, TorusCoord, WindingParity};
use crate::matching::{mwpm, Manhattan, MatchNode};

/// One connected component of the string graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerComponent {
    pub index: usize,
    pub vertices: Vec<SpaceTimeCell>,
    pub a_s: u64,
    pub h: u64,
    pub w_h: u64,
    pub w_v: u64,
    pub f: u64,
    pub o: u64,
    pub sigma_winding: WindingParity,
}

impl LedgerComponent {
    pub fn violations(&self) -> InequalityViolations {
        InequalityViolations {
            wh_le_h: (self.w_h > self.h) as u64,
            h_le_as: (self.h > self.a_s) as u64,
            wh_ge_wv_minus_f: (self.w_h + self.f < self.w_v) as u64,
            f_le_as: (self.f > self.a_s) as u64,
            o_le_4as: (self.o > 4 * self.a_s) as u64,
            optimality: 0,
        }
    }
}

/// Numbers of components (or rounds, for `optimality`) breaking each inequality.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityViolations {
    pub wh_le_h: u64,
    pub h_le_as: u64,
    pub wh_ge_wv_minus_f: u64,
    pub f_le_as: u64,
    pub o_le_4as: u64,
    pub optimality: u64,
}

impl InequalityViolations {
    pub fn add(&mut self, o: &InequalityViolations) {
        self.wh_le_h += o.wh_le_h;
        self.h_le_as += o.h_le_as;
        self.wh_ge_wv_minus_f += o.wh_ge_wv_minus_f;
        self.f_le_as += o.f_le_as;
        self.o_le_4as += o.o_le_4as;
        self.optimality += o.optimality;
    }
}

pub fn check_inequalities(components: &[LedgerComponent]) -> InequalityViolations {
    let mut v = InequalityViolations::default();
    for c in components {
        v.add(&c.violations());
    }
    v
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerDiagnostics {
    pub components: u64,
    pub violations: InequalityViolations,
    /// Syndrome vertices without exactly one string of each kind, and syndromes differing from the error boundary.
    pub structure_errors: u64,
    pub unclosed_cycles: u64,
    pub flag_mismatches: u64,
    pub transfer_fallbacks: u64,
    pub fermion_events: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    /// Windings of the component cycles followed by those of the error loops.
    pub sigma_winding: Vec<WindingParity>,
    /// Only evaluated when the σ sector is trivial.
    pub psi_winding: Option<WindingParity>,
    pub sigma_failure: bool,
    pub psi_failure: bool,
    pub success: bool,
    pub diagnostics: LedgerDiagnostics,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub verdict: Verdict,
    pub components: Vec<LedgerComponent>,
    pub error_loops: Vec<WindingParity>,
    pub fermion_events: Vec<FermionEvent>,
    pub correction: FermionCorrection,
    pub final_round: u32,
}

impl Analysis {
    pub fn correction_events(&self) -> Vec<Event> {
        self.correction.to_events(self.final_round)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

#[derive(Debug, Clone)]
struct WorldLine {
    pos: TorusCoord,
    edges: Vec<DualEdge>,
    joins: u64,
}

/// Everything collected from one pass over the trace.
struct Replay {
    torus: Torus,
    /// σ error edges per slab.
    errors: BTreeMap<u32, Vec<DualEdge>>,
    syndromes: BTreeMap<u32, Vec<TorusCoord>>,
    hypotheses: BTreeMap<u32, Vec<(TorusCoord, TorusCoord)>>,
    lines: BTreeMap<ModeId, WorldLine>,
    deaths: BTreeMap<(u32, TorusCoord), Vec<ModeId>>,
    births: BTreeMap<(u32, TorusCoord), Vec<ModeId>>,
    /// World-line pairs glued at a fusion of two tracked anyons.
    joins: Vec<(ModeId, ModeId)>,
    psi: EdgeSet,
    flags: Vec<bool>,
    flag_mismatches: u64,
    transfer_fallbacks: u64,
    final_round: u32,
}

fn trace_err(e: &Event, msg: impl std::fmt::Display) -> SimError {
    SimError::Trace(format!("round {} {:?}: {msg}", e.round, e.kind))
}

impl Replay {
    fn flag(&mut self, m: ModeId) -> &mut bool {
        let i = m as usize;
        if self.flags.len() <= i {
            self.flags.resize(i + 1, false);
        }
        &mut self.flags[i]
    }

    fn check_flags(&mut self, st: &PairingState, m: ModeId) {
        let Ok(p) = st.partner(m) else { return };
        let ch = st.channel(m).expect("alive");
        if ch.is_psi() != (*self.flag(m) ^ *self.flag(p)) {
            self.flag_mismatches += 1;
        }
    }

    fn on_crossing(&mut self, st: &PairingState, m: ModeId, x: &Crossing) -> Result<(), SimError> {
        let (k, p) = x.pair;
        let string = st.string(k)?;
        let reach = |q: ModeId| -> Result<Option<Vec<TorusCoord>>, SimError> {
            Ok(string.path_within(&self.torus, x.cell, &[st.position(q)?]))
        };
        let (pk, pp) = (reach(k)?, reach(p)?);
        let (target, path) = match (pk, pp) {
            (Some(a), Some(b)) => {
                let pick_k = a.len() < b.len() || (a.len() == b.len() && k < p);
                if pick_k {
                    (k, a)
                } else {
                    (p, b)
                }
            }
            (Some(a), None) => (k, a),
            (None, Some(b)) => (p, b),
            (None, None) => {
                self.transfer_fallbacks += 1;
                let to = st.position(k.min(p))?;
                let path = self.torus.path_in_class(x.cell, to, self.torus.reduced_class(x.cell, to))?;
                (k.min(p), path)
            }
        };
        self.psi.toggle_path(&self.torus, &path);
        *self.flag(m) ^= true;
        *self.flag(target) ^= true;
        Ok(())
    }

    fn run(trace: &Trace) -> Result<Replay, SimError> {
        let torus = Torus::new(trace.header.l)?;
        let mut st = PairingState::new(torus);
        let mut r = Replay {
            torus,
            errors: BTreeMap::new(),
            syndromes: BTreeMap::new(),
            hypotheses: BTreeMap::new(),
            lines: BTreeMap::new(),
            deaths: BTreeMap::new(),
            births: BTreeMap::new(),
            joins: Vec::new(),
            psi: EdgeSet::new(torus.size()),
            flags: Vec::new(),
            flag_mismatches: 0,
            transfer_fallbacks: 0,
            final_round: 0,
        };
        let mut pending: Vec<Crossing> = Vec::new();
        let mut born_in: BTreeMap<ModeId, u32> = BTreeMap::new();
        for e in &trace.events {
            if e.kind == EventKind::FermionCorrection {
                continue;
            }
            r.final_round = r.final_round.max(e.round);
            let t = e.round;
            let need = |cells: usize, modes: usize| {
                if e.cells.len() != cells || e.modes.len() != modes {
                    Err(trace_err(e, "wrong number of cells or modes"))
                } else {
                    Ok(())
                }
            };
            if e.kind != EventKind::Monodromy && !pending.is_empty() {
                return Err(trace_err(e, "missing monodromy events"));
            }
            match e.kind {
                EventKind::SigmaError => {
                    need(2, 2)?;
                    let (c1, c2) = (e.cell(0), e.cell(1));
                    let (n1, n2) = st.create_sigma_pair(c1, c2)?;
                    if (n1, n2) != (e.modes[0], e.modes[1]) {
                        return Err(trace_err(e, format!("expected modes {n1},{n2}")));
                    }
                    born_in.insert(n1, t);
                    born_in.insert(n2, t);
                    let edge = torus.edge_between(c1, c2).ok_or_else(|| trace_err(e, "cells not adjacent"))?;
                    r.errors.entry(t).or_default().push(DualEdge::Horizontal { edge, t });
                }
                EventKind::PsiError => {
                    need(2, 0)?;
                    let edge = torus
                        .edge_between(e.cell(0), e.cell(1))
                        .ok_or_else(|| trace_err(e, "cells not adjacent"))?;
                    r.psi.toggle(torus.edge_index(edge));
                }
                EventKind::Move => {
                    need(2, 1)?;
                    let m = e.modes[0];
                    let (from, to) = (e.cell(0), e.cell(1));
                    if st.position(m)? != from {
                        return Err(trace_err(e, format!("mode {m} is not at {from}")));
                    }
                    let dir = torus.direction_to(from, to).ok_or_else(|| trace_err(e, "cells not adjacent"))?;
                    let rec = st.move_mode(m, dir)?;
                    for x in &rec.crossings {
                        r.on_crossing(&st, m, x)?;
                    }
                    let edge = torus.edge_toward(from, dir);
                    if *r.flag(m) {
                        r.psi.toggle(torus.edge_index(edge));
                    }
                    let line = r
                        .lines
                        .get_mut(&m)
                        .ok_or_else(|| trace_err(e, format!("mode {m} moved before being detected")))?;
                    line.edges.push(DualEdge::Horizontal { edge, t });
                    line.pos = to;
                    pending = rec.crossings;
                    pending.reverse();
                }
                EventKind::Monodromy => {
                    need(1, 3)?;
                    let x = pending.pop().ok_or_else(|| trace_err(e, "unexpected monodromy"))?;
                    if x.cell != e.cell(0) || x.pair != (e.modes[1], e.modes[2]) {
                        return Err(trace_err(e, "monodromy differs from replay"));
                    }
                }
                EventKind::Absorb => {
                    need(1, 1)?;
                    let m = e.modes[0];
                    if st.position(m)? != e.cell(0) {
                        return Err(trace_err(e, format!("mode {m} is not at the absorbing cell")));
                    }
                    st.absorb_psi(m)?;
                    *r.flag(m) ^= true;
                }
                EventKind::Fusion => {
                    need(1, 2)?;
                    let (a, b) = (e.modes[0], e.modes[1]);
                    let c = e.cell(0);
                    let s = e.outcome.ok_or_else(|| trace_err(e, "fusion without outcome"))?;
                    let a2 = st.partner(a)?;
                    let before = st.string(a)?.clone();
                    let rec = st.measure_pair(a, b, &mut || s)?;
                    if rec.outcome != s {
                        return Err(trace_err(e, "recorded outcome is impossible"));
                    }
                    if a2 != b {
                        let d = s.is_psi() ^ *r.flag(a) ^ *r.flag(b);
                        if d {
                            r.psi.xor_with(&before);
                            *r.flag(a2) ^= true;
                        }
                        r.check_flags(&st, a2);
                    }
                    let tracked = (r.lines.contains_key(&a), r.lines.contains_key(&b));
                    match tracked {
                        (true, true) => {
                            r.joins.push((a, b));
                            r.lines.get_mut(&a).expect("line").joins += 1;
                        }
                        (true, false) => {
                            r.deaths.entry((t, c)).or_default().push(a);
                            r.lines.get_mut(&a).expect("line").joins += 1;
                        }
                        (false, true) => {
                            r.deaths.entry((t, c)).or_default().push(b);
                            r.lines.get_mut(&b).expect("line").joins += 1;
                        }
                        (false, false) => {}
                    }
                    for m in [a, b] {
                        if let Some(l) = r.lines.get_mut(&m) {
                            if l.pos != c {
                                return Err(trace_err(e, format!("mode {m} fused away from its world-line")));
                            }
                        }
                    }
                }
                EventKind::PsiDeposit => need(1, 0)?,
                EventKind::Detect => {
                    need(1, 1)?;
                    let m = e.modes[0];
                    let c = e.cell(0);
                    if st.position(m)? != c {
                        return Err(trace_err(e, format!("mode {m} is not at {c}")));
                    }
                    let line = r.lines.entry(m).or_insert_with(|| WorldLine {
                        pos: c,
                        edges: Vec::new(),
                        joins: 0,
                    });
                    if line.edges.is_empty() {
                        if born_in.get(&m) != Some(&t) {
                            return Err(trace_err(e, format!("mode {m} first detected after its creation slab")));
                        }
                        r.births.entry((t, c)).or_default().push(m);
                    }
                    line.edges.push(DualEdge::Vertical { pos: c, t });
                }
                EventKind::Syndrome => {
                    need(1, 0)?;
                    r.syndromes.entry(t).or_default().push(e.cell(0));
                }
                EventKind::Hypothesis => {
                    need(2, 0)?;
                    r.hypotheses.entry(t).or_default().push((e.cell(0), e.cell(1)));
                }
                EventKind::FermionCorrection => unreachable!(),
            }
        }
        if !pending.is_empty() {
            return Err(SimError::Trace("trace ends with missing monodromy events".into()));
        }
        if st.alive_count() != 0 {
            return Err(SimError::Trace(format!(
                "{} anyons remain at the end of the trace",
                st.alive_count()
            )));
        }
        Ok(r)
    }
}

/// Connected components of the string graph plus per-round checks and error loops.
struct Components {
    components: Vec<LedgerComponent>,
    error_loops: Vec<WindingParity>,
    optimality: u64,
    structure_errors: u64,
    unclosed: u64,
}

fn build(r: &Replay) -> Result<Components, SimError> {
    let torus = r.torus;
    let l = torus.size();
    let mut structure_errors = 0u64;
    let mut optimality = 0u64;
    let mut error_loops = Vec::new();

    // Syndrome vertices, checked against the boundary of each slab's error set.
    let mut vertices: BTreeMap<SpaceTimeCell, usize> = BTreeMap::new();
    let mut boundaries: BTreeMap<u32, Vec<SpaceTimeCell>> = BTreeMap::new();
    let rounds: std::collections::BTreeSet<u32> = r.errors.keys().chain(r.syndromes.keys()).copied().collect();
    for &t in &rounds {
        let mut odd = EdgeSet::new(l);
        for e in r.errors.get(&t).into_iter().flatten() {
            if let DualEdge::Horizontal { edge, .. } = e {
                odd.toggle(torus.edge_index(*edge));
            }
        }
        let mut expected = odd.odd_cells(&torus);
        expected.sort();
        let mut recorded = r.syndromes.get(&t).cloned().unwrap_or_default();
        recorded.sort();
        if expected != recorded {
            structure_errors += 1;
        }
        let b: Vec<SpaceTimeCell> = expected.iter().map(|&c| SpaceTimeCell::at(c, t)).collect();
        for v in &b {
            let n = vertices.len();
            vertices.entry(*v).or_insert(n);
        }
        boundaries.insert(t, b);
    }
    // Re-number vertices in (t, y, x) order.
    for (i, v) in vertices.values_mut().enumerate() {
        *v = i;
    }
    let nv = vertices.len();
    let modes: Vec<ModeId> = r.lines.keys().copied().collect();
    let line_index: BTreeMap<ModeId, usize> = modes.iter().enumerate().map(|(i, &m)| (m, nv + i)).collect();
    let mut uf = UnionFind::new(nv + modes.len());
    let mut incidence = vec![[0u32; 3]; nv];

    struct Tally {
        a_s: u64,
        h: u64,
        sigma: EdgeSet,
    }
    let mut a_strings: Vec<(usize, u64, EdgeSet)> = Vec::new();
    let mut h_strings: Vec<(usize, u64)> = Vec::new();

    for (&t, b) in &boundaries {
        let edges = r.errors.get(&t).cloned().unwrap_or_default();
        let dec = decompose_edge_set(&edges, b, l)?;
        let mut induced = 0u64;
        for s in &dec.strings {
            let (i, j) = (vertices[&s.ends.0], vertices[&s.ends.1]);
            uf.union(i, j);
            incidence[i][0] += 1;
            incidence[j][0] += 1;
            let mut proj = EdgeSet::new(l);
            for e in &s.edges {
                if let DualEdge::Horizontal { edge, .. } = e {
                    proj.toggle(torus.edge_index(*edge));
                }
            }
            a_strings.push((i, s.edges.len() as u64, proj));
            induced += torus.distance(s.ends.0.pos, s.ends.1.pos);
        }
        for lp in &dec.loops {
            let mut proj = EdgeSet::new(l);
            for e in lp {
                if let DualEdge::Horizontal { edge, .. } = e {
                    proj.toggle(torus.edge_index(*edge));
                }
            }
            error_loops.push(torus.winding_parity(&proj)?);
        }

        let hyps = r.hypotheses.get(&t).cloned().unwrap_or_default();
        let mut weight = 0u64;
        for (a, c) in hyps {
            let (va, vc) = (SpaceTimeCell::at(a, t), SpaceTimeCell::at(c, t));
            let (Some(&i), Some(&j)) = (vertices.get(&va), vertices.get(&vc)) else {
                structure_errors += 1;
                continue;
            };
            let d = torus.distance(a, c);
            weight += d;
            uf.union(i, j);
            incidence[i][1] += 1;
            incidence[j][1] += 1;
            h_strings.push((i, d));
        }
        let nodes: Vec<MatchNode> = b
            .iter()
            .enumerate()
            .map(|(id, &location)| MatchNode { id, location })
            .collect();
        let best = mwpm(&nodes, &Manhattan { l })?.weight;
        if weight != best || weight > induced {
            optimality += 1;
        }
    }

    // World-lines: glue at joins and loose ends, attach dangling ends to vertices.
    for &(a, b) in &r.joins {
        uf.union(line_index[&a], line_index[&b]);
    }
    let cells: std::collections::BTreeSet<(u32, TorusCoord)> = r.deaths.keys().chain(r.births.keys()).copied().collect();
    for key in cells {
        let d = r.deaths.get(&key).map_or(&[][..], Vec::as_slice);
        let b = r.births.get(&key).map_or(&[][..], Vec::as_slice);
        let v = SpaceTimeCell::at(key.1, key.0);
        for link in pair_loose_ends(d, b) {
            match link {
                LooseLink::Replace { died: x, born: y } | LooseLink::MergeDeaths(x, y) | LooseLink::PairBirths(x, y) => {
                    uf.union(line_index[&x], line_index[&y]);
                }
                LooseLink::DanglingDeath(m) | LooseLink::DanglingBirth(m) => match vertices.get(&v) {
                    Some(&i) => {
                        uf.union(i, line_index[&m]);
                        incidence[i][2] += 1;
                    }
                    None => structure_errors += 1,
                },
            }
        }
    }
    structure_errors += incidence.iter().filter(|c| **c != [1, 1, 1]).count() as u64;

    // Aggregate by root, numbering components by their least element.
    let mut by_root: BTreeMap<usize, (Tally, LedgerComponent)> = BTreeMap::new();
    let n = nv + modes.len();
    let vertex_list: Vec<SpaceTimeCell> = vertices.keys().copied().collect();
    for x in 0..n {
        let root = uf.find(x);
        let entry = by_root.entry(root).or_insert_with(|| {
            (
                Tally {
                    a_s: 0,
                    h: 0,
                    sigma: EdgeSet::new(l),
                },
                LedgerComponent {
                    index: 0,
                    vertices: Vec::new(),
                    a_s: 0,
                    h: 0,
                    w_h: 0,
                    w_v: 0,
                    f: 0,
                    o: 0,
                    sigma_winding: WindingParity::default(),
                },
            )
        });
        if x < nv {
            entry.1.vertices.push(vertex_list[x]);
        } else {
            let line = &r.lines[&modes[x - nv]];
            entry.1.f += line.joins;
            for e in &line.edges {
                match e {
                    DualEdge::Horizontal { edge, .. } => {
                        entry.1.w_h += 1;
                        entry.0.sigma.toggle(torus.edge_index(*edge));
                    }
                    DualEdge::Vertical { .. } => entry.1.w_v += 1,
                }
            }
        }
    }
    for (i, len, proj) in a_strings {
        let root = uf.find(i);
        let entry = by_root.get_mut(&root).expect("root");
        entry.0.a_s += len;
        entry.0.sigma.xor_with(&proj);
    }
    for (i, d) in h_strings {
        let root = uf.find(i);
        by_root.get_mut(&root).expect("root").0.h += d;
    }
    let mut unclosed = 0;
    let mut components = Vec::with_capacity(by_root.len());
    for (index, (tally, mut c)) in by_root.into_values().enumerate() {
        c.index = index;
        c.a_s = tally.a_s;
        c.h = tally.h;
        c.o = c.a_s + c.w_h + c.w_v;
        c.sigma_winding = match torus.winding_parity(&tally.sigma) {
            Ok(w) => w,
            Err(_) => {
                unclosed += 1;
                WindingParity { wx: true, wy: true }
            }
        };
        components.push(c);
    }
    Ok(Components {
        components,
        error_loops,
        optimality,
        structure_errors,
        unclosed,
    })
}

/// Connected components of `Aˢ ⊔ H ⊔ W` for a completed trace.
pub fn build_components(trace: &Trace) -> Result<Vec<LedgerComponent>, SimError> {
    Ok(build(&Replay::run(trace)?)?.components)
}

/// Replays a completed trace and decides the logical outcome.
pub fn analyze(trace: &Trace) -> Result<Analysis, SimError> {
    let replay = Replay::run(trace)?;
    let comps = build(&replay)?;
    let fermion_events = collect_fermion_events(trace)?;
    let correction = match_fermion_events(&fermion_events, trace.header.l)?;

    let mut violations = check_inequalities(&comps.components);
    violations.optimality = comps.optimality;
    let mut sigma_winding: Vec<WindingParity> = comps.components.iter().map(|c| c.sigma_winding).collect();
    sigma_winding.extend(comps.error_loops.iter().copied());
    let sigma_failure = comps.unclosed > 0 || sigma_winding.iter().any(|w| !w.is_trivial());

    let psi_winding = if sigma_failure {
        None
    } else {
        let mut x = replay.psi.clone();
        x.xor_with(&correction.edges(&replay.torus));
        match replay.torus.winding_parity(&x) {
            Ok(w) => Some(w),
            Err(e) => {
                return Err(SimError::Invariant(format!(
                    "fermion history does not close: {e}; {} events, {} transfer fallbacks",
                    fermion_events.len(),
                    replay.transfer_fallbacks
                )))
            }
        }
    };
    let psi_failure = psi_winding.is_some_and(|w| !w.is_trivial());
    let verdict = Verdict {
        sigma_winding,
        psi_winding,
        sigma_failure,
        psi_failure,
        success: !sigma_failure && !psi_failure,
        diagnostics: LedgerDiagnostics {
            components: comps.components.len() as u64,
            violations,
            structure_errors: comps.structure_errors,
            unclosed_cycles: comps.unclosed,
            flag_mismatches: replay.flag_mismatches,
            transfer_fallbacks: replay.transfer_fallbacks,
            fermion_events: fermion_events.len() as u64,
        },
    };
    Ok(Analysis {
        verdict,
        components: comps.components,
        error_loops: comps.error_loops,
        fermion_events,
        correction,
        final_round: replay.final_round,
    })
}
