//! Chains of alternating world-line and hypothesis strings joining current anyons.

use std::collections::BTreeMap;

use crate::fusion::ModeId;
use crate::lattice::{Dir, DisplacementClass, SpaceTimeCell, Torus};

/// How the world-line ends meeting at one cell within one slab are connected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LooseLink {
    /// A tracked mode died where a newborn survives: the world-line continues.
    Replace { died: ModeId, born: ModeId },
    /// Two tracked modes died at the cell without fusing with each other.
    MergeDeaths(ModeId, ModeId),
    /// Two newborns survive at the cell.
    PairBirths(ModeId, ModeId),
    /// A world-line ends at a syndrome.
    DanglingDeath(ModeId),
    /// A world-line starts at a syndrome.
    DanglingBirth(ModeId),
}

impl LooseLink {
    pub fn is_dangling(&self) -> bool {
        matches!(self, LooseLink::DanglingDeath(_) | LooseLink::DanglingBirth(_))
    }
}

/// Canonical connection of the loose world-line ends at a single cell.
///
/// Deaths are tracked modes (alive at the previous measurement) that died in
/// the slab other than by fusing with another tracked mode; births are modes
/// created in the slab that are still alive at the measurement. Both lists are
/// sorted, deaths are paired with births in order, and the excess is paired up
/// among itself with at most one end left dangling.
pub fn pair_loose_ends(deaths: &[ModeId], births: &[ModeId]) -> Vec<LooseLink> {
    let mut d = deaths.to_vec();
    let mut b = births.to_vec();
    d.sort_unstable();
    b.sort_unstable();
    let k = d.len().min(b.len());
    let mut out: Vec<LooseLink> = d[..k]
        .iter()
        .zip(&b[..k])
        .map(|(&died, &born)| LooseLink::Replace { died, born })
        .collect();
    let rest_d = &d[k..];
    let rest_b = &b[k..];
    for w in rest_d.chunks(2) {
        out.push(match *w {
            [x, y] => LooseLink::MergeDeaths(x, y),
            [x] => LooseLink::DanglingDeath(x),
            _ => unreachable!(),
        });
    }
    for w in rest_b.chunks(2) {
        out.push(match *w {
            [x, y] => LooseLink::PairBirths(x, y),
            [x] => LooseLink::DanglingBirth(x),
            _ => unreachable!(),
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum End {
    Mode(ModeId),
    Vertex(SpaceTimeCell),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Chain {
    pub ends: [End; 2],
    /// Unreduced displacement from `ends[0]` to `ends[1]`.
    pub d: DisplacementClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinOutcome {
    /// The two modes were the two ends of one chain.
    Closed,
    Merged,
}

#[derive(Debug, Clone, Default)]
pub struct ChainBook {
    chains: BTreeMap<u64, Chain>,
    index: BTreeMap<End, u64>,
    next: u64,
}

impl ChainBook {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    pub fn chains(&self) -> impl Iterator<Item = &Chain> {
        self.chains.values()
    }

    pub fn chain_of(&self, end: End) -> Option<&Chain> {
        self.index.get(&end).map(|id| &self.chains[id])
    }

    /// Total unreduced length over all chains.
    pub fn total_length(&self) -> u64 {
        self.chains.values().map(|c| c.d.length()).sum()
    }

    fn insert(&mut self, a: End, b: End, d: DisplacementClass) {
        let id = self.next;
        self.next += 1;
        self.chains.insert(id, Chain { ends: [a, b], d });
        self.index.insert(a, id);
        self.index.insert(b, id);
    }

    /// Removes the chain ending at `end`; returns its id, other end and the displacement from the other end to `end`.
    fn take(&mut self, end: End) -> Option<(u64, End, DisplacementClass)> {
        let id = *self.index.get(&end)?;
        let c = self.chains.remove(&id)?;
        for e in c.ends {
            self.index.remove(&e);
        }
        Some(if c.ends[1] == end {
            (id, c.ends[0], c.d)
        } else {
            (id, c.ends[1], c.d.neg())
        })
    }

    fn relabel(&mut self, from: End, to: End) -> bool {
        let Some(id) = self.index.remove(&from) else {
            return false;
        };
        let c = self.chains.get_mut(&id).expect("indexed chain");
        for e in &mut c.ends {
            if *e == from {
                *e = to;
            }
        }
        self.index.insert(to, id);
        true
    }

    pub fn on_move(&mut self, m: ModeId, dir: Dir) {
        let Some(&id) = self.index.get(&End::Mode(m)) else {
            return;
        };
        let (dx, dy) = dir.delta();
        let step = DisplacementClass::new(dx, dy);
        let c = self.chains.get_mut(&id).expect("indexed chain");
        if c.ends[0] == End::Mode(m) {
            c.d = c.d.sub(step);
        } else {
            c.d = c.d.add(step);
        }
    }

    /// Joins the chains through two tracked modes that fused with each other.
    pub fn join(&mut self, a: ModeId, b: ModeId) -> Option<JoinOutcome> {
        let (ida, oa, da) = self.take(End::Mode(a))?;
        if oa == End::Mode(b) {
            return Some(JoinOutcome::Closed);
        }
        let (idb, ob, db) = self.take(End::Mode(b))?;
        debug_assert_ne!(ida, idb);
        self.insert(oa, ob, da.sub(db));
        Some(JoinOutcome::Merged)
    }

    /// Applies the loose-end links of one cell at slab `t`.
    pub fn apply_links(&mut self, links: &[LooseLink], v: SpaceTimeCell) {
        for link in links {
            match *link {
                LooseLink::Replace { died, born } => {
                    self.relabel(End::Mode(died), End::Mode(born));
                }
                LooseLink::MergeDeaths(x, y) => {
                    self.join(x, y);
                }
                LooseLink::PairBirths(x, y) => self.insert(End::Mode(x), End::Mode(y), DisplacementClass::ZERO),
                LooseLink::DanglingDeath(m) => {
                    self.relabel(End::Mode(m), End::Vertex(v));
                }
                LooseLink::DanglingBirth(n) => self.insert(End::Mode(n), End::Vertex(v), DisplacementClass::ZERO),
            }
        }
    }

    /// Connects two syndromes by a hypothesis string of class `h` (from `v` to `w`).
    pub fn connect(&mut self, v: SpaceTimeCell, w: SpaceTimeCell, h: DisplacementClass) -> Option<JoinOutcome> {
        let (_, ov, dv) = self.take(End::Vertex(v))?;
        if ov == End::Vertex(w) {
            return Some(JoinOutcome::Closed);
        }
        let (_, ow, dw) = self.take(End::Vertex(w))?;
        self.insert(ov, ow, dv.add(h).sub(dw));
        Some(JoinOutcome::Merged)
    }

    /// Chains that still end at a syndrome vertex.
    pub fn dangling(&self) -> usize {
        self.index.keys().filter(|e| matches!(e, End::Vertex(_))).count()
    }

    /// One-step moves bringing each chain's two anyons together, sorted by mode id.
    pub fn plans(&self, torus: &Torus) -> Vec<(ModeId, Dir)> {
        let mut out = Vec::new();
        for c in self.chains.values() {
            let (End::Mode(x), End::Mode(y)) = (c.ends[0], c.ends[1]) else {
                continue;
            };
            let (lo, hi, d) = if x < y { (x, y, c.d) } else { (y, x, c.d.neg()) };
            match d.length() {
                0 => {}
                1 => out.push((lo, torus.first_step(d).expect("nonzero"))),
                _ => {
                    out.push((lo, torus.first_step(d).expect("nonzero")));
                    out.push((hi, torus.last_step_reversed(d).expect("nonzero")));
                }
            }
        }
        out.sort_by_key(|p| p.0);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: u32, y: u32, t: u32) -> SpaceTimeCell {
        SpaceTimeCell::new(x, y, t)
    }

    #[test]
    fn loose_end_pairing() {
        assert_eq!(pair_loose_ends(&[4], &[9]), vec![LooseLink::Replace { died: 4, born: 9 }]);
        assert_eq!(pair_loose_ends(&[4], &[]), vec![LooseLink::DanglingDeath(4)]);
        assert_eq!(pair_loose_ends(&[], &[9]), vec![LooseLink::DanglingBirth(9)]);
        assert_eq!(
            pair_loose_ends(&[7, 3, 5], &[]),
            vec![LooseLink::MergeDeaths(3, 5), LooseLink::DanglingDeath(7)]
        );
    }

    #[test]
    fn fresh_pair_is_planned_to_fuse() {
        let torus = Torus::new(8).unwrap();
        let mut book = ChainBook::new();
        book.apply_links(&[LooseLink::DanglingBirth(0)], v(1, 1, 1));
        book.apply_links(&[LooseLink::DanglingBirth(1)], v(2, 1, 1));
        assert_eq!(book.dangling(), 2);
        book.connect(v(1, 1, 1), v(2, 1, 1), DisplacementClass::new(1, 0));
        assert_eq!(book.dangling(), 0);
        assert_eq!(book.plans(&torus), vec![(0, Dir::East)]);
    }

    #[test]
    fn separated_pair_moves_both_and_wrapping_class_is_kept() {
        let torus = Torus::new(8).unwrap();
        let mut book = ChainBook::new();
        book.apply_links(&[LooseLink::DanglingBirth(3)], v(0, 0, 1));
        book.apply_links(&[LooseLink::DanglingBirth(2)], v(3, 0, 1));
        book.connect(v(0, 0, 1), v(3, 0, 1), DisplacementClass::new(3, 0));
        assert_eq!(book.plans(&torus), vec![(2, Dir::West), (3, Dir::East)]);

        let mut book = ChainBook::new();
        book.apply_links(&[LooseLink::DanglingBirth(0)], v(0, 0, 1));
        book.apply_links(&[LooseLink::DanglingBirth(1)], v(6, 0, 1));
        book.connect(v(0, 0, 1), v(6, 0, 1), DisplacementClass::new(6, 0));
        assert_eq!(book.plans(&torus), vec![(0, Dir::East), (1, Dir::West)]);
        book.on_move(0, Dir::East);
        book.on_move(1, Dir::West);
        assert_eq!(book.total_length(), 4);
    }

    #[test]
    fn joining_partners_closes_the_chain() {
        let mut book = ChainBook::new();
        book.apply_links(&[LooseLink::DanglingBirth(0)], v(0, 0, 1));
        book.apply_links(&[LooseLink::DanglingBirth(1)], v(1, 0, 1));
        book.connect(v(0, 0, 1), v(1, 0, 1), DisplacementClass::new(1, 0));
        assert_eq!(book.join(0, 1), Some(JoinOutcome::Closed));
        assert!(book.is_empty());
    }

    #[test]
    fn joining_different_chains_adds_displacements() {
        let mut book = ChainBook::new();
        book.insert(End::Mode(0), End::Mode(1), DisplacementClass::new(2, 0));
        book.insert(End::Mode(2), End::Mode(3), DisplacementClass::new(0, 3));
        // 1 and 2 meet: chain 0 -> 1 == 2 -> 3.
        assert_eq!(book.join(1, 2), Some(JoinOutcome::Merged));
        let c = book.chain_of(End::Mode(0)).unwrap();
        let d = if c.ends[0] == End::Mode(0) { c.d } else { c.d.neg() };
        assert_eq!(d, DisplacementClass::new(2, 3));
    }
}
