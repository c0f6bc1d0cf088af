use std::collections::BTreeMap;

use super::{Channel, ChannelAlgebra, ModeId, OutcomeProbability};
use crate::error::FusionError;
use crate::lattice::{Dir, EdgeSet, Torus, TorusCoord};

/// A move of one mode straight through a cell where another pair's string runs across.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crossing {
    pub cell: TorusCoord,
    /// Members of the crossed pair, lower id first.
    pub pair: (ModeId, ModeId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveRecord {
    pub mode: ModeId,
    pub from: TorusCoord,
    pub to: TorusCoord,
    pub crossings: Vec<Crossing>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FusionRecord {
    pub cell: TorusCoord,
    pub a: ModeId,
    pub b: ModeId,
    pub outcome: Channel,
    pub probability: OutcomeProbability,
    pub repaired: Option<(ModeId, ModeId)>,
}

/// Channel algebra decorated with mode positions and pair strings.
#[derive(Debug, Clone)]
pub struct PairingState {
    torus: Torus,
    alg: ChannelAlgebra,
    pos: Vec<Option<TorusCoord>>,
    /// Side of the current cell through which the mode entered it.
    entry: Vec<Option<Dir>>,
    /// Pair strings keyed by the lower member id.
    strings: BTreeMap<ModeId, EdgeSet>,
}

impl PairingState {
    pub fn new(torus: Torus) -> Self {
        PairingState {
            torus,
            alg: ChannelAlgebra::new(),
            pos: Vec::new(),
            entry: Vec::new(),
            strings: BTreeMap::new(),
        }
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn algebra(&self) -> &ChannelAlgebra {
        &self.alg
    }

    pub fn is_alive(&self, m: ModeId) -> bool {
        self.alg.is_alive(m)
    }

    pub fn alive_count(&self) -> usize {
        self.alg.alive_count()
    }

    pub fn psi_pairs(&self) -> usize {
        self.alg.psi_pairs()
    }

    pub fn next_id(&self) -> ModeId {
        self.alg.next_id()
    }

    pub fn position(&self, m: ModeId) -> Result<TorusCoord, FusionError> {
        self.alg.partner(m)?;
        Ok(self.pos[m as usize].expect("alive modes have a position"))
    }

    pub fn entry_side(&self, m: ModeId) -> Option<Dir> {
        self.entry.get(m as usize).copied().flatten()
    }

    pub fn partner(&self, m: ModeId) -> Result<ModeId, FusionError> {
        self.alg.partner(m)
    }

    pub fn channel(&self, m: ModeId) -> Result<Channel, FusionError> {
        self.alg.channel(m)
    }

    fn key(&self, m: ModeId) -> Result<ModeId, FusionError> {
        Ok(m.min(self.alg.partner(m)?))
    }

    pub fn string(&self, m: ModeId) -> Result<&EdgeSet, FusionError> {
        let k = self.key(m)?;
        Ok(&self.strings[&k])
    }

    /// Alive pairs with their strings, keyed by lower member id.
    pub fn strings(&self) -> impl Iterator<Item = (ModeId, &EdgeSet)> {
        self.strings.iter().map(|(k, s)| (*k, s))
    }

    pub fn create_sigma_pair(&mut self, c1: TorusCoord, c2: TorusCoord) -> Result<(ModeId, ModeId), FusionError> {
        let edge = self
            .torus
            .edge_between(c1, c2)
            .filter(|_| c1 != c2)
            .ok_or(FusionError::NotAdjacent(c1, c2))?;
        let (a, b) = self.alg.create_pair();
        self.pos.extend([Some(c1), Some(c2)]);
        self.entry.extend([None, None]);
        let mut s = EdgeSet::new(self.torus.size());
        s.toggle(self.torus.edge_index(edge));
        self.strings.insert(a, s);
        Ok((a, b))
    }

    pub fn absorb_psi(&mut self, m: ModeId) -> Result<(), FusionError> {
        self.alg.absorb(m)
    }

    /// Flips the channels of `m`'s pair and of the pair containing `x`.
    pub fn apply_monodromy(&mut self, m: ModeId, x: ModeId) -> Result<(), FusionError> {
        if self.alg.partner(m)? == x {
            return Err(FusionError::OwnPair { mode: m, other: x });
        }
        self.alg.monodromy(m, x)
    }

    /// Pairs whose strings cross a straight pass of `m` through its current cell toward `dir`.
    pub fn crossings(&self, m: ModeId, dir: Dir) -> Result<Vec<Crossing>, FusionError> {
        let c = self.position(m)?;
        let own = self.key(m)?;
        if self.entry_side(m) != Some(dir.opposite()) {
            return Ok(Vec::new());
        }
        // Under the N–S / E–W resolution the pass interleaves with a strand iff
        // both perpendicular sides of the cell carry the string.
        let perpendicular = if dir.is_horizontal() {
            [Dir::North, Dir::South]
        } else {
            [Dir::East, Dir::West]
        };
        let mut out = Vec::new();
        for (&k, s) in &self.strings {
            if k == own {
                continue;
            }
            let hit = perpendicular
                .iter()
                .all(|&d| s.contains(self.torus.edge_index(self.torus.edge_toward(c, d))));
            if hit {
                let p = self.alg.partner(k)?;
                out.push(Crossing { cell: c, pair: (k, p) });
            }
        }
        Ok(out)
    }

    /// Moves `m` one cell, applying a monodromy for every crossed string and dragging its own string.
    pub fn move_mode(&mut self, m: ModeId, dir: Dir) -> Result<MoveRecord, FusionError> {
        let from = self.position(m)?;
        let crossings = self.crossings(m, dir)?;
        for x in &crossings {
            self.alg.monodromy(m, x.pair.0)?;
        }
        let to = self.torus.step(from, dir);
        let edge = self.torus.edge_index(self.torus.edge_toward(from, dir));
        let k = self.key(m)?;
        self.strings.get_mut(&k).expect("alive pair has a string").toggle(edge);
        self.pos[m as usize] = Some(to);
        self.entry[m as usize] = Some(dir.opposite());
        Ok(MoveRecord {
            mode: m,
            from,
            to,
            crossings,
        })
    }

    /// Fuses two co-located modes. `decide` picks the outcome when it is random.
    pub fn measure_pair(
        &mut self,
        a: ModeId,
        b: ModeId,
        decide: &mut dyn FnMut() -> Channel,
    ) -> Result<FusionRecord, FusionError> {
        let ca = self.position(a)?;
        let cb = self.position(b)?;
        if a == b {
            return Err(FusionError::SameMode(a));
        }
        if ca != cb {
            return Err(FusionError::NotColocated(a, b));
        }
        let ka = self.key(a)?;
        let kb = self.key(b)?;
        let r = self.alg.measure(a, b, decide)?;
        let sa = self.strings.remove(&ka).expect("string");
        if let Some((pa, pb)) = r.repaired {
            let mut merged = self.strings.remove(&kb).expect("string");
            merged.xor_with(&sa);
            self.strings.insert(pa.min(pb), merged);
        }
        for m in [a, b] {
            self.pos[m as usize] = None;
            self.entry[m as usize] = None;
        }
        Ok(FusionRecord {
            cell: ca,
            a,
            b,
            outcome: r.outcome,
            probability: r.probability,
            repaired: r.repaired,
        })
    }

    /// Checks that every pair string has odd degree exactly at its members' cells.
    pub fn strings_consistent(&self) -> bool {
        self.strings.iter().all(|(&k, s)| {
            let Ok(p) = self.alg.partner(k) else {
                return false;
            };
            let (ca, cb) = (self.pos[k as usize], self.pos[p as usize]);
            let mut expected: Vec<TorusCoord> = match (ca, cb) {
                (Some(x), Some(y)) if x == y => Vec::new(),
                (Some(x), Some(y)) => vec![x, y],
                _ => return false,
            };
            expected.sort();
            s.odd_cells(&self.torus) == expected
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: u32, y: u32) -> TorusCoord {
        TorusCoord::new(x, y)
    }

    fn never() -> impl FnMut() -> Channel {
        || panic!("outcome should be deterministic")
    }

    #[test]
    fn create_requires_adjacency() {
        let mut st = PairingState::new(Torus::new(8).unwrap());
        assert!(st.create_sigma_pair(c(0, 0), c(2, 0)).is_err());
        assert!(st.create_sigma_pair(c(0, 0), c(0, 0)).is_err());
        let (a, b) = st.create_sigma_pair(c(0, 0), c(7, 0)).unwrap();
        assert_eq!(st.string(a).unwrap().len(), 1);
        assert_eq!(st.partner(b).unwrap(), a);
        assert!(st.strings_consistent());
    }

    #[test]
    fn two_creations_are_vacuum() {
        let mut st = PairingState::new(Torus::new(8).unwrap());
        let (a, _) = st.create_sigma_pair(c(0, 0), c(1, 0)).unwrap();
        let (b, _) = st.create_sigma_pair(c(4, 4), c(4, 5)).unwrap();
        assert_eq!(st.channel(a).unwrap(), Channel::Vacuum);
        assert_eq!(st.channel(b).unwrap(), Channel::Vacuum);
    }

    #[test]
    fn absorb_then_fuse_gives_psi() {
        let mut st = PairingState::new(Torus::new(8).unwrap());
        let (a, b) = st.create_sigma_pair(c(0, 0), c(1, 0)).unwrap();
        st.absorb_psi(a).unwrap();
        st.move_mode(a, Dir::East).unwrap();
        let r = st.measure_pair(a, b, &mut never()).unwrap();
        assert_eq!(r.outcome, Channel::Psi);
        assert_eq!(r.probability, OutcomeProbability::One);
    }

    #[test]
    fn straight_pass_through_string_is_a_crossing() {
        let mut st = PairingState::new(Torus::new(8).unwrap());
        // Vertical string from (3,2) to (3,4) through (3,3).
        let (p, q) = st.create_sigma_pair(c(3, 2), c(3, 3)).unwrap();
        st.move_mode(q, Dir::North).unwrap();
        assert!(st.strings_consistent());
        let (m, _) = st.create_sigma_pair(c(1, 3), c(1, 2)).unwrap();
        let r = st.move_mode(m, Dir::East).unwrap();
        assert!(r.crossings.is_empty());
        st.move_mode(m, Dir::East).unwrap();
        let r = st.move_mode(m, Dir::East).unwrap();
        assert_eq!(r.crossings, vec![Crossing { cell: c(3, 3), pair: (p, q) }]);
        assert_eq!(st.channel(p).unwrap(), Channel::Psi);
        assert_eq!(st.channel(m).unwrap(), Channel::Psi);
        assert!(st.strings_consistent());
    }

    #[test]
    fn turning_inside_a_string_cell_is_not_a_crossing() {
        let mut st = PairingState::new(Torus::new(8).unwrap());
        let (_, q) = st.create_sigma_pair(c(3, 2), c(3, 3)).unwrap();
        st.move_mode(q, Dir::North).unwrap();
        let (m, _) = st.create_sigma_pair(c(2, 3), c(2, 2)).unwrap();
        st.move_mode(m, Dir::East).unwrap();
        let r = st.move_mode(m, Dir::North).unwrap();
        assert!(r.crossings.is_empty());
        assert_eq!(st.psi_pairs(), 0);
    }

    #[test]
    fn mismatched_fusion_merges_strings() {
        let mut st = PairingState::new(Torus::new(8).unwrap());
        let (m1, m2) = st.create_sigma_pair(c(0, 0), c(1, 0)).unwrap();
        let (m3, m4) = st.create_sigma_pair(c(2, 0), c(3, 0)).unwrap();
        st.move_mode(m3, Dir::West).unwrap();
        let r = st.measure_pair(m2, m3, &mut || Channel::Psi).unwrap();
        assert_eq!(r.repaired, Some((m1, m4)));
        assert_eq!(st.string(m1).unwrap().len(), 3);
        assert_eq!(st.channel(m4).unwrap(), Channel::Psi);
        assert!(st.strings_consistent());
        assert!(st.measure_pair(m1, m4, &mut never()).is_err());
    }

    #[test]
    fn monodromy_against_own_pair_is_rejected() {
        let mut st = PairingState::new(Torus::new(8).unwrap());
        let (a, b) = st.create_sigma_pair(c(0, 0), c(1, 0)).unwrap();
        assert_eq!(st.apply_monodromy(a, b), Err(FusionError::OwnPair { mode: a, other: b }));
    }
}
