//! Geometry of the periodic L×L lattice and its 2+1D space-time extension.
//!
//! Cells of the square lattice are [`TorusCoord`]s. Space-time cells carry an
//! additional time-slab index `t`: slab `t` sits between charge measurements
//! `t - 1` and `t`. Error events and intentional moves in slab `t` are
//! horizontal dual edges joining `(c1, t)` and `(c2, t)`; a charge measurement
//! at round `t` that detects an anyon at `c` is the vertical dual edge joining
//! `(c, t)` and `(c, t + 1)`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// A cell of the L×L torus. Coordinates are always reduced modulo L.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusCoord {
    pub x: u32,
    pub y: u32,
}

impl TorusCoord {
    pub const fn new(x: u32, y: u32) -> Self {
        TorusCoord { x, y }
    }
}

impl Ord for TorusCoord {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for TorusCoord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for TorusCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// A cell of the 2+1D cubic lattice. Ordered lexicographically by `(t, y, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceTimeCell {
    pub pos: TorusCoord,
    pub t: u32,
}

impl SpaceTimeCell {
    pub const fn new(x: u32, y: u32, t: u32) -> Self {
        SpaceTimeCell {
            pos: TorusCoord { x, y },
            t,
        }
    }

    pub const fn at(pos: TorusCoord, t: u32) -> Self {
        SpaceTimeCell { pos, t }
    }
}

impl Ord for SpaceTimeCell {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.t, self.pos.y, self.pos.x).cmp(&(other.t, other.pos.y, other.pos.x))
    }
}

impl PartialOrd for SpaceTimeCell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SpaceTimeCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.pos.x, self.pos.y, self.t)
    }
}

/// Lattice direction. North is `+y`, East is `+x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dir {
    North,
    East,
    South,
    West,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::North, Dir::East, Dir::South, Dir::West];

    pub fn opposite(self) -> Dir {
        match self {
            Dir::North => Dir::South,
            Dir::East => Dir::West,
            Dir::South => Dir::North,
            Dir::West => Dir::East,
        }
    }

    pub fn delta(self) -> (i64, i64) {
        match self {
            Dir::North => (0, 1),
            Dir::East => (1, 0),
            Dir::South => (0, -1),
            Dir::West => (-1, 0),
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Dir::East | Dir::West)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// An edge of the square lattice joining `cell` and `cell + unit(axis)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpatialEdge {
    pub cell: TorusCoord,
    pub axis: Axis,
}

impl Ord for SpatialEdge {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.cell, self.axis).cmp(&(other.cell, other.axis))
    }
}

impl PartialOrd for SpatialEdge {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// An edge of the dual of the 2+1D cubic lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DualEdge {
    /// An event in slab `t` affecting two adjacent cells.
    Horizontal { edge: SpatialEdge, t: u32 },
    /// A charge measurement at round `t`, joining slabs `t` and `t + 1`.
    Vertical { pos: TorusCoord, t: u32 },
}

/// Net unreduced displacement of a chain on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct DisplacementClass {
    pub dx: i64,
    pub dy: i64,
}

impl DisplacementClass {
    pub const ZERO: DisplacementClass = DisplacementClass { dx: 0, dy: 0 };

    pub const fn new(dx: i64, dy: i64) -> Self {
        DisplacementClass { dx, dy }
    }

    pub fn length(self) -> u64 {
        self.dx.unsigned_abs() + self.dy.unsigned_abs()
    }

    pub fn neg(self) -> Self {
        DisplacementClass::new(-self.dx, -self.dy)
    }

    pub fn add(self, other: Self) -> Self {
        DisplacementClass::new(self.dx + other.dx, self.dy + other.dy)
    }

    pub fn sub(self, other: Self) -> Self {
        DisplacementClass::new(self.dx - other.dx, self.dy - other.dy)
    }
}

/// Mod-2 crossing counts of a closed cycle with the cuts `x = L - 1/2` and `y = L - 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct WindingParity {
    pub wx: bool,
    pub wy: bool,
}

impl WindingParity {
    pub fn is_trivial(self) -> bool {
        !self.wx && !self.wy
    }

    pub fn xor(self, other: Self) -> Self {
        WindingParity {
            wx: self.wx ^ other.wx,
            wy: self.wy ^ other.wy,
        }
    }
}

fn wrap(v: i64, l: u32) -> u32 {
    v.rem_euclid(l as i64) as u32
}

/// Representative of `v mod l` in `(-l/2, l/2]`.
fn reduce_signed(v: i64, l: u32) -> i64 {
    let l = l as i64;
    let mut r = v.rem_euclid(l);
    if r > l / 2 {
        r -= l;
    }
    r
}

/// Minimum over periodic images of `|dx| + |dy|`.
pub fn torus_distance(a: TorusCoord, b: TorusCoord, l: u32) -> u64 {
    Torus::new_unchecked(l).distance(a, b)
}

/// Spatial torus distance plus the (non-periodic) time separation.
pub fn spacetime_l1(a: SpaceTimeCell, b: SpaceTimeCell, l: u32) -> u64 {
    torus_distance(a.pos, b.pos, l) + (a.t as i64 - b.t as i64).unsigned_abs()
}

/// Cell path from `a` to `b` realising the displacement `class`, x-moves first.
pub fn shortest_path_in_class(
    a: TorusCoord,
    b: TorusCoord,
    class: DisplacementClass,
    l: u32,
) -> Result<Vec<TorusCoord>, GeometryError> {
    Torus::new(l)?.path_in_class(a, b, class)
}

/// Winding parity of a closed set of spatial edges (mod-2 multiset).
pub fn winding_parity(cycle: &[SpatialEdge], l: u32) -> Result<WindingParity, GeometryError> {
    let torus = Torus::new(l)?;
    let mut set = EdgeSet::new(l);
    for e in cycle {
        set.toggle(torus.edge_index(*e));
    }
    torus.winding_parity(&set)
}

/// Geometry helper bound to a lattice size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Torus {
    l: u32,
}

impl Torus {
    pub fn new(l: u32) -> Result<Self, GeometryError> {
        if l < 2 {
            return Err(GeometryError::LatticeTooSmall(l));
        }
        Ok(Torus { l })
    }

    const fn new_unchecked(l: u32) -> Self {
        Torus { l }
    }

    pub fn size(&self) -> u32 {
        self.l
    }

    pub fn num_cells(&self) -> usize {
        (self.l * self.l) as usize
    }

    pub fn num_edges(&self) -> usize {
        2 * self.num_cells()
    }

    pub fn coord(&self, x: i64, y: i64) -> TorusCoord {
        TorusCoord::new(wrap(x, self.l), wrap(y, self.l))
    }

    pub fn cell_index(&self, c: TorusCoord) -> usize {
        (c.y * self.l + c.x) as usize
    }

    pub fn cell_at(&self, index: usize) -> TorusCoord {
        let l = self.l as usize;
        TorusCoord::new((index % l) as u32, (index / l) as u32)
    }

    pub fn cells(&self) -> impl Iterator<Item = TorusCoord> + '_ {
        (0..self.num_cells()).map(|i| self.cell_at(i))
    }

    pub fn step(&self, c: TorusCoord, dir: Dir) -> TorusCoord {
        let (dx, dy) = dir.delta();
        self.coord(c.x as i64 + dx, c.y as i64 + dy)
    }

    /// Edge leaving `c` in direction `dir`.
    pub fn edge_toward(&self, c: TorusCoord, dir: Dir) -> SpatialEdge {
        match dir {
            Dir::East => SpatialEdge { cell: c, axis: Axis::X },
            Dir::North => SpatialEdge { cell: c, axis: Axis::Y },
            Dir::West => SpatialEdge {
                cell: self.step(c, Dir::West),
                axis: Axis::X,
            },
            Dir::South => SpatialEdge {
                cell: self.step(c, Dir::South),
                axis: Axis::Y,
            },
        }
    }

    pub fn edge_endpoints(&self, e: SpatialEdge) -> (TorusCoord, TorusCoord) {
        let other = match e.axis {
            Axis::X => self.step(e.cell, Dir::East),
            Axis::Y => self.step(e.cell, Dir::North),
        };
        (e.cell, other)
    }

    /// Direction from `a` to an adjacent cell `b`, if they are adjacent.
    ///
    /// On `L = 2` two directions reach the same neighbour; the first in
    /// [`Dir::ALL`] order wins.
    pub fn direction_to(&self, a: TorusCoord, b: TorusCoord) -> Option<Dir> {
        Dir::ALL.into_iter().find(|&d| self.step(a, d) == b)
    }

    pub fn edge_between(&self, a: TorusCoord, b: TorusCoord) -> Option<SpatialEdge> {
        self.direction_to(a, b).map(|d| self.edge_toward(a, d))
    }

    pub fn edge_index(&self, e: SpatialEdge) -> usize {
        2 * self.cell_index(e.cell)
            + match e.axis {
                Axis::X => 0,
                Axis::Y => 1,
            }
    }

    pub fn edge_at(&self, index: usize) -> SpatialEdge {
        SpatialEdge {
            cell: self.cell_at(index / 2),
            axis: if index % 2 == 0 { Axis::X } else { Axis::Y },
        }
    }

    /// Edges in canonical (index) order.
    pub fn edges(&self) -> impl Iterator<Item = SpatialEdge> + '_ {
        (0..self.num_edges()).map(|i| self.edge_at(i))
    }

    pub fn distance(&self, a: TorusCoord, b: TorusCoord) -> u64 {
        self.reduced_class(a, b).length()
    }

    /// Minimal displacement from `a` to `b`; components lie in `(-L/2, L/2]`.
    pub fn reduced_class(&self, a: TorusCoord, b: TorusCoord) -> DisplacementClass {
        DisplacementClass::new(
            reduce_signed(b.x as i64 - a.x as i64, self.l),
            reduce_signed(b.y as i64 - a.y as i64, self.l),
        )
    }

    pub fn class_is_congruent(&self, a: TorusCoord, b: TorusCoord, class: DisplacementClass) -> bool {
        self.coord(a.x as i64 + class.dx, a.y as i64 + class.dy) == b
    }

    pub fn path_in_class(
        &self,
        a: TorusCoord,
        b: TorusCoord,
        class: DisplacementClass,
    ) -> Result<Vec<TorusCoord>, GeometryError> {
        if !self.class_is_congruent(a, b, class) {
            return Err(GeometryError::IncongruentClass {
                from: a,
                to: b,
                dx: class.dx,
                dy: class.dy,
            });
        }
        let mut path = Vec::with_capacity(class.length() as usize + 1);
        let mut cur = a;
        path.push(cur);
        let xdir = if class.dx >= 0 { Dir::East } else { Dir::West };
        for _ in 0..class.dx.unsigned_abs() {
            cur = self.step(cur, xdir);
            path.push(cur);
        }
        let ydir = if class.dy >= 0 { Dir::North } else { Dir::South };
        for _ in 0..class.dy.unsigned_abs() {
            cur = self.step(cur, ydir);
            path.push(cur);
        }
        debug_assert_eq!(cur, b);
        Ok(path)
    }

    /// Edges traversed by a cell path.
    pub fn path_edges(&self, path: &[TorusCoord]) -> Vec<SpatialEdge> {
        path.windows(2)
            .map(|w| {
                self.edge_between(w[0], w[1])
                    .expect("consecutive path cells are adjacent")
            })
            .collect()
    }

    /// First step of the class path from `a` toward its end.
    pub fn first_step(&self, class: DisplacementClass) -> Option<Dir> {
        if class.dx != 0 {
            Some(if class.dx > 0 { Dir::East } else { Dir::West })
        } else if class.dy != 0 {
            Some(if class.dy > 0 { Dir::North } else { Dir::South })
        } else {
            None
        }
    }

    /// Step taken by the far end of the class path when walking it backwards.
    pub fn last_step_reversed(&self, class: DisplacementClass) -> Option<Dir> {
        if class.dy != 0 {
            Some(if class.dy > 0 { Dir::South } else { Dir::North })
        } else if class.dx != 0 {
            Some(if class.dx > 0 { Dir::West } else { Dir::East })
        } else {
            None
        }
    }

    pub fn winding_parity(&self, set: &EdgeSet) -> Result<WindingParity, GeometryError> {
        if let Some(c) = set.odd_cells(self).first() {
            return Err(GeometryError::NotClosed(*c));
        }
        let last = self.l - 1;
        let mut w = WindingParity::default();
        for e in set.iter().map(|i| self.edge_at(i)) {
            match e.axis {
                Axis::X if e.cell.x == last => w.wx ^= true,
                Axis::Y if e.cell.y == last => w.wy ^= true,
                _ => {}
            }
        }
        Ok(w)
    }

    pub fn dual_endpoints(&self, e: DualEdge) -> (SpaceTimeCell, SpaceTimeCell) {
        match e {
            DualEdge::Horizontal { edge, t } => {
                let (a, b) = self.edge_endpoints(edge);
                (SpaceTimeCell::at(a, t), SpaceTimeCell::at(b, t))
            }
            DualEdge::Vertical { pos, t } => (SpaceTimeCell::at(pos, t), SpaceTimeCell::at(pos, t + 1)),
        }
    }
}

/// A mod-2 set of spatial edges backed by a bitset over the `2 L²` edges.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EdgeSet {
    words: Vec<u64>,
}

impl fmt::Debug for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl EdgeSet {
    pub fn new(l: u32) -> Self {
        let n = 2 * (l as usize) * (l as usize);
        EdgeSet {
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn toggle(&mut self, index: usize) {
        self.words[index / 64] ^= 1 << (index % 64);
    }

    pub fn contains(&self, index: usize) -> bool {
        self.words[index / 64] >> (index % 64) & 1 == 1
    }

    pub fn xor_with(&mut self, other: &EdgeSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn toggle_path(&mut self, torus: &Torus, path: &[TorusCoord]) {
        for e in torus.path_edges(path) {
            self.toggle(torus.edge_index(e));
        }
    }

    /// Directions out of `c` along edges in the set.
    pub fn incident_dirs(&self, torus: &Torus, c: TorusCoord) -> Vec<Dir> {
        Dir::ALL
            .into_iter()
            .filter(|&d| self.contains(torus.edge_index(torus.edge_toward(c, d))))
            .collect()
    }

    pub fn degree(&self, torus: &Torus, c: TorusCoord) -> usize {
        self.incident_dirs(torus, c).len()
    }

    /// Cells with odd degree, in canonical order.
    pub fn odd_cells(&self, torus: &Torus) -> Vec<TorusCoord> {
        let mut parity = vec![false; torus.num_cells()];
        for i in self.iter() {
            let (a, b) = torus.edge_endpoints(torus.edge_at(i));
            parity[torus.cell_index(a)] ^= true;
            parity[torus.cell_index(b)] ^= true;
        }
        parity
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(|(i, _)| torus.cell_at(i))
            .collect()
    }

    /// Shortest path from `from` to the nearest of `targets` using only edges in
    /// the set. Neighbours are explored in [`Dir::ALL`] order.
    pub fn path_within(&self, torus: &Torus, from: TorusCoord, targets: &[TorusCoord]) -> Option<Vec<TorusCoord>> {
        let mut prev: Vec<Option<TorusCoord>> = vec![None; torus.num_cells()];
        let mut seen = vec![false; torus.num_cells()];
        seen[torus.cell_index(from)] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(c) = queue.pop_front() {
            if targets.contains(&c) {
                let mut path = vec![c];
                let mut cur = c;
                while let Some(p) = prev[torus.cell_index(cur)] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for d in Dir::ALL {
                if !self.contains(torus.edge_index(torus.edge_toward(c, d))) {
                    continue;
                }
                let n = torus.step(c, d);
                if !seen[torus.cell_index(n)] {
                    seen[torus.cell_index(n)] = true;
                    prev[torus.cell_index(n)] = Some(c);
                    queue.push_back(n);
                }
            }
        }
        None
    }
}

/// Strings and loops of a decomposed dual edge set.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Decomposition {
    /// Each string lists its edges in order from its lexicographically lesser endpoint.
    pub strings: Vec<DecomposedString>,
    pub loops: Vec<Vec<DualEdge>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecomposedString {
    pub ends: (SpaceTimeCell, SpaceTimeCell),
    pub edges: Vec<DualEdge>,
}

/// Splits a mod-2 set of dual edges into strings pairing `boundary` and loops.
///
/// Boundary cells are taken in `(t, y, x)` order; each is joined to the nearest
/// remaining odd cell of its component by a breadth-first path, ties going to
/// the lexicographically least target. The path is peeled off and the process
/// repeats. Whatever remains is even everywhere and is cut into simple cycles.
pub fn decompose_edge_set(
    edges: &[DualEdge],
    boundary: &[SpaceTimeCell],
    l: u32,
) -> Result<Decomposition, GeometryError> {
    let torus = Torus::new(l)?;
    let mut present: BTreeSet<DualEdge> = BTreeSet::new();
    for e in edges {
        if !present.remove(e) {
            present.insert(*e);
        }
    }
    let mut adj: BTreeMap<SpaceTimeCell, BTreeMap<SpaceTimeCell, Vec<DualEdge>>> = BTreeMap::new();
    for e in &present {
        let (a, b) = torus.dual_endpoints(*e);
        if a == b {
            return Err(GeometryError::DegenerateEdge);
        }
        adj.entry(a).or_default().entry(b).or_default().push(*e);
        adj.entry(b).or_default().entry(a).or_default().push(*e);
    }

    let degree = |adj: &BTreeMap<SpaceTimeCell, BTreeMap<SpaceTimeCell, Vec<DualEdge>>>, v: &SpaceTimeCell| {
        adj.get(v).map_or(0, |m| m.values().map(Vec::len).sum::<usize>())
    };
    let odd: BTreeSet<SpaceTimeCell> = adj.keys().filter(|v| degree(&adj, v) % 2 == 1).copied().collect();
    let given: BTreeSet<SpaceTimeCell> = boundary.iter().copied().collect();
    if odd != given || given.len() != boundary.len() {
        return Err(GeometryError::InconsistentBoundary {
            expected: odd.len(),
            given: boundary.len(),
        });
    }

    let remove_edge = |adj: &mut BTreeMap<SpaceTimeCell, BTreeMap<SpaceTimeCell, Vec<DualEdge>>>,
                       a: SpaceTimeCell,
                       b: SpaceTimeCell|
     -> DualEdge {
        let e = {
            let list = adj.get_mut(&a).and_then(|m| m.get_mut(&b)).expect("edge present");
            list.remove(0)
        };
        for (x, y) in [(a, b), (b, a)] {
            let m = adj.get_mut(&x).expect("vertex present");
            if let Some(list) = m.get_mut(&y) {
                if x == b {
                    if let Some(pos) = list.iter().position(|f| *f == e) {
                        list.remove(pos);
                    }
                }
                if list.is_empty() {
                    m.remove(&y);
                }
            }
            if m.is_empty() {
                adj.remove(&x);
            }
        }
        e
    };

    let mut out = Decomposition::default();
    let mut remaining_odd = odd;
    while let Some(&start) = remaining_odd.iter().next() {
        // Layered BFS so that the least target at minimal distance wins.
        let mut prev: BTreeMap<SpaceTimeCell, SpaceTimeCell> = BTreeMap::new();
        let mut seen: BTreeSet<SpaceTimeCell> = BTreeSet::from([start]);
        let mut layer = vec![start];
        let mut target = None;
        while target.is_none() && !layer.is_empty() {
            let mut next = Vec::new();
            for v in &layer {
                if let Some(nbrs) = adj.get(v) {
                    for n in nbrs.keys() {
                        if seen.insert(*n) {
                            prev.insert(*n, *v);
                            next.push(*n);
                        }
                    }
                }
            }
            target = next.iter().filter(|n| remaining_odd.contains(n)).min().copied();
            layer = next;
        }
        let end = target.ok_or(GeometryError::InconsistentBoundary {
            expected: remaining_odd.len(),
            given: boundary.len(),
        })?;
        let mut cells = vec![end];
        let mut cur = end;
        while let Some(p) = prev.get(&cur) {
            cells.push(*p);
            cur = *p;
        }
        cells.reverse();
        let string_edges = cells.windows(2).map(|w| remove_edge(&mut adj, w[0], w[1])).collect();
        remaining_odd.remove(&start);
        remaining_odd.remove(&end);
        out.strings.push(DecomposedString {
            ends: (start, end),
            edges: string_edges,
        });
    }

    // Remaining edges are even at every vertex; cut them into simple cycles.
    while let Some((&start, _)) = adj.iter().next() {
        let mut walk = vec![start];
        let mut walk_edges: Vec<DualEdge> = Vec::new();
        let mut cur = start;
        loop {
            let next = *adj
                .get(&cur)
                .and_then(|m| m.keys().next())
                .expect("even-degree remainder always continues");
            let e = remove_edge(&mut adj, cur, next);
            walk_edges.push(e);
            if let Some(pos) = walk.iter().position(|v| *v == next) {
                let cycle: Vec<DualEdge> = walk_edges.drain(pos..).collect();
                walk.truncate(pos + 1);
                out.loops.push(cycle);
                if walk_edges.is_empty() {
                    break;
                }
                cur = next;
            } else {
                walk.push(next);
                cur = next;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: u32, y: u32) -> TorusCoord {
        TorusCoord::new(x, y)
    }

    #[test]
    fn distance_examples() {
        assert_eq!(torus_distance(c(0, 0), c(7, 0), 8), 1);
        assert_eq!(torus_distance(c(1, 2), c(3, 7), 8), 5);
        assert_eq!(torus_distance(c(0, 0), c(4, 4), 8), 8);
    }

    #[test]
    fn spacetime_examples() {
        assert_eq!(spacetime_l1(SpaceTimeCell::new(0, 0, 0), SpaceTimeCell::new(7, 0, 5), 8), 6);
        assert_eq!(spacetime_l1(SpaceTimeCell::new(2, 3, 1), SpaceTimeCell::new(2, 3, 9), 8), 8);
        assert_eq!(spacetime_l1(SpaceTimeCell::new(0, 0, 2), SpaceTimeCell::new(4, 7, 2), 8), 5);
    }

    #[test]
    fn class_paths() {
        let p = shortest_path_in_class(c(0, 0), c(2, 0), DisplacementClass::new(2, 0), 8).unwrap();
        assert_eq!(p, vec![c(0, 0), c(1, 0), c(2, 0)]);
        let p = shortest_path_in_class(c(0, 0), c(2, 0), DisplacementClass::new(-6, 0), 8).unwrap();
        assert_eq!(p.len(), 7);
        assert_eq!(p[1], c(7, 0));
        let p = shortest_path_in_class(c(0, 0), c(0, 0), DisplacementClass::new(8, 0), 8).unwrap();
        assert_eq!(p.len(), 9);
        let torus = Torus::new(8).unwrap();
        let mut set = EdgeSet::new(8);
        set.toggle_path(&torus, &p);
        assert_eq!(torus.winding_parity(&set).unwrap(), WindingParity { wx: true, wy: false });
    }

    #[test]
    fn class_path_rejects_incongruent() {
        let err = shortest_path_in_class(c(0, 0), c(2, 0), DisplacementClass::new(3, 0), 8).unwrap_err();
        assert!(matches!(err, GeometryError::IncongruentClass { .. }));
    }

    #[test]
    fn windings() {
        let row: Vec<SpatialEdge> = (0..8).map(|i| SpatialEdge { cell: c(i, 0), axis: Axis::X }).collect();
        assert_eq!(winding_parity(&row, 8).unwrap(), WindingParity { wx: true, wy: false });
        let square = vec![
            SpatialEdge { cell: c(2, 2), axis: Axis::X },
            SpatialEdge { cell: c(2, 2), axis: Axis::Y },
            SpatialEdge { cell: c(3, 2), axis: Axis::Y },
            SpatialEdge { cell: c(2, 3), axis: Axis::X },
        ];
        assert!(winding_parity(&square, 8).unwrap().is_trivial());
        let mut both = row.clone();
        both.extend((0..8).map(|j| SpatialEdge { cell: c(5, j), axis: Axis::Y }));
        assert_eq!(winding_parity(&both, 8).unwrap(), WindingParity { wx: true, wy: true });
        assert!(matches!(winding_parity(&row[..3], 8), Err(GeometryError::NotClosed(_))));
    }

    fn h(x: u32, y: u32, axis: Axis, t: u32) -> DualEdge {
        DualEdge::Horizontal {
            edge: SpatialEdge { cell: c(x, y), axis },
            t,
        }
    }

    #[test]
    fn decompose_single_edge() {
        let e = h(1, 1, Axis::X, 3);
        let d = decompose_edge_set(&[e], &[SpaceTimeCell::new(1, 1, 3), SpaceTimeCell::new(2, 1, 3)], 8).unwrap();
        assert_eq!(d.strings.len(), 1);
        assert_eq!(d.strings[0].edges, vec![e]);
        assert!(d.loops.is_empty());
    }

    #[test]
    fn decompose_square_is_one_loop() {
        let sq = [h(2, 2, Axis::X, 0), h(2, 2, Axis::Y, 0), h(3, 2, Axis::Y, 0), h(2, 3, Axis::X, 0)];
        let d = decompose_edge_set(&sq, &[], 8).unwrap();
        assert!(d.strings.is_empty());
        assert_eq!(d.loops.len(), 1);
        assert_eq!(d.loops[0].len(), 4);
    }

    #[test]
    fn decompose_rejects_wrong_boundary() {
        let e = h(1, 1, Axis::X, 0);
        assert!(decompose_edge_set(&[e], &[SpaceTimeCell::new(1, 1, 0)], 8).is_err());
    }

    #[test]
    fn decompose_figure_eight_into_simple_cycles() {
        // Two unit squares sharing the corner (3,3).
        let sq1 = [h(2, 2, Axis::X, 0), h(2, 2, Axis::Y, 0), h(3, 2, Axis::Y, 0), h(2, 3, Axis::X, 0)];
        let sq2 = [h(3, 3, Axis::X, 0), h(3, 3, Axis::Y, 0), h(4, 3, Axis::Y, 0), h(3, 4, Axis::X, 0)];
        let all: Vec<DualEdge> = sq1.iter().chain(sq2.iter()).copied().collect();
        let d = decompose_edge_set(&all, &[], 8).unwrap();
        assert_eq!(d.loops.len(), 2);
        assert!(d.loops.iter().all(|l| l.len() == 4));
    }
}
