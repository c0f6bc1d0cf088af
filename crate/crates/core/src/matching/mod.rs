//! Exact minimum-weight perfect matching.
//!
//! Minimum-weight perfect matching is reduced to maximum-weight
//! maximum-cardinality matching with weights `C - d`. Small instances use the
//! complete graph. Larger ones start from a k-nearest-neighbour graph and are
//! certified against every pair through the dual solution; violated pairs are
//! added and the solve repeats until the certificate holds.
//!
//! Up to 96 nodes, the optimal matching with the lexicographically least
//! partner array (over nodes sorted by id) is returned. It is found greedily
//! on the graph of tight pairs, which contains every optimal matching. Larger
//! instances return the solver's own optimum, which is still a deterministic
//! function of the sorted input.

pub mod blossom;
mod brute;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

pub use brute::{brute_force_matching, brute_force_partners};

use crate::error::MatchingError;
use crate::lattice::{spacetime_l1, torus_distance, SpaceTimeCell};
use blossom::{max_weight_matching, BlossomSolution};

const DENSE_LIMIT: usize = 96;
const INITIAL_NEIGHBOURS: usize = 12;

pub trait Metric {
    fn distance(&self, a: SpaceTimeCell, b: SpaceTimeCell) -> u64;
}

impl<F: Fn(SpaceTimeCell, SpaceTimeCell) -> u64> Metric for F {
    fn distance(&self, a: SpaceTimeCell, b: SpaceTimeCell) -> u64 {
        self(a, b)
    }
}

/// Torus Manhattan distance between the spatial positions; time is ignored.
#[derive(Debug, Clone, Copy)]
pub struct Manhattan {
    pub l: u32,
}

impl Metric for Manhattan {
    fn distance(&self, a: SpaceTimeCell, b: SpaceTimeCell) -> u64 {
        torus_distance(a.pos, b.pos, self.l)
    }
}

/// Torus Manhattan distance plus the time separation.
#[derive(Debug, Clone, Copy)]
pub struct SpacetimeL1 {
    pub l: u32,
}

impl Metric for SpacetimeL1 {
    fn distance(&self, a: SpaceTimeCell, b: SpaceTimeCell) -> u64 {
        spacetime_l1(a, b, self.l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchNode {
    pub id: usize,
    pub location: SpaceTimeCell,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    /// Pairs of node ids, lower id first, sorted.
    pub pairs: Vec<(usize, usize)>,
    pub weight: u64,
}

fn prepare(nodes: &[MatchNode]) -> Result<Vec<MatchNode>, MatchingError> {
    if nodes.len() % 2 == 1 {
        return Err(MatchingError::OddNodeCount(nodes.len()));
    }
    let mut sorted = nodes.to_vec();
    sorted.sort_by_key(|n| n.id);
    if let Some(w) = sorted.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(MatchingError::DuplicateId(w[0].id));
    }
    Ok(sorted)
}

fn to_matching(sorted: &[MatchNode], partner: &[usize], metric: &impl Metric) -> Matching {
    let mut pairs = Vec::with_capacity(sorted.len() / 2);
    let mut weight = 0;
    for (i, &j) in partner.iter().enumerate() {
        if i < j {
            pairs.push((sorted[i].id, sorted[j].id));
            weight += metric.distance(sorted[i].location, sorted[j].location);
        }
    }
    Matching { pairs, weight }
}

pub fn mwpm(nodes: &[MatchNode], metric: &impl Metric) -> Result<Matching, MatchingError> {
    let sorted = prepare(nodes)?;
    let partner = min_weight_perfect_matching(sorted.len(), |i, j| {
        metric.distance(sorted[i].location, sorted[j].location) as i64
    });
    Ok(to_matching(&sorted, &partner, metric))
}

/// Minimum-weight perfect matching of the complete graph on `0..n` with
/// non-negative symmetric weights `dist`, returned as a partner array. Up to
/// the dense limit the lexicographically least optimal partner array is chosen.
pub fn min_weight_perfect_matching(n: usize, dist: impl Fn(usize, usize) -> i64) -> Vec<usize> {
    assert!(n % 2 == 0, "odd vertex count");
    if n == 0 {
        return Vec::new();
    }
    if n == 2 {
        return vec![1, 0];
    }
    let mut d = vec![0i64; n * n];
    let mut maxd = 0;
    for i in 0..n {
        for j in i + 1..n {
            let w = dist(i, j);
            assert!(w >= 0, "negative distance");
            d[i * n + j] = w;
            d[j * n + i] = w;
            maxd = maxd.max(w);
        }
    }
    let c = maxd + 1;
    let wt = |i: usize, j: usize| c - d[i * n + j];

    let sol = if n <= DENSE_LIMIT {
        let edges: Vec<(usize, usize, i64)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, wt(i, j)))
            .collect();
        max_weight_matching(n, &edges, true)
    } else {
        solve_sparse(n, &d, &wt)
    };
    let mut mate: Vec<usize> = sol.mate.iter().map(|m| m.expect("perfect matching")).collect();
    if n > DENSE_LIMIT {
        return mate;
    }
    let slacks = Slacks::new(&sol);
    let mut tight: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if slacks.slack(i, j, wt(i, j)) == 0 {
                tight[i].push(j);
                tight[j].push(i);
            }
        }
    }
    canonicalize(&mut mate, &tight, &|i, j| d[i * n + j]);
    mate
}

/// Solves on a sparse candidate graph and grows it until the dual certificate covers all pairs.
fn solve_sparse(n: usize, d: &[i64], wt: &impl Fn(usize, usize) -> i64) -> BlossomSolution {
    let mut k = INITIAL_NEIGHBOURS;
    let mut extra: Vec<(usize, usize)> = Vec::new();
    loop {
        let mut present = vec![false; n * n];
        for i in 0..n {
            let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            order.sort_by_key(|&j| (d[i * n + j], j));
            for &j in order.iter().take(k) {
                present[i.min(j) * n + i.max(j)] = true;
            }
        }
        for &(i, j) in &extra {
            present[i * n + j] = true;
        }
        let edges: Vec<(usize, usize, i64)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| present[i * n + j])
            .map(|(i, j)| (i, j, wt(i, j)))
            .collect();
        let sol = max_weight_matching(n, &edges, true);
        if !sol.is_perfect() {
            k *= 2;
            continue;
        }
        let slacks = Slacks::new(&sol);
        let violated: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !present[i * n + j] && slacks.slack(i, j, wt(i, j)) < 0)
            .collect();
        if violated.is_empty() {
            return sol;
        }
        extra.extend(violated);
    }
}

/// Slack evaluation for arbitrary pairs under a final dual solution.
struct Slacks {
    dual: Vec<i64>,
    /// Enclosing blossoms outermost first, with running sums of their duals.
    chains: Vec<Vec<(usize, i64)>>,
}

impl Slacks {
    fn new(sol: &BlossomSolution) -> Self {
        let chains = sol
            .ancestry()
            .into_iter()
            .map(|mut anc| {
                anc.reverse();
                let mut acc = 0;
                anc.into_iter()
                    .map(|(b, z)| {
                        acc += z;
                        (b, acc)
                    })
                    .collect()
            })
            .collect();
        Slacks {
            dual: (0..sol.nvertex).map(|v| sol.vertex_dual(v)).collect(),
            chains,
        }
    }

    fn slack(&self, i: usize, j: usize, w: i64) -> i64 {
        let (ci, cj) = (&self.chains[i], &self.chains[j]);
        let common = ci.iter().zip(cj).take_while(|(a, b)| a.0 == b.0).count();
        let z = if common == 0 { 0 } else { ci[common - 1].1 };
        self.dual[i] + self.dual[j] - 2 * w + 2 * z
    }
}

/// Moves `mate` to the lexicographically least optimal partner array.
fn canonicalize(mate: &mut [usize], tight: &[Vec<usize>], d: &impl Fn(usize, usize) -> i64) {
    let n = mate.len();
    let mut fixed = vec![false; n];
    for i in 0..n {
        if fixed[i] {
            continue;
        }
        let candidates: Vec<usize> = tight[i].iter().copied().filter(|&j| j < mate[i] && !fixed[j]).collect();
        if !candidates.is_empty() {
            let comp = component(i, tight, &fixed);
            let base: i64 = comp.iter().filter(|&&v| v < mate[v]).map(|&v| d(v, mate[v])).sum();
            for j in candidates {
                if let Some(sub) = solve_without(&comp, i, j, tight, d) {
                    let w: i64 = sub.iter().map(|&(a, b)| d(a, b)).sum();
                    if w + d(i, j) == base {
                        mate[i] = j;
                        mate[j] = i;
                        for (a, b) in sub {
                            mate[a] = b;
                            mate[b] = a;
                        }
                        break;
                    }
                }
            }
        }
        fixed[i] = true;
        fixed[mate[i]] = true;
    }
}

fn component(start: usize, tight: &[Vec<usize>], fixed: &[bool]) -> Vec<usize> {
    let mut seen = vec![false; tight.len()];
    seen[start] = true;
    let mut out = vec![start];
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &tight[v] {
            if !fixed[w] && !seen[w] {
                seen[w] = true;
                out.push(w);
                queue.push_back(w);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Minimum-weight perfect matching of `comp \ {i, j}` over tight pairs, if one exists.
fn solve_without(
    comp: &[usize],
    i: usize,
    j: usize,
    tight: &[Vec<usize>],
    d: &impl Fn(usize, usize) -> i64,
) -> Option<Vec<(usize, usize)>> {
    let rest: Vec<usize> = comp.iter().copied().filter(|&v| v != i && v != j).collect();
    if rest.is_empty() {
        return Some(Vec::new());
    }
    let index = |v: usize| rest.binary_search(&v).ok();
    let mut edges = Vec::new();
    let mut maxd = 0;
    for (a, &v) in rest.iter().enumerate() {
        for &w in &tight[v] {
            if let Some(b) = index(w) {
                if a < b {
                    edges.push((a, b, d(v, w)));
                    maxd = maxd.max(d(v, w));
                }
            }
        }
    }
    for e in &mut edges {
        e.2 = maxd + 1 - e.2;
    }
    let sol = max_weight_matching(rest.len(), &edges, true);
    if !sol.is_perfect() {
        return None;
    }
    Some(
        sol.mate
            .iter()
            .enumerate()
            .filter_map(|(a, m)| {
                let b = m.expect("perfect");
                (a < b).then(|| (rest[a], rest[b]))
            })
            .collect(),
    )
}
