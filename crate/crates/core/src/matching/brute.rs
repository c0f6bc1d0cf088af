use super::{prepare, to_matching, MatchNode, Matching, Metric};
use crate::error::MatchingError;

pub const BRUTE_FORCE_CAP: usize = 12;

/// Exhaustive minimum over all pairings of `nodes`, with the same tie-break as [`super::mwpm`].
pub fn brute_force_matching(nodes: &[MatchNode], metric: &impl Metric) -> Result<Matching, MatchingError> {
    if nodes.len() > BRUTE_FORCE_CAP {
        return Err(MatchingError::TooManyNodes(nodes.len()));
    }
    let sorted = prepare(nodes)?;
    let partner = brute_force_partners(sorted.len(), |i, j| {
        metric.distance(sorted[i].location, sorted[j].location) as i64
    })
    .0;
    Ok(to_matching(&sorted, &partner, metric))
}

/// Enumerates pairings in lexicographic partner-array order, keeping the
/// first strict minimum. Returns the partner array and the number of pairings visited.
pub fn brute_force_partners(n: usize, dist: impl Fn(usize, usize) -> i64) -> (Vec<usize>, u64) {
    assert!(n % 2 == 0, "odd vertex count");
    let mut partner = vec![usize::MAX; n];
    let mut best: Option<(i64, Vec<usize>)> = None;
    let mut visited = 0;
    recurse(&mut partner, 0, &dist, &mut best, &mut visited);
    (best.map(|b| b.1).unwrap_or_default(), visited)
}

fn recurse(
    partner: &mut [usize],
    acc: i64,
    dist: &impl Fn(usize, usize) -> i64,
    best: &mut Option<(i64, Vec<usize>)>,
    visited: &mut u64,
) {
    let Some(i) = partner.iter().position(|&p| p == usize::MAX) else {
        *visited += 1;
        if best.as_ref().is_none_or(|(w, _)| acc < *w) {
            *best = Some((acc, partner.to_vec()));
        }
        return;
    };
    for j in i + 1..partner.len() {
        if partner[j] != usize::MAX {
            continue;
        }
        partner[i] = j;
        partner[j] = i;
        recurse(partner, acc + dist(i, j), dist, best, visited);
        partner[i] = usize::MAX;
        partner[j] = usize::MAX;
    }
}
