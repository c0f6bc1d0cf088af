//! Dense reference simulation of the channel algebra.
//!
//! Modes are Majorana operators under a Jordan–Wigner encoding on up to six
//! qubits: `γ_{2k} = Z_0…Z_{k-1} X_k` and `γ_{2k+1} = Z_0…Z_{k-1} Y_k`. The
//! initial state is `|1…1⟩`, on which `iγ_{2k}γ_{2k+1} = -Z_k = +1`, so every
//! freshly created pair is in the vacuum channel. Absorbing a fermion applies
//! `γ_m`; a monodromy applies `γ_m γ_x`; fusing `a` with `b` projects onto an
//! eigenspace of `iγ_a γ_b`.
//!
//! Every pair is stored with an orientation `(p, q)` such that its channel is
//! the eigenvalue of `iγ_p γ_q`. When `a` (paired with `a'`) fuses with `b`
//! (paired with `b'`), the identity `(iγ_a γ_b)(iγ_b' γ_a') = (iγ_a γ_a')(iγ_b γ_b')`
//! fixes the orientation of the new pair `(a', b')`.

use num_complex::Complex64;

use super::{Channel, ModeId};
use crate::error::FusionError;

pub const MAX_MODES: usize = 12;
const QUBITS: usize = MAX_MODES / 2;
const DIM: usize = 1 << QUBITS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleOp {
    /// Creates modes `2k` and `2k + 1` for the next unused `k`.
    Create,
    Absorb(ModeId),
    Monodromy(ModeId, ModeId),
    Measure(ModeId, ModeId),
}

/// One measurement step of a branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub outcome: Channel,
    /// Conditional probability, exactly `0.5` or `1.0`.
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub steps: Vec<Step>,
    pub probability: f64,
    /// Channels of the alive pairs at the end, as `(lower id, higher id, channel)`, sorted.
    pub final_pairs: Vec<(ModeId, ModeId, Channel)>,
}

#[derive(Debug, Clone)]
struct State {
    amp: Vec<Complex64>,
    /// Oriented partner: `pairs[m] = Some((p, q))` for both members of a pair.
    pairs: Vec<Option<(ModeId, ModeId)>>,
}

fn apply_majorana(amp: &[Complex64], j: usize) -> Vec<Complex64> {
    let k = j / 2;
    let odd = j % 2 == 1;
    let mut out = vec![Complex64::new(0.0, 0.0); DIM];
    for (idx, a) in amp.iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let below = (idx & ((1 << k) - 1)).count_ones();
        let mut phase = if below % 2 == 1 {
            Complex64::new(-1.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        };
        let bit = (idx >> k) & 1;
        if odd {
            // Y|0> = i|1>, Y|1> = -i|0>
            phase *= if bit == 0 {
                Complex64::new(0.0, 1.0)
            } else {
                Complex64::new(0.0, -1.0)
            };
        }
        out[idx ^ (1 << k)] += phase * a;
    }
    out
}

/// `iγ_a γ_b |ψ⟩`.
fn apply_bilinear(amp: &[Complex64], a: usize, b: usize) -> Vec<Complex64> {
    let t = apply_majorana(amp, b);
    let mut u = apply_majorana(&t, a);
    for z in &mut u {
        *z *= Complex64::new(0.0, 1.0);
    }
    u
}

fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm_sqr(x: &[Complex64]) -> f64 {
    x.iter().map(Complex64::norm_sqr).sum()
}

fn round_probability(p: f64) -> f64 {
    for v in [0.0, 0.5, 1.0] {
        if (p - v).abs() < 1e-9 {
            return v;
        }
    }
    panic!("outcome probability {p} is not in {{0, 1/2, 1}}");
}

impl State {
    fn new() -> Self {
        let mut amp = vec![Complex64::new(0.0, 0.0); DIM];
        amp[DIM - 1] = Complex64::new(1.0, 0.0);
        State { amp, pairs: Vec::new() }
    }

    fn alive(&self, m: ModeId) -> Result<(ModeId, ModeId), FusionError> {
        self.pairs
            .get(m as usize)
            .copied()
            .flatten()
            .ok_or(FusionError::DeadMode(m))
    }

    fn partner(&self, m: ModeId) -> Result<ModeId, FusionError> {
        let (p, q) = self.alive(m)?;
        Ok(if p == m { q } else { p })
    }

    fn set_pair(&mut self, p: ModeId, q: ModeId) {
        self.pairs[p as usize] = Some((p, q));
        self.pairs[q as usize] = Some((p, q));
    }

    /// Projects onto the `outcome` eigenspace of `iγ_a γ_b`; returns the probability.
    fn project(&mut self, a: ModeId, b: ModeId, outcome: Channel) -> f64 {
        let m = apply_bilinear(&self.amp, a as usize, b as usize);
        let s = outcome.sign() as f64;
        let projected: Vec<Complex64> = self.amp.iter().zip(&m).map(|(x, y)| (x + y * s) * 0.5).collect();
        let p = norm_sqr(&projected);
        if p > 1e-12 {
            let n = p.sqrt();
            self.amp = projected.into_iter().map(|z| z / n).collect();
        }
        round_probability(p)
    }

    fn final_pairs(&self) -> Vec<(ModeId, ModeId, Channel)> {
        let mut out = Vec::new();
        for (m, e) in self.pairs.iter().enumerate() {
            let Some((p, q)) = *e else { continue };
            if m as ModeId != p.min(q) {
                continue;
            }
            let v = inner(&self.amp, &apply_bilinear(&self.amp, p as usize, q as usize));
            assert!(v.im.abs() < 1e-9, "bilinear expectation must be real");
            let ch = if (v.re - 1.0).abs() < 1e-9 {
                Channel::Vacuum
            } else if (v.re + 1.0).abs() < 1e-9 {
                Channel::Psi
            } else {
                panic!("pair ({p},{q}) is not in a definite channel: {}", v.re);
            };
            out.push((p.min(q), p.max(q), ch));
        }
        out
    }
}

fn validate(ops: &[OracleOp]) -> Result<(), FusionError> {
    let created = 2 * ops.iter().filter(|o| matches!(o, OracleOp::Create)).count();
    if created > MAX_MODES {
        return Err(FusionError::OracleCapacity(created));
    }
    Ok(())
}

/// Runs `ops` over every measurement branch of nonzero probability.
pub fn oracle_evolve(ops: &[OracleOp]) -> Result<Vec<Branch>, FusionError> {
    validate(ops)?;
    let mut out = Vec::new();
    explore(State::new(), ops, Vec::new(), 1.0, &mut out)?;
    Ok(out)
}

fn explore(
    mut st: State,
    ops: &[OracleOp],
    mut steps: Vec<Step>,
    prob: f64,
    out: &mut Vec<Branch>,
) -> Result<(), FusionError> {
    for (i, op) in ops.iter().enumerate() {
        match *op {
            OracleOp::Create => {
                let p = st.pairs.len() as ModeId;
                st.pairs.extend([None, None]);
                st.set_pair(p, p + 1);
            }
            OracleOp::Absorb(m) => {
                st.alive(m)?;
                st.amp = apply_majorana(&st.amp, m as usize);
            }
            OracleOp::Monodromy(m, x) => {
                st.alive(m)?;
                st.alive(x)?;
                if m == x {
                    return Err(FusionError::SameMode(m));
                }
                let t = apply_majorana(&st.amp, x as usize);
                st.amp = apply_majorana(&t, m as usize);
            }
            OracleOp::Measure(a, b) => {
                let (pa, qa) = st.alive(a)?;
                st.alive(b)?;
                if a == b {
                    return Err(FusionError::SameMode(a));
                }
                let a2 = st.partner(a)?;
                let b2 = st.partner(b)?;
                for outcome in [Channel::Vacuum, Channel::Psi] {
                    let mut next = st.clone();
                    let (x, y) = if a2 == b { (pa, qa) } else { (a, b) };
                    let p = next.project(x, y, outcome);
                    if p == 0.0 {
                        continue;
                    }
                    next.pairs[a as usize] = None;
                    next.pairs[b as usize] = None;
                    if a2 != b {
                        let ea = st.alive(a)? == (a, a2);
                        let eb = st.alive(b)? == (b, b2);
                        if ea == eb {
                            next.set_pair(b2, a2);
                        } else {
                            next.set_pair(a2, b2);
                        }
                    }
                    let mut s = steps.clone();
                    s.push(Step { outcome, probability: p });
                    explore(next, &ops[i + 1..], s, prob * p, out)?;
                }
                return Ok(());
            }
        }
    }
    let final_pairs = st.final_pairs();
    steps.shrink_to_fit();
    out.push(Branch {
        steps,
        probability: prob,
        final_pairs,
    });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use OracleOp::*;

    #[test]
    fn single_pair_fuses_to_vacuum() {
        let b = oracle_evolve(&[Create, Measure(0, 1)]).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].steps, vec![Step { outcome: Channel::Vacuum, probability: 1.0 }]);
    }

    #[test]
    fn absorb_flips_channel() {
        let b = oracle_evolve(&[Create, Absorb(0)]).unwrap();
        assert_eq!(b[0].final_pairs, vec![(0, 1, Channel::Psi)]);
        let b = oracle_evolve(&[Create, Absorb(0), Absorb(1)]).unwrap();
        assert_eq!(b[0].final_pairs, vec![(0, 1, Channel::Vacuum)]);
    }

    #[test]
    fn monodromy_on_two_pairs_and_own_pair() {
        let b = oracle_evolve(&[Create, Create, Monodromy(0, 3)]).unwrap();
        assert_eq!(b[0].final_pairs, vec![(0, 1, Channel::Psi), (2, 3, Channel::Psi)]);
        let b = oracle_evolve(&[Create, Monodromy(1, 0)]).unwrap();
        assert_eq!(b[0].final_pairs, vec![(0, 1, Channel::Vacuum)]);
    }

    #[test]
    fn figure_two_left() {
        let b = oracle_evolve(&[Create, Create, Measure(1, 2), Measure(0, 3)]).unwrap();
        assert_eq!(b.len(), 2);
        for br in &b {
            assert_eq!(br.probability, 0.5);
            assert_eq!(br.steps[0].outcome, br.steps[1].outcome);
            assert_eq!(br.steps[1].probability, 1.0);
        }
    }

    #[test]
    fn capacity_is_enforced() {
        assert_eq!(oracle_evolve(&[Create; 7]).unwrap_err(), FusionError::OracleCapacity(14));
    }
}
