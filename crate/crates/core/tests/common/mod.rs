#![allow(dead_code)]

use isingqec::engine::{Config, ErrorEvent, ErrorKind, EventKind, Injection, Simulation, TrialOutcome};
use isingqec::fusion::oracle::{oracle_evolve, OracleOp};
use isingqec::fusion::{Channel, ChannelAlgebra, ModeId, OutcomeProbability, PairingState};
use isingqec::lattice::{Dir, Torus, TorusCoord};
use rand::Rng;

pub fn c(x: u32, y: u32) -> TorusCoord {
    TorusCoord::new(x, y)
}

/// Random valid operation sequence on at most `max_pairs` pairs.
pub fn random_ops<R: Rng>(rng: &mut R, max_pairs: usize, len: usize) -> Vec<OracleOp> {
    let mut alive: Vec<ModeId> = Vec::new();
    let mut created = 0;
    let mut ops = Vec::new();
    while ops.len() < len {
        let roll = rng.gen_range(0..10);
        if created < max_pairs && (alive.len() < 2 || roll == 0) {
            let k = 2 * created as ModeId;
            created += 1;
            alive.extend([k, k + 1]);
            ops.push(OracleOp::Create);
            continue;
        }
        if alive.len() < 2 {
            break;
        }
        let i = rng.gen_range(0..alive.len());
        let mut j = rng.gen_range(0..alive.len() - 1);
        if j >= i {
            j += 1;
        }
        let (a, b) = (alive[i], alive[j]);
        match roll {
            1..=3 => ops.push(OracleOp::Absorb(a)),
            4..=6 => ops.push(OracleOp::Monodromy(a, b)),
            _ => {
                ops.push(OracleOp::Measure(a, b));
                alive.retain(|&m| m != a && m != b);
            }
        }
    }
    ops
}

/// Replays every oracle branch through the channel algebra and reports the first disagreement.
pub fn check_against_oracle(ops: &[OracleOp]) -> Result<usize, String> {
    let branches = oracle_evolve(ops).map_err(|e| e.to_string())?;
    let total: f64 = branches.iter().map(|b| b.probability).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(format!("oracle probabilities sum to {total}"));
    }
    for br in &branches {
        let mut alg = ChannelAlgebra::new();
        let mut step = 0;
        for op in ops {
            match *op {
                OracleOp::Create => {
                    alg.create_pair();
                }
                OracleOp::Absorb(m) => alg.absorb(m).map_err(|e| e.to_string())?,
                OracleOp::Monodromy(m, x) => alg.monodromy(m, x).map_err(|e| e.to_string())?,
                OracleOp::Measure(a, b) => {
                    let want = br.steps[step];
                    let r = alg.measure(a, b, &mut || want.outcome).map_err(|e| e.to_string())?;
                    let p = match r.probability {
                        OutcomeProbability::Half => 0.5,
                        OutcomeProbability::One => 1.0,
                    };
                    if r.outcome != want.outcome || (p - want.probability).abs() > 1e-9 {
                        return Err(format!(
                            "{ops:?}: step {step} gives {:?} with {p}, oracle {:?} with {}",
                            r.outcome, want.outcome, want.probability
                        ));
                    }
                    step += 1;
                }
            }
        }
        if alg.pairs() != br.final_pairs {
            return Err(format!("{ops:?}: final pairs {:?} vs oracle {:?}", alg.pairs(), br.final_pairs));
        }
    }
    Ok(branches.len())
}

/// Two pairs created side by side and fused crosswise; returns both outcomes.
pub fn figure_two_left<R: Rng>(rng: &mut R) -> (Channel, Channel) {
    let mut st = PairingState::new(Torus::new(8).unwrap());
    let (a0, a1) = st.create_sigma_pair(c(0, 0), c(1, 0)).unwrap();
    let (b0, b1) = st.create_sigma_pair(c(1, 1), c(0, 1)).unwrap();
    let mut coin = || if rng.gen_bool(0.5) { Channel::Psi } else { Channel::Vacuum };
    st.move_mode(b0, Dir::South).unwrap();
    let first = st.measure_pair(a1, b0, &mut coin).unwrap().outcome;
    st.move_mode(b1, Dir::South).unwrap();
    let second = st.measure_pair(a0, b1, &mut coin).unwrap().outcome;
    (first, second)
}

/// A σ pair one of whose anyons swallows a fermion of a ψ pair created in the same slab.
pub fn swallow_then_fuse<R: Rng>(rng: &mut R, l: u32) -> TrialOutcome {
    let torus = Torus::new(l).unwrap();
    let a = c(rng.gen_range(0..l), rng.gen_range(0..l));
    let dirs = Dir::ALL;
    let d1 = dirs[rng.gen_range(0..4)];
    let b = torus.step(a, d1);
    let swallower = if rng.gen_bool(0.5) { a } else { b };
    let other = if swallower == a { b } else { a };
    let free: Vec<_> = dirs
        .iter()
        .map(|&d| torus.step(swallower, d))
        .filter(|&n| n != other)
        .collect();
    let f = free[rng.gen_range(0..free.len())];
    let cfg = Config::new(l, 0.0, 1);
    let mut sim = Simulation::with_seed(&cfg, 0, rng.gen());
    sim.inject(Injection {
        slab: 1,
        error: ErrorEvent { kind: ErrorKind::Sigma, cells: (a, b) },
    });
    sim.inject(Injection {
        slab: 1,
        error: ErrorEvent { kind: ErrorKind::Psi, cells: (swallower, f) },
    });
    sim.run().unwrap()
}

pub fn count_kind(outcome: &TrialOutcome, kind: EventKind) -> usize {
    outcome.trace.events.iter().filter(|e| e.kind == kind).count()
}
