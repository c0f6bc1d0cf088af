mod common;

use common::*;
use isingqec::engine::*;
use isingqec::fusion::Channel;
use isingqec::lattice::{Dir, Torus, TorusCoord};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sigma(a: TorusCoord, b: TorusCoord) -> ErrorEvent {
    ErrorEvent { kind: ErrorKind::Sigma, cells: (a, b) }
}

fn psi(a: TorusCoord, b: TorusCoord) -> ErrorEvent {
    ErrorEvent { kind: ErrorKind::Psi, cells: (a, b) }
}

fn sim(l: u32, seed: u64, injections: &[(u32, ErrorEvent)]) -> Simulation {
    let mut s = Simulation::with_seed(&Config::new(l, 0.0, 1), 0, seed);
    for &(slab, error) in injections {
        s.inject(Injection { slab, error });
    }
    s
}

fn events_of(s: &Simulation, round: u32, kind: EventKind) -> Vec<&Event> {
    s.events().iter().filter(|e| e.round == round && e.kind == kind).collect()
}

#[test]
fn noiseless_sampling_is_empty() {
    let torus = Torus::new(8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        assert!(sample_errors(&torus, 0.0, &mut rng).is_empty());
    }
}

#[test]
fn sampled_error_counts_match_expectation() {
    let l = 4;
    let p = 0.05;
    let rounds = 100_000;
    let torus = Torus::new(l).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut ns, mut np) = (0u64, 0u64);
    for _ in 0..rounds {
        for e in sample_errors(&torus, p, &mut rng) {
            match e.kind {
                ErrorKind::Sigma => ns += 1,
                ErrorKind::Psi => np += 1,
            }
            assert_eq!(torus.distance(e.cells.0, e.cells.1), 1);
        }
    }
    let trials = (2 * l * l) as f64 * rounds as f64;
    for (count, q) in [(ns, p), (np, p * (1.0 - p))] {
        let mean = trials * q;
        let sd = (trials * q * (1.0 - q)).sqrt();
        assert!((count as f64 - mean).abs() < 4.0 * sd, "{count} vs {mean} ± {sd}");
    }
}

#[test]
fn sampling_is_reproducible() {
    let torus = Torus::new(8).unwrap();
    let a = sample_errors(&torus, 0.1, &mut ChaCha8Rng::seed_from_u64(3));
    let b = sample_errors(&torus, 0.1, &mut ChaCha8Rng::seed_from_u64(3));
    assert_eq!(a, b);
}

#[test]
fn psi_pair_on_empty_cells_sets_two_bits() {
    let mut s = sim(8, 0, &[(1, psi(c(2, 2), c(2, 3)))]);
    s.step(0.0).unwrap();
    assert!(s.fermions().has_psi(c(2, 2)) && s.fermions().has_psi(c(2, 3)));
    assert_eq!(s.fermions().count(), 2);
    assert!(events_of(&s, 1, EventKind::Syndrome).is_empty());
}

#[test]
fn psi_pair_touching_an_anyon_is_absorbed_on_that_side() {
    let mut s = sim(8, 0, &[(1, sigma(c(2, 2), c(3, 2))), (1, psi(c(3, 2), c(3, 3)))]);
    s.step(0.0).unwrap();
    assert_eq!(s.fermions().occupied().collect::<Vec<_>>(), vec![c(3, 3)]);
    let absorbs = events_of(&s, 1, EventKind::Absorb);
    assert_eq!(absorbs.len(), 1);
    assert_eq!(absorbs[0].modes, vec![1]);
    assert_eq!(s.pairing().channel(0).unwrap(), Channel::Psi);
}

#[test]
fn sigma_pair_across_an_anyon_fuses_there() {
    let mut outcomes = [0; 2];
    for seed in 0..40 {
        let mut s = sim(8, seed, &[(1, sigma(c(2, 2), c(3, 2))), (1, sigma(c(3, 2), c(4, 2)))]);
        s.step(0.0).unwrap();
        let fusions = events_of(&s, 1, EventKind::Fusion);
        assert_eq!(fusions.len(), 1);
        assert_eq!(fusions[0].cell(0), c(3, 2));
        assert_eq!(s.pairing().alive_count(), 2);
        let deposited = !events_of(&s, 1, EventKind::PsiDeposit).is_empty();
        assert_eq!(deposited, fusions[0].outcome == Some(Channel::Psi));
        assert_eq!(s.fermions().has_psi(c(3, 2)), deposited);
        // The surviving pair carries the fusion outcome, so total ψ parity stays even.
        assert_eq!((s.fermions().count() + s.pairing().psi_pairs()) % 2, 0);
        outcomes[deposited as usize] += 1;
        assert_eq!(s.diagnostics().total(), 0);
    }
    assert!(outcomes[0] > 0 && outcomes[1] > 0);
}

#[test]
fn fresh_adjacent_pair_is_fused_by_one_move() {
    let mut s = sim(8, 0, &[(1, sigma(c(2, 2), c(3, 2)))]);
    s.step(0.0).unwrap();
    let syndrome: Vec<_> = events_of(&s, 1, EventKind::Syndrome).iter().map(|e| e.cell(0)).collect();
    assert_eq!(syndrome, vec![c(2, 2), c(3, 2)]);
    assert_eq!(s.plans(), &[(0, Dir::East)]);
    s.step(0.0).unwrap();
    let moves = events_of(&s, 2, EventKind::Move);
    assert_eq!(moves.len(), 1);
    assert_eq!((moves[0].cell(0), moves[0].cell(1)), (c(2, 2), c(3, 2)));
    let fusions = events_of(&s, 2, EventKind::Fusion);
    assert_eq!(fusions[0].outcome, Some(Channel::Vacuum));
    assert_eq!(s.pairing().alive_count(), 0);
    assert!(events_of(&s, 2, EventKind::Syndrome).is_empty());
}

#[test]
fn quiet_rounds_make_no_moves() {
    let mut s = sim(6, 0, &[]);
    for _ in 0..5 {
        s.step(0.0).unwrap();
    }
    assert!(s.events().is_empty());
    assert!(s.plans().is_empty());
}

#[test]
fn separated_partners_close_in_from_both_sides() {
    // Anyons at (1,2) and (4,2) after the first slab.
    let mut s = sim(
        10,
        0,
        &[
            (1, sigma(c(1, 2), c(2, 2))),
            (1, sigma(c(2, 2), c(3, 2))),
            (1, sigma(c(3, 2), c(4, 2))),
        ],
    );
    s.step(0.0).unwrap();
    let detected: Vec<_> = events_of(&s, 1, EventKind::Detect).iter().map(|e| e.cell(0)).collect();
    assert_eq!(detected, vec![c(1, 2), c(4, 2)]);
    assert_eq!(s.plans().len(), 2);
    s.step(0.0).unwrap();
    let moved: Vec<_> = events_of(&s, 2, EventKind::Move).iter().map(|e| e.cell(1)).collect();
    assert_eq!(moved.len(), 2);
    assert!(moved.contains(&c(2, 2)) && moved.contains(&c(3, 2)));
    assert!(events_of(&s, 2, EventKind::Syndrome).is_empty());
}

#[test]
fn error_on_a_tracked_anyon_moves_its_syndrome() {
    let mut s = sim(
        10,
        0,
        &[
            (1, sigma(c(1, 2), c(2, 2))),
            (1, sigma(c(2, 2), c(3, 2))),
            (1, sigma(c(3, 2), c(4, 2))),
            (2, sigma(c(3, 2), c(3, 3))),
        ],
    );
    s.step(0.0).unwrap();
    s.step(0.0).unwrap();
    let syndrome: Vec<_> = events_of(&s, 2, EventKind::Syndrome).iter().map(|e| e.cell(0)).collect();
    assert_eq!(syndrome, vec![c(3, 2), c(3, 3)]);
    assert_eq!(s.diagnostics().total(), 0);
}

#[test]
fn pair_matched_across_the_boundary_closes_through_it() {
    let mut s = sim(8, 0, &[]);
    for (a, b) in [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)] {
        s.inject(Injection { slab: 1, error: sigma(c(a, 0), c(b, 0)) });
    }
    s.step(0.0).unwrap();
    let mut plans: Vec<_> = s
        .plans()
        .iter()
        .map(|&(m, d)| (s.pairing().position(m).unwrap(), d))
        .collect();
    plans.sort();
    assert_eq!(plans, vec![(c(1, 0), Dir::West), (c(7, 0), Dir::East)]);
    s.step(0.0).unwrap();
    let fusion = events_of(&s, 2, EventKind::Fusion);
    assert_eq!(fusion[0].cell(0), c(0, 0));
}

#[test]
fn noiseless_trial_succeeds_with_empty_trace() {
    for l in [4, 6, 8] {
        let out = run_trial(&Config::new(l, 0.0, 10), 0).unwrap();
        let v = out.verdict.unwrap();
        assert!(v.success);
        assert!(out.trace.events.is_empty());
        assert_eq!(out.completion_rounds, 0);
    }
}

#[test]
fn injected_pair_is_corrected_within_two_rounds() {
    let cfg = Config::new(8, 0.0, 1);
    let mut s = Simulation::with_seed(&cfg, 0, 9);
    s.inject(Injection { slab: 1, error: sigma(c(4, 4), c(4, 5)) });
    let out = s.run().unwrap();
    assert!(out.completion_rounds <= 2);
    let v = out.verdict.clone().unwrap();
    assert!(v.success);
    assert_eq!(v.diagnostics.fermion_events, 0);
    assert_eq!(count_kind(&out, EventKind::PsiDeposit), 0);
}

#[test]
fn trials_are_deterministic_and_round_trip() {
    let mut cfg = Config::new(8, 0.04, 12);
    cfg.seed = 99;
    let a = run_trial(&cfg, 7).unwrap();
    let b = run_trial(&cfg, 7).unwrap();
    assert_eq!(a.to_jsonl(), b.to_jsonl());
    assert_ne!(a.to_jsonl(), run_trial(&cfg, 8).unwrap().to_jsonl());
    let back = read_trace(a.to_jsonl().as_bytes()).unwrap();
    assert_eq!(back.trace, a.trace);
    assert_eq!(back.verdict, a.verdict);
    assert_eq!(back.trace.header.trial_seed, trial_seed(99, 7));
}

#[test]
fn malformed_trace_reports_line() {
    let good = run_trial(&Config::new(4, 0.05, 3), 1).unwrap().to_jsonl();
    let mut lines: Vec<&str> = good.lines().collect();
    lines.insert(2, "{\"round\": \"x\"}");
    let err = read_trace(lines.join("\n").as_bytes()).unwrap_err();
    assert!(err.to_string().contains("line 3"), "{err}");
}

#[test]
fn noisy_trials_keep_engine_invariants() {
    for i in 0..20 {
        let out = run_trial(&Config::new(6, 0.05, 10), i).unwrap();
        assert_eq!(out.diagnostics.total(), 0, "trial {i}");
        assert!(out.verdict.is_some());
    }
}
