mod common;

use common::*;
use isingqec::engine::*;
use isingqec::ledger::*;
use isingqec::lattice::{EdgeSet, SpaceTimeCell, Torus, WindingParity};

fn run_injected(l: u32, injections: &[(u32, ErrorKind, (u32, u32), (u32, u32))]) -> (TrialOutcome, Analysis) {
    let mut s = Simulation::with_seed(&Config::new(l, 0.0, 1), 0, 2);
    for &(slab, kind, a, b) in injections {
        s.inject(Injection {
            slab,
            error: ErrorEvent {
                kind,
                cells: (c(a.0, a.1), c(b.0, b.1)),
            },
        });
    }
    let out = s.run().unwrap();
    let analysis = analyze(&out.trace).unwrap();
    assert_eq!(Some(&analysis.verdict), out.verdict.as_ref());
    (out, analysis)
}

fn tuple(c: &LedgerComponent) -> (u64, u64, u64, u64, u64) {
    (c.a_s, c.h, c.w_h, c.w_v, c.o)
}

#[test]
fn single_error_component_is_tight() {
    let (_, a) = run_injected(8, &[(1, ErrorKind::Sigma, (3, 3), (4, 3))]);
    assert_eq!(a.components.len(), 1);
    let comp = &a.components[0];
    assert_eq!(tuple(comp), (1, 1, 1, 2, 4));
    assert_eq!(comp.f, 1);
    // W_h ≤ H ≤ A_s, W_h ≥ W_v - f and O ≤ 4 A_s all hold with equality.
    assert_eq!(comp.w_h + comp.f, comp.w_v);
    assert_eq!(comp.w_h, comp.h);
    assert_eq!(comp.h, comp.a_s);
    assert_eq!(comp.o, 4 * comp.a_s);
    assert_eq!(check_inequalities(&a.components), InequalityViolations::default());
    assert!(a.verdict.success);
}

#[test]
fn distant_errors_form_separate_components() {
    let (_, a) = run_injected(
        12,
        &[(1, ErrorKind::Sigma, (1, 1), (2, 1)), (1, ErrorKind::Sigma, (7, 7), (7, 8))],
    );
    assert_eq!(a.components.len(), 2);
    for comp in &a.components {
        assert_eq!(tuple(comp), (1, 1, 1, 2, 4));
    }
    assert!(a.verdict.success);
}

#[test]
fn crosswise_matching_joins_both_errors() {
    // Two vertical error strings whose syndromes are matched horizontally.
    let (out, a) = run_injected(
        8,
        &[(1, ErrorKind::Sigma, (0, 0), (0, 1)), (1, ErrorKind::Sigma, (1, 0), (1, 1))],
    );
    let hyps: Vec<_> = out
        .trace
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Hypothesis)
        .map(|e| (e.cell(0), e.cell(1)))
        .collect();
    assert_eq!(hyps, vec![(c(0, 0), c(1, 0)), (c(0, 1), c(1, 1))]);
    assert_eq!(a.components.len(), 1);
    let comp = &a.components[0];
    assert_eq!(comp.a_s, 2);
    for cell in [c(0, 0), c(1, 0), c(0, 1), c(1, 1)] {
        assert!(comp.vertices.contains(&SpaceTimeCell::at(cell, 1)));
    }
    assert!(a.verdict.success);
    assert_eq!(a.verdict.diagnostics.structure_errors, 0);
}

#[test]
fn winding_error_loop_is_a_sigma_failure() {
    let l = 6;
    let row: Vec<_> = (0..l).map(|x| (1, ErrorKind::Sigma, (x, 2), ((x + 1) % l, 2))).collect();
    let (out, a) = run_injected(l, &row);
    assert!(out.trace.events.iter().all(|e| e.kind != EventKind::Syndrome));
    assert_eq!(a.error_loops, vec![WindingParity { wx: true, wy: false }]);
    assert!(a.verdict.sigma_failure);
    assert!(!a.verdict.success);
    assert_eq!(a.verdict.psi_winding, None);
}

#[test]
fn contractible_error_loop_is_harmless() {
    let (_, a) = run_injected(
        8,
        &[
            (1, ErrorKind::Sigma, (2, 2), (3, 2)),
            (1, ErrorKind::Sigma, (3, 2), (3, 3)),
            (1, ErrorKind::Sigma, (3, 3), (2, 3)),
            (1, ErrorKind::Sigma, (2, 3), (2, 2)),
        ],
    );
    assert_eq!(a.error_loops, vec![WindingParity::default()]);
    assert!(!a.verdict.sigma_failure);
}

#[test]
fn fermion_correction_completing_a_loop_is_a_psi_failure() {
    let l = 8;
    // ψ errors along the far half of row 0 leave fermions at (4,0) and (0,0).
    let errors: Vec<_> = (4..8).map(|x| (1, ErrorKind::Psi, (x, 0), ((x + 1) % l, 0))).collect();
    let (_, a) = run_injected(l, &errors);
    let torus = Torus::new(l).unwrap();
    let mut x = EdgeSet::new(l);
    for x0 in 4..8 {
        x.toggle_path(&torus, &[c(x0, 0), c((x0 + 1) % l, 0)]);
    }
    x.xor_with(&a.correction.edges(&torus));
    assert!(x.odd_cells(&torus).is_empty());
    let expected = torus.winding_parity(&x).unwrap();
    assert_eq!(expected, WindingParity { wx: true, wy: false });
    assert_eq!(a.verdict.psi_winding, Some(expected));
    assert!(a.verdict.psi_failure && !a.verdict.sigma_failure && !a.verdict.success);

    // The near half is undone along the same edges.
    let errors: Vec<_> = (0..4).map(|x| (1, ErrorKind::Psi, (x, 0), (x + 1, 0))).collect();
    let (_, a) = run_injected(l, &errors);
    assert_eq!(a.verdict.psi_winding, Some(WindingParity::default()));
    assert!(a.verdict.success);
}

#[test]
fn empty_trace_is_vacuous_success() {
    let trace = Trace {
        header: TraceHeader {
            l: 6,
            p: 0.0,
            rounds: 3,
            trial: 0,
            master_seed: 0,
            trial_seed: 0,
        },
        events: vec![],
    };
    let a = analyze(&trace).unwrap();
    assert!(a.components.is_empty());
    assert_eq!(a.verdict.diagnostics.violations, InequalityViolations::default());
    assert!(a.verdict.success);
    assert!(a.verdict.sigma_winding.is_empty());
    assert_eq!(a.verdict.psi_winding, Some(WindingParity::default()));
    assert!(build_components(&trace).unwrap().is_empty());
}

#[test]
fn swallow_then_fuse_is_corrected() {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
    for _ in 0..10 {
        let out = swallow_then_fuse(&mut rng, 8);
        let v = out.verdict.as_ref().unwrap();
        assert!(v.success);
        assert_eq!(count_kind(&out, EventKind::PsiDeposit), 1);
    }
}

#[test]
fn noisy_trials_satisfy_the_component_bounds() {
    let mut cfg = Config::new(6, 0.04, 8);
    cfg.seed = 5;
    for i in 0..30 {
        let out = run_trial(&cfg, i).unwrap();
        let v = out.verdict.unwrap();
        let d = &v.diagnostics;
        assert_eq!(d.structure_errors, 0, "trial {i}");
        assert_eq!(d.flag_mismatches, 0);
        assert_eq!(d.violations.optimality, 0);
        assert_eq!(d.violations.wh_le_h, 0);
        assert_eq!(d.violations.h_le_as, 0);
        assert_eq!(d.violations.f_le_as, 0);
        assert_eq!(d.violations.o_le_4as, 0);
        let comps = build_components(&out.trace).unwrap();
        assert_eq!(comps.len() as u64, d.components);
        assert!(comps.iter().all(|c| c.o == c.a_s + c.w_h + c.w_v));
    }
}
