mod common;

use std::collections::BTreeMap;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{circuit_state, flat, haar_state, kron, random_program, Shape};
use qrefine_core::gates::{unitarity_error, ALL_BUILTINS};
use qrefine_core::interaction::refine_entanglement;
use qrefine_core::model::{synthesize, AddMethod, InstrId};
use qrefine_core::mover::gap;
use qrefine_core::qasm::{parse, print};
use qrefine_core::separation::{phase_distance, reconstruct, refine_equality, separable_qubits, split};
use qrefine_core::sim::QuantumState;
use qrefine_core::{move_all, refine, simulate, Config, FlatProgram, InstructionKind, Outcome};

fn config(seed: u64) -> Config {
    Config {
        seed,
        ..Config::default()
    }
}

fn verdicts(p: &FlatProgram, cfg: &Config) -> BTreeMap<InstrId, Outcome> {
    simulate(p, cfg)
        .unwrap()
        .verdicts
        .into_iter()
        .map(|v| (v.id, v.outcome))
        .collect()
}

fn non_assertions(p: &FlatProgram) -> Vec<InstrId> {
    p.instructions
        .iter()
        .filter(|i| !i.is_assertion())
        .map(|i| i.id)
        .collect()
}

/// Measurements and resets above each assertion, by identity.
fn measurements_above(p: &FlatProgram) -> BTreeMap<InstrId, usize> {
    let mut seen = 0;
    let mut out = BTreeMap::new();
    for i in &p.instructions {
        match i.kind {
            InstructionKind::MeasurementLike => seen += 1,
            InstructionKind::Assertion => {
                out.insert(i.id, seen);
            }
            _ => {}
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn print_parse_is_a_fixpoint(seed in any::<u64>()) {
        let text = random_program(seed, Shape::default());
        let p = parse(&text).unwrap();
        let printed = print(&p, false);
        let q = parse(&printed).unwrap();
        prop_assert!(p.same_structure(&q));
        prop_assert_eq!(print(&q, false), printed);
        prop_assert!(p.line_map.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn movement_preserves_verdicts(seed in any::<u64>()) {
        let p = flat(&random_program(seed, Shape::default()));
        let cfg = config(seed);
        let (moved, _) = move_all(&p);
        prop_assert_eq!(verdicts(&p, &cfg), verdicts(&moved, &cfg));
    }

    #[test]
    fn movement_is_monotone_idempotent_and_stops_at_measurements(seed in any::<u64>()) {
        let p = flat(&random_program(seed, Shape::default()));
        let (once, records) = move_all(&p);
        for r in &records {
            let before = gap(&p, p.position_of(r.id).unwrap());
            prop_assert!(gap(&once, r.after) <= before);
        }
        let (twice, again) = move_all(&once);
        prop_assert_eq!(&twice, &once);
        prop_assert!(again.iter().all(|r| !r.moved()));
        prop_assert_eq!(measurements_above(&p), measurements_above(&once));
        prop_assert_eq!(non_assertions(&p), non_assertions(&once));
    }

    #[test]
    fn full_refinement_preserves_verdicts_and_code(seed in any::<u64>()) {
        let p = flat(&random_program(seed, Shape::default()));
        let cfg = config(seed);
        let r = refine(&p, &cfg);
        let after = verdicts(&r.program, &cfg);
        for (id, outcome) in verdicts(&p, &cfg) {
            prop_assert_eq!(after.get(&id), Some(&outcome));
        }
        prop_assert_eq!(non_assertions(&p), non_assertions(&r.program));
        let (again, _) = move_all(&r.program);
        prop_assert_eq!(&again, &r.program);
    }

    #[test]
    fn interaction_insertions_couple_their_pair(seed in any::<u64>()) {
        let p = flat(&random_program(seed, Shape::default()));
        let (out, report) = refine_entanglement(&p);
        for a in &report.added {
            let acted = &p.instructions[a.insert_after].acted;
            prop_assert!(acted.contains(&a.targets.0) && acted.contains(&a.targets.1));
            prop_assert!(a.insert_after < a.provenance);
        }
        let added = out.instructions.iter().filter(|i| i.added_by == Some(AddMethod::Interaction)).count();
        prop_assert_eq!(added, report.added.len());
        let (twice, second) = refine_entanglement(&out);
        prop_assert!(second.added.is_empty());
        prop_assert_eq!(twice.len(), out.len());
    }

    #[test]
    fn derived_equalities_pass_with_their_source(seed in any::<u64>()) {
        let p = flat(&random_program(seed, Shape::default()));
        let cfg = config(seed);
        let (out, splits) = refine_equality(&p, cfg.separability_threshold, false);
        let before = verdicts(&p, &cfg);
        let after = simulate(&out, &cfg).unwrap();
        for s in &splits {
            let source = p.instructions[s.source_assertion].id;
            if before[&source] != Outcome::Pass {
                continue;
            }
            let at = out.position_of(source).unwrap();
            let derived = &after.verdicts.iter().filter(|v| v.assertion_index < at).collect::<Vec<_>>();
            let derived = &derived[derived.len() - s.added.len()..];
            prop_assert!(derived.iter().all(|v| v.passed()), "{:?}", s.added);
        }
    }

    #[test]
    fn simulation_is_normalized_and_seeded(seed in any::<u64>()) {
        let p = flat(&random_program(seed, Shape::default()));
        let cfg = config(seed);
        let a = simulate(&p, &cfg).unwrap();
        let b = simulate(&p, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!((a.final_state.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reduced_states_are_density_matrices(seed in any::<u64>(), n in 1usize..=6, haar in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = if haar {
            QuantumState { amplitudes: haar_state(&mut rng, n), num_qubits: n }
        } else {
            circuit_state(&mut rng, n, 10)
        };
        let k = rng.gen_range(1..=n);
        let targets = rand::seq::index::sample(&mut rng, n, k).into_vec();
        let rho = s.reduced_density(&targets);
        prop_assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        prop_assert!((&rho - rho.adjoint()).iter().all(|z| z.norm() < 1e-12));
        let min = rho.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(min > -1e-9);
    }

    #[test]
    fn split_reconstructs_the_state(seed in any::<u64>(), k in 1usize..=6, singles in 0usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let singles = singles.min(k);
        let mut amps = if k > singles { haar_state(&mut rng, k - singles) } else { vec![Complex64::new(1.0, 0.0)] };
        for _ in 0..singles {
            amps = kron(&amps, &haar_state(&mut rng, 1));
        }
        let s = split(&amps, 1e-9);
        prop_assert!(phase_distance(&reconstruct(&s), &amps) < 1e-9);
        for f in &s.factors {
            prop_assert!(((f.state[0].norm_sqr() + f.state[1].norm_sqr()).sqrt() - 1.0).abs() < 1e-9);
        }
        prop_assert!(s.factors.len() >= singles);
        prop_assert_eq!(separable_qubits(&amps, 1e-9), separable_qubits(&amps, 1e-9));
    }

    #[test]
    fn synthesized_gates_are_unitary(seed in any::<u64>()) {
        let p = flat(&random_program(seed, Shape::default()));
        for i in p.instructions.iter().filter(|i| i.kind == InstructionKind::Unitary) {
            if let Some(m) = &i.class.matrix {
                prop_assert!(unitarity_error(m) < 1e-9);
            }
            let qubits: Vec<usize> = i.acted.iter().copied().collect();
            if qubits.len() <= 3 {
                prop_assert!(unitarity_error(&synthesize(&i.prims, &qubits)) < 1e-9);
            }
        }
    }

    #[test]
    fn nonpositive_tolerances_are_rejected(pick in 0usize..5, value in prop_oneof![Just(0.0), Just(f64::NAN), -1.0..0.0f64]) {
        let mut cfg = Config::default();
        let slot = [
            &mut cfg.equality_epsilon,
            &mut cfg.separability_threshold,
            &mut cfg.diagonal_threshold,
            &mut cfg.superposition_threshold,
            &mut cfg.entanglement_threshold,
        ];
        *slot.into_iter().nth(pick).unwrap() = value;
        prop_assert!(cfg.validate().is_err());
    }
}

#[test]
fn symmetric_gates_classify_the_same_both_ways() {
    for g in ALL_BUILTINS.iter().filter(|g| ["cz", "swap"].contains(&g.name())) {
        let a = flat(&format!("qreg q[2];\n{} q[0], q[1];", g.name()));
        let b = flat(&format!("qreg q[2];\n{} q[1], q[0];", g.name()));
        assert_eq!(a.instructions[1].class.tag, b.instructions[1].class.tag);
    }
}

#[test]
fn flatten_is_deterministic() {
    for seed in 0..50 {
        let text = random_program(seed, Shape::default());
        assert_eq!(flat(&text), flat(&text));
    }
}
