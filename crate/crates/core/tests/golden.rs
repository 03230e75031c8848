mod common;

use std::collections::BTreeSet;

use common::{fixture, flat, FIXTURES};
use qrefine_core::interaction::Skip;
use qrefine_core::mover::Rule;
use qrefine_core::qasm::{parse, print};
use qrefine_core::{refine, report_json, simulate, Config, InstructionKind};

fn golden(name: &str) -> String {
    let path = format!("{}/tests/golden/{name}.qasm", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

fn refined_text(input: &str, cfg: &Config, annotations: bool) -> String {
    print(&refine(&flat(input), cfg).program.to_source(), annotations)
}

fn strip_comments(text: &str) -> String {
    text.lines()
        .map(|l| l.split("//").next().unwrap().trim_end())
        .filter(|l| !l.is_empty())
        .map(|l| format!("{l}\n"))
        .collect()
}

#[test]
fn cccx_refinement_matches_golden() {
    let out = refined_text(&fixture("cccx"), &Config::default(), true);
    assert_eq!(out, golden("cccx_refined"));
    assert!(out.contains("assert-sup target; // moved from line 22\n"));
}

#[test]
fn ghz_refinement_matches_golden() {
    let out = refined_text(&fixture("ghz"), &Config::default(), true);
    assert_eq!(out, golden("ghz_refined"));
    assert!(out.contains("assert-ent q[0], q[1]; // added by interaction\n"));
}

#[test]
fn drop_subsumed_removes_fully_separable_original() {
    let cfg = Config {
        drop_subsumed: true,
        ..Config::default()
    };
    let out = refined_text(&fixture("uncompute"), &cfg, true);
    assert_eq!(out, golden("uncompute_drop_subsumed"));
    assert!(!out.contains("assert-eq anc {"));

    let kept = refined_text(&fixture("uncompute"), &Config::default(), false);
    assert!(kept.ends_with("assert-eq anc { 1, 0, 0, 0, 0, 0, 0, 0 }\n"));
}

#[test]
fn golden_outputs_reparse_to_the_refined_program() {
    for (input, name) in [("cccx", "cccx_refined"), ("ghz", "ghz_refined")] {
        let again = parse(&golden(name)).unwrap();
        let direct = refine(&flat(&fixture(input)), &Config::default()).program.to_source();
        assert!(again.same_structure(&direct), "{name}");
    }
}

#[test]
fn fixtures_print_back_modulo_comments_and_blank_lines() {
    for name in FIXTURES {
        let text = fixture(name);
        assert_eq!(print(&parse(&text).unwrap(), false), strip_comments(&text), "{name}");
    }
}

#[test]
fn unrefinable_program_is_unchanged() {
    let text = fixture("bell");
    let r = refine(&flat(&text), &Config::default());
    assert_eq!(print(&r.program.to_source(), true), text);
    let json = report_json(&r, "bell.qasm");
    assert_eq!(json["moves"], serde_json::json!([]));
}

#[test]
fn fixture_verdicts() {
    let cfg = Config::default();
    let expect = [
        ("bell", vec![]),
        ("cccx", vec![false, false, false]),
        ("cccx_correct", vec![true, true, true]),
        ("ghz", vec![true]),
        ("ghz_mutant", vec![false]),
        ("uncompute", vec![true]),
        ("uncompute_mutant", vec![false]),
    ];
    for (name, want) in expect {
        let run = simulate(&flat(&fixture(name)), &cfg).unwrap();
        let got: Vec<bool> = run.verdicts.iter().map(|v| v.passed()).collect();
        assert_eq!(got, want, "{name}");
    }
}

#[test]
fn cccx_flattens_to_fifteen_instructions() {
    let p = flat(&fixture("cccx"));
    assert_eq!(p.len(), 15);
    let ccx = &p.instructions[6];
    assert_eq!(ccx.origin, 9);
    assert_eq!(ccx.acted, BTreeSet::from([0, 1, 3]));
    let kinds: Vec<InstructionKind> = p.instructions.iter().map(|i| i.kind).collect();
    assert_eq!(kinds.iter().filter(|k| **k == InstructionKind::Assertion).count(), 3);
    assert_eq!(kinds.iter().filter(|k| **k == InstructionKind::Unitary).count(), 9);
}

#[test]
fn cccx_report_lists_moves_and_rules() {
    let p = flat(&fixture("cccx"));
    let r = refine(&p, &Config::default());
    let json = report_json(&r, "cccx.qasm");
    assert_eq!(json["schema"], 1);
    assert_eq!(json["input"], "cccx.qasm");

    let sup = r.moves.iter().find(|m| m.assertion.starts_with("assert-sup")).unwrap();
    assert!(sup.rules_fired.contains(&Rule::Diagonal));
    assert!(sup.rules_fired.contains(&Rule::Disjoint));
    let blocker = sup.blocked_by.unwrap();
    assert_eq!(r.program.describe(blocker), "cx anc[1], target[0];");

    let ent = r.moves.iter().find(|m| m.assertion.starts_with("assert-ent")).unwrap();
    assert!(ent.rules_fired.contains(&Rule::SingleQubit));
    assert_eq!(r.program.describe(ent.blocked_by.unwrap()), "ccx q[0], q[1], anc[0];");

    // q[0] and target[0] meet through several routes, so nothing is added.
    assert!(r.interaction.added.is_empty());
    assert_eq!(r.interaction.notes[0].skipped, Some(Skip::MultiplePaths));
    assert_eq!(r.separation.len(), 1);
    assert_eq!(json["separation"][0]["added"].as_array().unwrap().len(), 2);
    assert_eq!(json["moves"].as_array().unwrap().len(), r.moves.len());
}
