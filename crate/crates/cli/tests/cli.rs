use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(format!("{name}.qasm"))
}

fn qrefine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrefine"))
        .args(args)
        .env_remove("QREFINE_CONFIG")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_exit_codes() {
    let o = qrefine(&["check", path(&fixture("cccx"))]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).matches("FAIL").count(), 3);

    let o = qrefine(&["check", path(&fixture("cccx_correct"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("PASS").count(), 3);

    let o = qrefine(&["check", path(&fixture("bell"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
}

#[test]
fn check_json_lists_verdicts() {
    let o = qrefine(&["check", "--json", path(&fixture("ghz_mutant"))]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["outcome"], "fail");
    assert_eq!(v[0]["line"], 7);
    assert_eq!(v[0]["assertion_index"], 6);
}

#[test]
fn parse_and_analysis_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.qasm");
    fs::write(&bad, "qreg q[1];\nassert-ent q[0];\n").unwrap();
    let o = qrefine(&["check", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let o = qrefine(&["refine", path(&dir.path().join("missing.qasm"))]);
    assert_eq!(o.status.code(), Some(2));

    let big = dir.path().join("big.qasm");
    fs::write(&big, "qreg q[20];\nassert-sup q[0];\n").unwrap();
    assert_eq!(qrefine(&["check", path(&big)]).status.code(), Some(3));

    let o = qrefine(&["check", "--equality-epsilon", "0", path(&fixture("ghz"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn refine_writes_program_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.qasm");
    let o = qrefine(&["refine", path(&fixture("cccx")), "-o", path(&out), "--annotations"]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("cx anc[1], target[0];\nassert-sup target; // moved from line 22\n"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["moves"].as_array().unwrap().len(), 5);

    let o = qrefine(&["refine", path(&fixture("cccx")), "--mode", "moving"]);
    let text = stdout(&o);
    assert!(!text.contains("//"));
    assert!(!text.contains("assert-eq anc[0] {"));
}

#[test]
fn refine_without_assertions_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bell.qasm");
    let rep = dir.path().join("report.json");
    let o = qrefine(&[
        "refine",
        path(&fixture("bell")),
        "-o",
        path(&out),
        "--report",
        path(&rep),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        fs::read_to_string(&out).unwrap(),
        fs::read_to_string(fixture("bell")).unwrap()
    );
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(report["moves"], serde_json::json!([]));
    assert_eq!(report["interaction"]["added"], serde_json::json!([]));
    assert_eq!(report["separation"], serde_json::json!([]));
}

#[test]
fn drop_subsumed_flag() {
    let o = qrefine(&[
        "refine",
        path(&fixture("uncompute")),
        "--drop-subsumed",
        "--annotations",
    ]);
    let text = stdout(&o);
    assert_eq!(text.matches("// added by separation").count(), 3);
    assert!(!text.contains("assert-eq anc {"));
}

#[test]
fn config_file_and_env_var() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("qrefine.toml");
    fs::write(&cfg, "drop_subsumed = true\nannotations = true\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qrefine"))
        .args(["refine", path(&fixture("uncompute"))])
        .env("QREFINE_CONFIG", &cfg)
        .output()
        .unwrap();
    let text = stdout(&o);
    assert!(text.contains("// added by separation"));
    assert!(!text.contains("assert-eq anc {"));

    fs::write(&cfg, "no_such_knob = 1\n").unwrap();
    let o = qrefine(&["check", "--config", path(&cfg), path(&fixture("ghz"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn eval_is_seeded_and_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let json = dir.path().join(format!("{tag}.json"));
        let o = qrefine(&[
            "eval",
            "--family",
            "ghz",
            "--sizes",
            "4..8",
            "--kind",
            "ent",
            "--seed",
            "7",
            "--csv",
            path(&csv),
            "--json",
            path(&json),
        ]);
        assert_eq!(o.status.code(), Some(0));
        (
            stdout(&o),
            fs::read_to_string(csv).unwrap(),
            fs::read_to_string(json).unwrap(),
        )
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    assert_eq!(
        a.0,
        "| program | moving | adding+moving |\n|---|---|---|\n| ghz | 60.3% ± 25.8% | 94.8% ± 10.1% |\n"
    );
    assert!(a.1.starts_with("group,instance,mode,mutant,"));
    let agg: serde_json::Value = serde_json::from_str(&a.2).unwrap();
    assert_eq!(agg["groups"][0]["moving"]["count"], 21);
}

#[test]
fn eval_single_instance_and_inputs() {
    let o = qrefine(&["eval", "--family", "ghz", "--sizes", "4", "--kind", "ent"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("| ghz | "));

    let o = qrefine(&["eval", path(&fixture("uncompute"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("| uncompute | "));

    assert_eq!(qrefine(&["eval", "--sizes", "8..4"]).status.code(), Some(3));
}

#[test]
fn generate_families() {
    let o = qrefine(&["generate", "--family", "ghz", "--qubits", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("cx q[1], q[2];\nassert-ent q[0], q[4];\n"));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.qasm");
    let o = qrefine(&[
        "generate",
        "--family",
        "graph-state",
        "--qubits",
        "4",
        "--kind",
        "eq",
        "-o",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(qrefine(&["check", path(&out)]).status.code(), Some(0));

    let o = qrefine(&["generate", "--family", "dj-like", "--qubits", "5", "--kind", "ent"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("product state"));
}

#[test]
fn mutate_lists_mutants() {
    let o = qrefine(&["mutate", path(&fixture("ghz")), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let list = v.as_array().unwrap();
    assert!(!list.is_empty());
    assert!(list
        .iter()
        .any(|m| m["description"] == "`cx q[3], q[4];` -> `cx q[4], q[3];`"));
}
