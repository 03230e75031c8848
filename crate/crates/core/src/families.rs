//! Parametric benchmark programs with trailing assertions.
//!
//! * `ghz`: `h q[0]`, a cx spine through `q[0]`, the odd qubits and `q[n-1]`,
//!   then one cx per remaining even qubit from its odd predecessor.
//! * `graph-state`: `h` on all qubits, then cz on `(0,1)`, `(0,n-1)` and the path
//!   `0, 2, 3, …, n-2`.
//! * `dj-like`: Deutsch–Jozsa with a balanced parity oracle on the even inputs;
//!   the last qubit is the ancilla. The final state is a product state.
//! * `qft-like`: a Bell pair on `q[0], q[1]` followed by a swap-free QFT built
//!   from a custom `cu1` gate.

use std::fmt::Write;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::pipeline::{load, Error};
use crate::qasm::{complex_text, parse, AssertionKind, SourceProgram};
use crate::sim::{correlation, final_state};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "ghz")]
    Ghz,
    #[serde(rename = "graph-state")]
    GraphState,
    #[serde(rename = "dj-like")]
    DjLike,
    #[serde(rename = "qft-like")]
    QftLike,
}

pub const ALL_FAMILIES: [Family; 4] = [Family::Ghz, Family::GraphState, Family::DjLike, Family::QftLike];

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Ghz => "ghz",
            Family::GraphState => "graph-state",
            Family::DjLike => "dj-like",
            Family::QftLike => "qft-like",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ALL_FAMILIES
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family `{s}` (expected ghz, graph-state, dj-like, qft-like)"))
    }
}

pub const MIN_QUBITS: usize = 3;
pub const MAX_QUBITS: usize = 16;

fn circuit(family: Family, n: usize) -> String {
    let mut s = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    if family == Family::QftLike {
        s.push_str(
            "gate cu1(lambda) a, b { u1(lambda / 2) a; cx a, b; u1(-lambda / 2) b; cx a, b; u1(lambda / 2) b; }\n",
        );
    }
    let _ = writeln!(s, "qreg q[{n}];");
    match family {
        Family::Ghz => {
            let mut spine = vec![0];
            spine.extend((1..n).filter(|q| q % 2 == 1));
            if (n - 1).is_multiple_of(2) {
                spine.push(n - 1);
            }
            s.push_str("h q[0];\n");
            for w in spine.windows(2) {
                let _ = writeln!(s, "cx q[{}], q[{}];", w[0], w[1]);
            }
            for leaf in (2..n - 1).filter(|q| q % 2 == 0) {
                let _ = writeln!(s, "cx q[{}], q[{leaf}];", leaf - 1);
            }
        }
        Family::GraphState => {
            s.push_str("h q;\n");
            let _ = writeln!(s, "cz q[0], q[1];\ncz q[0], q[{}];", n - 1);
            let mut path = vec![0];
            path.extend(2..n - 1);
            for w in path.windows(2) {
                let _ = writeln!(s, "cz q[{}], q[{}];", w[0], w[1]);
            }
        }
        Family::DjLike => {
            let anc = n - 1;
            let _ = writeln!(s, "x q[{anc}];");
            s.push_str("h q;\n");
            for i in (0..anc).step_by(2) {
                let _ = writeln!(s, "cx q[{i}], q[{anc}];");
            }
            for i in 0..anc {
                let _ = writeln!(s, "h q[{i}];");
            }
        }
        Family::QftLike => {
            s.push_str("h q[0];\ncx q[0], q[1];\n");
            for j in 0..n {
                let _ = writeln!(s, "h q[{j}];");
                for k in j + 1..n {
                    let _ = writeln!(s, "cu1(pi / {}) q[{k}], q[{j}];", 1u64 << (k - j));
                }
            }
        }
    }
    s
}

fn tidy(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        0.0
    } else {
        x
    }
}

/// Pair probed for the entanglement assertion before falling back to a scan.
fn preferred_pair(family: Family, n: usize) -> (usize, usize) {
    match family {
        Family::Ghz => (0, n - 1),
        Family::GraphState => (1, n - 1),
        Family::DjLike | Family::QftLike => (0, 1),
    }
}

/// A correct `n`-qubit program of the family ending in one assertion of `kind`.
/// Equality amplitudes are the simulated final state over `q`.
pub fn generate(family: Family, n: usize, kind: AssertionKind) -> Result<SourceProgram, Error> {
    Ok(parse(&generate_text(family, n, kind)?)?)
}

pub fn generate_text(family: Family, n: usize, kind: AssertionKind) -> Result<String, Error> {
    if !(MIN_QUBITS..=MAX_QUBITS).contains(&n) {
        return Err(Error::Generate(format!(
            "{family} needs between {MIN_QUBITS} and {MAX_QUBITS} qubits, got {n}"
        )));
    }
    let mut text = circuit(family, n);
    let cfg = Config::default();
    let state = final_state(&load(&text, &cfg)?, &cfg)?;
    match kind {
        AssertionKind::Equality => {
            let amps: Vec<String> = state
                .amplitudes
                .iter()
                .map(|z| complex_text(Complex64::new(tidy(z.re), tidy(z.im))))
                .collect();
            let _ = writeln!(text, "assert-eq q {{ {} }}", amps.join(", "));
        }
        AssertionKind::Entanglement => {
            let correlated = |(a, b): (usize, usize)| correlation(&state, a, b) > cfg.entanglement_threshold;
            let pair = std::iter::once(preferred_pair(family, n))
                .chain((0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))))
                .find(|&p| correlated(p))
                .ok_or_else(|| {
                    Error::Generate(format!(
                        "{family}({n}) ends in a product state; no entanglement assertion can hold"
                    ))
                })?;
            let _ = writeln!(text, "assert-ent q[{}], q[{}];", pair.0, pair.1);
        }
        AssertionKind::Superposition => {
            let _ = writeln!(text, "assert-sup q;");
        }
    }
    Ok(text)
}
