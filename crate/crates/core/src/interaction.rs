//! Interaction-graph refinement of two-qubit entanglement assertions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{AddMethod, Assertion, FlatProgram, Instruction, InstructionKind};
use crate::qasm::AssertionKind;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionGraph {
    pub num_qubits: usize,
    /// Unordered pair `(low, high)` → index of the first instruction coupling it.
    pub edges: BTreeMap<(usize, usize), usize>,
}

impl InteractionGraph {
    pub fn label(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn neighbors(&self, q: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.keys().filter_map(move |&(a, b)| {
            if a == q {
                Some(b)
            } else if b == q {
                Some(a)
            } else {
                None
            }
        })
    }

    /// Simple paths from `from` to `to`, stopping once `limit` are found.
    pub fn simple_paths(&self, from: usize, to: usize, limit: usize) -> Vec<Vec<usize>> {
        let mut found = Vec::new();
        let mut path = vec![from];
        let mut on_path = vec![false; self.num_qubits.max(from.max(to) + 1)];
        on_path[from] = true;
        self.dfs(to, limit, &mut path, &mut on_path, &mut found);
        found
    }

    fn dfs(&self, to: usize, limit: usize, path: &mut Vec<usize>, on_path: &mut [bool], found: &mut Vec<Vec<usize>>) {
        let here = *path.last().unwrap();
        if here == to {
            found.push(path.clone());
            return;
        }
        let next: Vec<usize> = self.neighbors(here).collect();
        for n in next {
            if found.len() >= limit {
                return;
            }
            if on_path[n] {
                continue;
            }
            on_path[n] = true;
            path.push(n);
            self.dfs(to, limit, path, on_path, found);
            path.pop();
            on_path[n] = false;
        }
    }
}

/// Graph over the multi-qubit unitaries strictly before `upto`.
pub fn build_graph(p: &FlatProgram, upto: usize) -> InteractionGraph {
    let mut g = InteractionGraph {
        num_qubits: p.num_qubits,
        edges: BTreeMap::new(),
    };
    for (index, instr) in p.instructions[..upto.min(p.len())].iter().enumerate() {
        if instr.kind != InstructionKind::Unitary || instr.acted.len() < 2 {
            continue;
        }
        let qs: Vec<usize> = instr.acted.iter().copied().collect();
        for (i, &a) in qs.iter().enumerate() {
            for &b in &qs[i + 1..] {
                g.edges.entry((a, b)).or_insert(index);
            }
        }
    }
    g
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AddedAssertion {
    pub kind: AssertionKind,
    pub targets: (usize, usize),
    pub text: String,
    /// Input-program index of the edge-creating instruction.
    pub insert_after: usize,
    /// Input-program index of the assertion being refined.
    pub provenance: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Skip {
    NotTwoTargets,
    NoPath,
    MultiplePaths,
    DirectEdge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionNote {
    pub assertion: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<Skip>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InteractionReport {
    pub added: Vec<AddedAssertion>,
    pub notes: Vec<InteractionNote>,
}

fn same_pair(a: &Assertion, pair: (usize, usize)) -> bool {
    a.kind == AssertionKind::Entanglement
        && a.qubits.len() == 2
        && ((a.qubits[0], a.qubits[1]) == pair || (a.qubits[1], a.qubits[0]) == pair)
}

/// Adds `assert-ent` on each adjacent pair of the unique simple path between the
/// two targets of every two-qubit entanglement assertion, right after the
/// instruction that first coupled the pair. Pairs whose insertion point has no
/// non-assertion instruction before the source assertion are left out, as are
/// duplicates of assertions already in place.
pub fn refine_entanglement(p: &FlatProgram) -> (FlatProgram, InteractionReport) {
    let mut report = InteractionReport::default();
    let mut inserts: Vec<(usize, Instruction)> = Vec::new();
    let mut out = p.clone();
    for (src, instr) in p.instructions.iter().enumerate() {
        let Some(a) = instr.assertion() else { continue };
        if a.kind != AssertionKind::Entanglement {
            continue;
        }
        let mut note = InteractionNote {
            assertion: src,
            path: None,
            skipped: None,
        };
        if a.qubits.len() != 2 {
            note.skipped = Some(Skip::NotTwoTargets);
            report.notes.push(note);
            continue;
        }
        let g = build_graph(p, src);
        let paths = g.simple_paths(a.qubits[0], a.qubits[1], 2);
        match paths.len() {
            0 => note.skipped = Some(Skip::NoPath),
            1 if paths[0].len() == 2 => note.skipped = Some(Skip::DirectEdge),
            1 => {}
            _ => note.skipped = Some(Skip::MultiplePaths),
        }
        if note.skipped.is_some() {
            report.notes.push(note);
            continue;
        }
        let path = paths.into_iter().next().unwrap();
        for w in path.windows(2) {
            let pair = (w[0], w[1]);
            let at = g.label(pair.0, pair.1).expect("path edge without label");
            let observes_new_state = p.instructions[at + 1..src].iter().any(|i| !i.is_assertion());
            if !observes_new_state {
                continue;
            }
            let present = p.instructions[at + 1..]
                .iter()
                .take_while(|i| i.is_assertion())
                .filter_map(Instruction::assertion)
                .any(|x| same_pair(x, pair))
                || inserts
                    .iter()
                    .any(|(k, i)| *k == at && same_pair(i.assertion().unwrap(), pair));
            if present {
                continue;
            }
            let new = out.new_assertion(
                Assertion {
                    kind: AssertionKind::Entanglement,
                    qubits: vec![pair.0, pair.1],
                    amplitudes: None,
                },
                p.instructions[at].origin,
                AddMethod::Interaction,
            );
            report.added.push(AddedAssertion {
                kind: AssertionKind::Entanglement,
                targets: pair,
                text: String::new(),
                insert_after: at,
                provenance: src,
            });
            inserts.push((at, new));
        }
        note.path = Some(path);
        report.notes.push(note);
    }
    let mut instructions = Vec::with_capacity(p.len() + inserts.len());
    for (k, instr) in p.instructions.iter().enumerate() {
        instructions.push(instr.clone());
        instructions.extend(inserts.iter().filter(|(at, _)| *at == k).map(|(_, i)| i.clone()));
    }
    out.instructions = instructions;
    for added in &mut report.added {
        added.text = format!(
            "assert-ent {}, {};",
            out.qubit_name(added.targets.0),
            out.qubit_name(added.targets.1)
        );
    }
    (out, report)
}
