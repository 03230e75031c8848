//! Commutation rules and assertion hoisting.

use serde::{Deserialize, Serialize};

use crate::model::{Assertion, FlatProgram, InstrId, Instruction, InstructionKind, Op};
use crate::qasm::AssertionKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Non-functional instruction.
    NonFunctional,
    /// No shared qubits.
    Disjoint,
    /// Diagonal or anti-diagonal operator, superposition assertions only.
    Diagonal,
    /// Single-qubit operator, entanglement assertions only.
    SingleQubit,
    /// Another assertion.
    Observation,
}

impl Rule {
    /// Rule number, 0 for the assertion/assertion case.
    pub fn number(self) -> u8 {
        match self {
            Rule::NonFunctional => 1,
            Rule::Disjoint => 2,
            Rule::Diagonal => 3,
            Rule::SingleQubit => 4,
            Rule::Observation => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Yes(Rule),
    No,
}

/// Whether `assertion` may be swapped above its predecessor `instr`.
pub fn commutes(assertion: &Assertion, instr: &Instruction) -> Decision {
    if instr.kind == InstructionKind::Assertion {
        return Decision::Yes(Rule::Observation);
    }
    if instr.kind == InstructionKind::MeasurementLike {
        return Decision::No;
    }
    if instr.kind == InstructionKind::NonFunctional {
        return Decision::Yes(Rule::NonFunctional);
    }
    if assertion.qubits.iter().all(|q| !instr.acted.contains(q)) {
        return Decision::Yes(Rule::Disjoint);
    }
    if assertion.kind == AssertionKind::Superposition && instr.class.is_diagonal_like() {
        return Decision::Yes(Rule::Diagonal);
    }
    if assertion.kind == AssertionKind::Entanglement && instr.acted.len() == 1 {
        return Decision::Yes(Rule::SingleQubit);
    }
    Decision::No
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveRecord {
    #[serde(skip)]
    pub id: InstrId,
    pub assertion: String,
    /// Index in the input program.
    pub before: usize,
    /// Index in the output program.
    pub after: usize,
    /// Output index of the first non-commuting instruction above, if any.
    pub blocked_by: Option<usize>,
    pub rules_fired: Vec<Rule>,
}

impl MoveRecord {
    pub fn moved(&self) -> bool {
        self.rules_fired.iter().any(|r| *r != Rule::Observation)
    }
}

/// Number of non-assertion instructions above `index`.
pub fn gap(p: &FlatProgram, index: usize) -> usize {
    p.instructions[..index].iter().filter(|i| !i.is_assertion()).count()
}

/// Hoists every assertion, in input order, above each consecutive commuting
/// predecessor. Assertions meeting in the same gap keep their input order.
pub fn move_all(p: &FlatProgram) -> (FlatProgram, Vec<MoveRecord>) {
    let mut out = p.clone();
    let order: Vec<(usize, InstrId)> = p
        .instructions
        .iter()
        .enumerate()
        .filter(|(_, i)| i.is_assertion())
        .map(|(k, i)| (k, i.id))
        .collect();
    let mut pending = Vec::new();
    for (before, id) in order {
        let pos = out.position_of(id).expect("assertion vanished");
        let Op::Assert(a) = &out.instructions[pos].op else {
            unreachable!()
        };
        let mut j = pos;
        let mut rules = Vec::new();
        while j > 0 {
            match commutes(a, &out.instructions[j - 1]) {
                Decision::Yes(r) => {
                    rules.push(r);
                    j -= 1;
                }
                Decision::No => break,
            }
        }
        let blocker = (j > 0).then(|| out.instructions[j - 1].id);
        while j < pos && out.instructions[j].is_assertion() {
            j += 1;
            rules.pop();
        }
        let mut instr = out.instructions.remove(pos);
        let crossed_code = out.instructions[j..pos]
            .iter()
            .any(|i| !i.is_assertion() && !i.op.is_declaration());
        if crossed_code && instr.moved_from.is_none() && instr.added_by.is_none() {
            instr.moved_from = Some(instr.origin);
        }
        out.instructions.insert(j, instr);
        pending.push((id, before, blocker, rules));
    }
    let records = pending
        .into_iter()
        .map(|(id, before, blocker, rules_fired)| {
            let after = out.position_of(id).unwrap();
            MoveRecord {
                id,
                assertion: out.describe(after),
                before,
                after,
                blocked_by: blocker.and_then(|b| out.position_of(b)),
                rules_fired,
            }
        })
        .collect();
    (out, records)
}
