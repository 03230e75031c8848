//! Instruction-indexed program representation.
//!
//! Every source statement becomes one [`Instruction`], except that whole-register
//! gate applications and measurements expand to one instruction per qubit.
//! Custom gates stay as single instructions; their bodies are inlined only to
//! compute acted qubits, synthesize matrices, and simulate.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gates::{unitarity_error, Builtin};
use crate::qasm::{
    Annotation, AssertionKind, AssertionStmt, BodyStmt, Expr, GateDef, QubitRef, SourceProgram, Statement,
};

/// Modulus below which a matrix entry counts as zero.
pub const DEFAULT_DIAGONAL_TOLERANCE: f64 = 1e-9;
/// Custom gates acting on more qubits than this are not synthesized.
pub const MATRIX_QUBIT_CAP: usize = 3;

pub type InstrId = u32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("gate `{0}` is defined recursively")]
    Recursion(String),
    #[error("gate `{0}` is not defined")]
    UnknownGate(String),
    #[error("instruction at line {line} synthesizes a non-unitary matrix (error {error:e})")]
    NonUnitary { line: usize, error: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstructionKind {
    NonFunctional,
    Unitary,
    MeasurementLike,
    Assertion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassTag {
    NonFunctional,
    Diagonal,
    AntiDiagonal,
    GeneralUnitary,
    MeasurementLike,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryClass {
    pub tag: ClassTag,
    /// Operator over the acted qubits in ascending order, lowest qubit as the
    /// least-significant bit. Present for unitaries on at most three qubits.
    pub matrix: Option<DMatrix<Complex64>>,
}

impl UnitaryClass {
    pub fn of(tag: ClassTag) -> Self {
        Self { tag, matrix: None }
    }

    pub fn is_diagonal_like(&self) -> bool {
        matches!(self.tag, ClassTag::Diagonal | ClassTag::AntiDiagonal)
    }
}

/// A builtin gate or reset on global qubits, after custom-gate inlining.
#[derive(Debug, Clone, PartialEq)]
pub enum Prim {
    Gate {
        gate: Builtin,
        values: Vec<f64>,
        qubits: Vec<usize>,
    },
    Reset(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub kind: AssertionKind,
    /// Global qubit indices; `qubits[0]` is the least-significant amplitude bit.
    pub qubits: Vec<usize>,
    pub amplitudes: Option<Vec<Complex64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    Version(String),
    Include(String),
    QReg {
        name: String,
        size: usize,
    },
    CReg {
        name: String,
        size: usize,
    },
    GateDef(String),
    Gate {
        name: String,
        params: Vec<Expr>,
        values: Vec<f64>,
        qubits: Vec<usize>,
    },
    Measure {
        qubit: usize,
        bit: (String, usize),
    },
    Reset {
        qubit: usize,
    },
    Barrier {
        qubits: Vec<usize>,
    },
    Assert(Assertion),
}

impl Op {
    pub fn is_declaration(&self) -> bool {
        matches!(
            self,
            Op::Version(_) | Op::Include(_) | Op::QReg { .. } | Op::CReg { .. } | Op::GateDef(_)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AddMethod {
    Interaction,
    Separation,
}

impl AddMethod {
    pub fn name(self) -> &'static str {
        match self {
            AddMethod::Interaction => "interaction",
            AddMethod::Separation => "separation",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instruction {
    /// Stable identity, preserved across movement and mutation.
    pub id: InstrId,
    pub op: Op,
    pub kind: InstructionKind,
    pub acted: BTreeSet<usize>,
    pub class: UnitaryClass,
    /// Inlined body; empty for everything except gates and resets.
    pub prims: Vec<Prim>,
    /// 1-based source line.
    pub origin: usize,
    pub added_by: Option<AddMethod>,
    /// Source line the assertion was moved away from, if it moved.
    pub moved_from: Option<usize>,
}

impl Instruction {
    pub fn assertion(&self) -> Option<&Assertion> {
        match &self.op {
            Op::Assert(a) => Some(a),
            _ => None,
        }
    }

    pub fn is_assertion(&self) -> bool {
        self.kind == InstructionKind::Assertion
    }

    /// Operands as written (gate operand order), for gates; acted set otherwise.
    pub fn operands(&self) -> Vec<usize> {
        match &self.op {
            Op::Gate { qubits, .. } => qubits.clone(),
            Op::Assert(a) => a.qubits.clone(),
            Op::Measure { qubit, .. } | Op::Reset { qubit } => vec![*qubit],
            Op::Barrier { qubits } => qubits.clone(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub offset: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatProgram {
    pub instructions: Vec<Instruction>,
    pub num_qubits: usize,
    pub qregs: Vec<Register>,
    pub gate_defs: BTreeMap<String, GateDef>,
    pub diagonal_tolerance: f64,
    next_id: InstrId,
    /// Source statements that do not print back from their instructions alone.
    expansions: Vec<Expansion>,
}

/// A source statement and the instructions it flattened into.
#[derive(Debug, Clone, PartialEq)]
struct Expansion {
    statement: Statement,
    members: Vec<(InstrId, Op)>,
}

/// Flattens with the default diagonality tolerance.
pub fn flatten(p: &SourceProgram) -> Result<FlatProgram, ModelError> {
    flatten_with(p, DEFAULT_DIAGONAL_TOLERANCE)
}

pub fn flatten_with(p: &SourceProgram, diagonal_tolerance: f64) -> Result<FlatProgram, ModelError> {
    let mut flat = FlatProgram {
        instructions: Vec::new(),
        num_qubits: 0,
        qregs: Vec::new(),
        gate_defs: BTreeMap::new(),
        diagonal_tolerance,
        next_id: 0,
        expansions: Vec::new(),
    };
    for (si, stmt) in p.statements.iter().enumerate() {
        let line = p.line_map.get(si).copied().unwrap_or(si + 1);
        let first = flat.instructions.len();
        match stmt {
            Statement::Version(v) => flat.push_plain(Op::Version(v.clone()), line),
            Statement::Include(f) => flat.push_plain(Op::Include(f.clone()), line),
            Statement::QReg { name, size } => {
                flat.qregs.push(Register {
                    name: name.clone(),
                    offset: flat.num_qubits,
                    size: *size,
                });
                flat.num_qubits += size;
                flat.push_plain(
                    Op::QReg {
                        name: name.clone(),
                        size: *size,
                    },
                    line,
                );
            }
            Statement::CReg { name, size } => flat.push_plain(
                Op::CReg {
                    name: name.clone(),
                    size: *size,
                },
                line,
            ),
            Statement::GateDef(def) => {
                flat.gate_defs.insert(def.name.clone(), def.clone());
                flat.push_plain(Op::GateDef(def.name.clone()), line);
            }
            Statement::Apply { gate, params, operands } => {
                let values: Vec<f64> = params.iter().map(|e| e.eval(&[]).unwrap_or(f64::NAN)).collect();
                for qubits in flat.broadcast(operands) {
                    let instr = flat.gate_instruction(gate, params.clone(), values.clone(), qubits, line)?;
                    flat.instructions.push(instr);
                }
            }
            Statement::Measure { qubit, bit } => {
                let qs = flat.resolve(qubit);
                for (k, q) in qs.into_iter().enumerate() {
                    let b = (bit.register.clone(), bit.index.unwrap_or(k));
                    flat.push_plain(Op::Measure { qubit: q, bit: b }, line);
                }
            }
            Statement::Reset(r) => {
                for q in flat.resolve(r) {
                    flat.push_plain(Op::Reset { qubit: q }, line);
                }
            }
            Statement::Barrier(refs) => {
                let qubits = refs.iter().flat_map(|r| flat.resolve(r)).collect();
                flat.push_plain(Op::Barrier { qubits }, line);
            }
            Statement::Assertion(a) => {
                let assertion = flat.resolve_assertion(a);
                flat.push_plain(Op::Assert(assertion), line);
            }
        }
        let members = &flat.instructions[first..];
        if !stmt.is_declaration() && !(members.len() == 1 && flat.statement_of(&members[0]) == *stmt) {
            let members = members.iter().map(|i| (i.id, i.op.clone())).collect();
            flat.expansions.push(Expansion {
                statement: stmt.clone(),
                members,
            });
        }
    }
    Ok(flat)
}

impl FlatProgram {
    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Indices of assertion instructions.
    pub fn assertions(&self) -> Vec<usize> {
        self.instructions
            .iter()
            .enumerate()
            .filter(|(_, i)| i.is_assertion())
            .map(|(k, _)| k)
            .collect()
    }

    pub fn position_of(&self, id: InstrId) -> Option<usize> {
        self.instructions.iter().position(|i| i.id == id)
    }

    pub fn fresh_id(&mut self) -> InstrId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    pub fn qubit_name(&self, q: usize) -> String {
        self.qubit_ref(q).to_string()
    }

    pub fn qubit_ref(&self, q: usize) -> QubitRef {
        self.qregs
            .iter()
            .find(|r| q >= r.offset && q < r.offset + r.size)
            .map(|r| QubitRef::indexed(r.name.clone(), q - r.offset))
            .unwrap_or_else(|| QubitRef::indexed("q", q))
    }

    fn register(&self, name: &str) -> Option<&Register> {
        self.qregs.iter().find(|r| r.name == name)
    }

    /// Global indices for a reference, whole registers in register order.
    pub fn resolve(&self, r: &QubitRef) -> Vec<usize> {
        let Some(reg) = self.register(&r.register) else {
            return Vec::new();
        };
        match r.index {
            Some(i) => vec![reg.offset + i],
            None => (reg.offset..reg.offset + reg.size).collect(),
        }
    }

    fn broadcast(&self, operands: &[QubitRef]) -> Vec<Vec<usize>> {
        let resolved: Vec<Vec<usize>> = operands.iter().map(|r| self.resolve(r)).collect();
        let width = operands
            .iter()
            .zip(&resolved)
            .filter(|(r, _)| r.index.is_none())
            .map(|(_, v)| v.len())
            .max()
            .unwrap_or(1);
        (0..width)
            .map(|k| {
                operands
                    .iter()
                    .zip(&resolved)
                    .map(|(r, v)| if r.index.is_some() { v[0] } else { v[k] })
                    .collect()
            })
            .collect()
    }

    fn resolve_assertion(&self, a: &AssertionStmt) -> Assertion {
        Assertion {
            kind: a.kind,
            qubits: a.targets.iter().flat_map(|r| self.resolve(r)).collect(),
            amplitudes: a.amplitudes.clone(),
        }
    }

    fn push_plain(&mut self, op: Op, line: usize) {
        let instr = self.plain_instruction(op, line);
        self.instructions.push(instr);
    }

    /// Builds a non-gate instruction (declaration, barrier, measurement, reset, assertion).
    pub fn plain_instruction(&mut self, op: Op, line: usize) -> Instruction {
        let (kind, acted, tag, prims) = match &op {
            Op::Measure { qubit, .. } => (
                InstructionKind::MeasurementLike,
                BTreeSet::from([*qubit]),
                ClassTag::MeasurementLike,
                Vec::new(),
            ),
            Op::Reset { qubit } => (
                InstructionKind::MeasurementLike,
                BTreeSet::from([*qubit]),
                ClassTag::MeasurementLike,
                vec![Prim::Reset(*qubit)],
            ),
            Op::Barrier { qubits } => (
                InstructionKind::NonFunctional,
                qubits.iter().copied().collect(),
                ClassTag::NonFunctional,
                Vec::new(),
            ),
            Op::Assert(a) => (
                InstructionKind::Assertion,
                a.qubits.iter().copied().collect(),
                ClassTag::NonFunctional,
                Vec::new(),
            ),
            _ => (
                InstructionKind::NonFunctional,
                BTreeSet::new(),
                ClassTag::NonFunctional,
                Vec::new(),
            ),
        };
        Instruction {
            id: self.fresh_id(),
            op,
            kind,
            acted,
            class: UnitaryClass::of(tag),
            prims,
            origin: line,
            added_by: None,
            moved_from: None,
        }
    }

    /// Builds a gate-application instruction: inlines the body, computes the acted
    /// qubits, and classifies the operator.
    pub fn gate_instruction(
        &mut self,
        name: &str,
        params: Vec<Expr>,
        values: Vec<f64>,
        qubits: Vec<usize>,
        line: usize,
    ) -> Result<Instruction, ModelError> {
        let mut prims = Vec::new();
        let mut stack = Vec::new();
        self.inline(name, &values, &qubits, &mut stack, &mut prims)?;
        let measuring = prims.iter().any(|p| matches!(p, Prim::Reset(_)));
        let acted: BTreeSet<usize> = prims
            .iter()
            .flat_map(|p| match p {
                Prim::Gate { qubits, .. } => qubits.clone(),
                Prim::Reset(q) => vec![*q],
            })
            .collect();
        let kind = if measuring {
            InstructionKind::MeasurementLike
        } else {
            InstructionKind::Unitary
        };
        let mut instr = Instruction {
            id: self.fresh_id(),
            op: Op::Gate {
                name: name.to_string(),
                params,
                values,
                qubits,
            },
            kind,
            acted,
            class: UnitaryClass::of(ClassTag::MeasurementLike),
            prims,
            origin: line,
            added_by: None,
            moved_from: None,
        };
        if kind == InstructionKind::Unitary {
            instr.class = classify_unitary(&instr, self.diagonal_tolerance);
            if let Some(m) = &instr.class.matrix {
                let error = unitarity_error(m);
                if error > self.diagonal_tolerance {
                    return Err(ModelError::NonUnitary { line, error });
                }
            }
        }
        Ok(instr)
    }

    fn inline(
        &self,
        name: &str,
        values: &[f64],
        qubits: &[usize],
        stack: &mut Vec<String>,
        out: &mut Vec<Prim>,
    ) -> Result<(), ModelError> {
        if let Some(b) = Builtin::from_name(name) {
            out.push(Prim::Gate {
                gate: b,
                values: values.to_vec(),
                qubits: qubits.to_vec(),
            });
            return Ok(());
        }
        if stack.iter().any(|s| s == name) {
            return Err(ModelError::Recursion(name.to_string()));
        }
        let def = self
            .gate_defs
            .get(name)
            .ok_or_else(|| ModelError::UnknownGate(name.to_string()))?;
        let bindings: Vec<(String, f64)> = def.params.iter().cloned().zip(values.iter().copied()).collect();
        let arg = |a: &String| -> usize {
            let k = def.args.iter().position(|x| x == a).unwrap_or(0);
            qubits[k]
        };
        stack.push(name.to_string());
        for stmt in &def.body {
            match stmt {
                BodyStmt::Apply { gate, params, args } => {
                    let vals: Vec<f64> = params.iter().map(|e| e.eval(&bindings).unwrap_or(f64::NAN)).collect();
                    let qs: Vec<usize> = args.iter().map(arg).collect();
                    self.inline(gate, &vals, &qs, stack, out)?;
                }
                BodyStmt::Reset(a) => out.push(Prim::Reset(arg(a))),
                BodyStmt::Barrier(_) => {}
            }
        }
        stack.pop();
        Ok(())
    }

    /// Rebuilds a gate instruction in place with new operands, keeping its id.
    pub fn regate(&mut self, index: usize, qubits: Vec<usize>) -> Result<(), ModelError> {
        let old = self.instructions[index].clone();
        let Op::Gate {
            name, params, values, ..
        } = old.op
        else {
            return Ok(());
        };
        let mut fresh = self.gate_instruction(&name, params, values, qubits, old.origin)?;
        self.next_id -= 1;
        fresh.id = old.id;
        fresh.added_by = old.added_by;
        fresh.moved_from = old.moved_from;
        self.instructions[index] = fresh;
        Ok(())
    }

    /// Program text form with declarations kept at the top. Added and moved
    /// assertions carry annotations. A whole-register statement prints as
    /// written while its instructions are still unchanged and adjacent.
    pub fn to_source(&self) -> SourceProgram {
        let mut order: Vec<&Instruction> = self.instructions.iter().filter(|i| i.op.is_declaration()).collect();
        order.extend(self.instructions.iter().filter(|i| !i.op.is_declaration()));
        let mut out = SourceProgram::default();
        let mut k = 0;
        while k < order.len() {
            let instr = order[k];
            let intact = self.expansions.iter().find(|e| {
                e.members.len() <= order.len() - k
                    && e.members
                        .iter()
                        .zip(&order[k..])
                        .all(|((id, op), i)| *id == i.id && *op == i.op)
            });
            let (statement, width) = match intact {
                Some(e) => (e.statement.clone(), e.members.len()),
                None => (self.statement_of(instr), 1),
            };
            out.statements.push(statement);
            out.line_map.push(out.statements.len());
            out.annotations.push(match (instr.added_by, instr.moved_from) {
                (Some(m), _) => Some(Annotation::AddedBy(m.name().to_string())),
                (None, Some(line)) => Some(Annotation::MovedFrom(line)),
                _ => None,
            });
            k += width.max(1);
        }
        out
    }

    pub fn statement_of(&self, instr: &Instruction) -> Statement {
        match &instr.op {
            Op::Version(v) => Statement::Version(v.clone()),
            Op::Include(f) => Statement::Include(f.clone()),
            Op::QReg { name, size } => Statement::QReg {
                name: name.clone(),
                size: *size,
            },
            Op::CReg { name, size } => Statement::CReg {
                name: name.clone(),
                size: *size,
            },
            Op::GateDef(name) => Statement::GateDef(self.gate_defs[name].clone()),
            Op::Gate {
                name, params, qubits, ..
            } => Statement::Apply {
                gate: name.clone(),
                params: params.clone(),
                operands: qubits.iter().map(|&q| self.qubit_ref(q)).collect(),
            },
            Op::Measure { qubit, bit } => Statement::Measure {
                qubit: self.qubit_ref(*qubit),
                bit: QubitRef::indexed(bit.0.clone(), bit.1),
            },
            Op::Reset { qubit } => Statement::Reset(self.qubit_ref(*qubit)),
            Op::Barrier { qubits } => Statement::Barrier(qubits.iter().map(|&q| self.qubit_ref(q)).collect()),
            Op::Assert(a) => Statement::Assertion(AssertionStmt {
                kind: a.kind,
                targets: a.qubits.iter().map(|&q| self.qubit_ref(q)).collect(),
                amplitudes: a.amplitudes.clone(),
            }),
        }
    }

    /// One-line text of an instruction.
    pub fn describe(&self, index: usize) -> String {
        crate::qasm::statement_text(&self.statement_of(&self.instructions[index]))
    }

    /// A new assertion instruction (not yet inserted).
    pub fn new_assertion(&mut self, assertion: Assertion, line: usize, method: AddMethod) -> Instruction {
        let mut instr = self.plain_instruction(Op::Assert(assertion), line);
        instr.added_by = Some(method);
        instr
    }
}

/// Classifies a unitary instruction from its synthesized operator.
pub fn classify_unitary(instr: &Instruction, tolerance: f64) -> UnitaryClass {
    match instr.kind {
        InstructionKind::Unitary => {}
        InstructionKind::MeasurementLike => return UnitaryClass::of(ClassTag::MeasurementLike),
        _ => return UnitaryClass::of(ClassTag::NonFunctional),
    }
    if instr.acted.len() > MATRIX_QUBIT_CAP {
        return UnitaryClass::of(ClassTag::GeneralUnitary);
    }
    let local: Vec<usize> = instr.acted.iter().copied().collect();
    let m = synthesize(&instr.prims, &local);
    let tag = if is_diagonal(&m, tolerance) {
        ClassTag::Diagonal
    } else if is_anti_diagonal(&m, tolerance) {
        ClassTag::AntiDiagonal
    } else {
        ClassTag::GeneralUnitary
    };
    UnitaryClass { tag, matrix: Some(m) }
}

/// Composes `prims` into a dense operator over `qubits` (ascending, first = LSB).
pub fn synthesize(prims: &[Prim], qubits: &[usize]) -> DMatrix<Complex64> {
    let dim = 1usize << qubits.len();
    let mut m = DMatrix::zeros(dim, dim);
    let local = |q: usize| qubits.iter().position(|&x| x == q).expect("prim outside acted set");
    for col in 0..dim {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[col] = Complex64::new(1.0, 0.0);
        for p in prims {
            if let Prim::Gate {
                gate,
                values,
                qubits: qs,
            } = p
            {
                let lq: Vec<usize> = qs.iter().map(|&q| local(q)).collect();
                crate::sim::apply_matrix(&mut v, &gate.matrix(values), &lq);
            }
        }
        for (row, a) in v.into_iter().enumerate() {
            m[(row, col)] = a;
        }
    }
    m
}

pub fn is_diagonal(m: &DMatrix<Complex64>, tol: f64) -> bool {
    let n = m.nrows();
    (0..n).all(|r| (0..n).all(|c| r == c || m[(r, c)].norm() < tol))
}

pub fn is_anti_diagonal(m: &DMatrix<Complex64>, tol: f64) -> bool {
    let n = m.nrows();
    (0..n).all(|r| (0..n).all(|c| r + c == n - 1 || m[(r, c)].norm() < tol))
}
