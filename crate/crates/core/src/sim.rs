//! Dense statevector simulation and assertion verdicts.
//!
//! Qubit `q` is bit `q` of the basis-state index. Reduced density matrices over a
//! target list use the same convention as equality amplitudes: `targets[0]` is
//! the least-significant bit.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Config, EntanglementCriterion};
use crate::model::{Assertion, FlatProgram, InstrId, Op, Prim};
use crate::qasm::AssertionKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("program has {qubits} qubits, simulator cap is {cap}")]
    QubitCap { qubits: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub amplitudes: Vec<Complex64>,
    pub num_qubits: usize,
}

/// Applies a `2^k`-dimensional operator to the listed qubits of `v`, with
/// `qubits[0]` as the operator's least-significant bit.
pub fn apply_matrix(v: &mut [Complex64], m: &DMatrix<Complex64>, qubits: &[usize]) {
    let k = qubits.len();
    let dim = 1usize << k;
    let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
    let offsets: Vec<usize> = (0..dim)
        .map(|local| {
            (0..k)
                .filter(|&t| local >> t & 1 == 1)
                .map(|t| 1usize << qubits[t])
                .sum()
        })
        .collect();
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    for base in 0..v.len() {
        if base & mask != 0 {
            continue;
        }
        for (local, off) in offsets.iter().enumerate() {
            buf[local] = v[base | off];
        }
        for (row, off) in offsets.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (col, b) in buf.iter().enumerate() {
                acc += m[(row, col)] * b;
            }
            v[base | off] = acc;
        }
    }
}

impl QuantumState {
    pub fn zero(num_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self { amplitudes, num_qubits }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply(&mut self, m: &DMatrix<Complex64>, qubits: &[usize]) {
        apply_matrix(&mut self.amplitudes, m, qubits);
    }

    pub fn probability_one(&self, q: usize) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i >> q & 1 == 1)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projective measurement of `q` in the computational basis.
    pub fn measure(&mut self, q: usize, rng: &mut impl Rng) -> bool {
        let p1 = self.probability_one(q);
        let outcome = rng.gen::<f64>() < p1;
        let keep = if outcome { p1 } else { 1.0 - p1 };
        let scale = 1.0 / keep.sqrt();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if (i >> q & 1 == 1) == outcome {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        outcome
    }

    pub fn reset(&mut self, q: usize, rng: &mut impl Rng) {
        if self.measure(q, rng) {
            let bit = 1usize << q;
            for i in 0..self.amplitudes.len() {
                if i & bit == 0 {
                    self.amplitudes.swap(i, i | bit);
                }
            }
        }
    }

    pub fn apply_prims(&mut self, prims: &[Prim], rng: &mut impl Rng) {
        for p in prims {
            match p {
                Prim::Gate { gate, values, qubits } => self.apply(&gate.matrix(values), qubits),
                Prim::Reset(q) => self.reset(*q, rng),
            }
        }
    }

    /// Reduced density matrix over `targets` (first target = least-significant bit).
    pub fn reduced_density(&self, targets: &[usize]) -> DMatrix<Complex64> {
        let k = targets.len();
        let rest_qubits: Vec<usize> = (0..self.num_qubits).filter(|q| !targets.contains(q)).collect();
        let mut m = DMatrix::zeros(1 << k, 1 << (self.num_qubits - k));
        for (i, a) in self.amplitudes.iter().enumerate() {
            let local = targets
                .iter()
                .enumerate()
                .fold(0, |acc, (t, &q)| acc | ((i >> q & 1) << t));
            let rest = rest_qubits
                .iter()
                .enumerate()
                .fold(0, |acc, (t, &q)| acc | ((i >> q & 1) << t));
            m[(local, rest)] = *a;
        }
        &m * m.adjoint()
    }
}

/// `|⟨a|b⟩|²`.
pub fn state_fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Number of populated diagonal entries of ρ_T.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support: Option<usize>,
    /// Smallest pairwise `‖ρ_ab − ρ_a ⊗ ρ_b‖_F`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlation: Option<f64>,
    /// Largest pairwise negativity (minus the smallest partial-transpose eigenvalue).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub negativity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub assertion_index: usize,
    #[serde(skip)]
    pub id: InstrId,
    pub line: usize,
    pub kind: AssertionKind,
    pub outcome: Outcome,
    pub diagnostics: Diagnostics,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }
}

fn outcome(pass: bool) -> Outcome {
    if pass {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

pub fn check_superposition(state: &QuantumState, targets: &[usize], cfg: &Config) -> (Outcome, Diagnostics) {
    let rho = state.reduced_density(targets);
    let support = (0..rho.nrows())
        .filter(|&i| rho[(i, i)].re > cfg.superposition_threshold)
        .count();
    (
        outcome(support >= 2),
        Diagnostics {
            support: Some(support),
            ..Diagnostics::default()
        },
    )
}

/// `‖ρ_ab − ρ_a ⊗ ρ_b‖_F` for one pair.
pub fn correlation(state: &QuantumState, a: usize, b: usize) -> f64 {
    let rho_ab = state.reduced_density(&[a, b]);
    let rho_a = state.reduced_density(&[a]);
    let rho_b = state.reduced_density(&[b]);
    (rho_ab - rho_b.kronecker(&rho_a)).norm()
}

/// Minus the smallest eigenvalue of the partial transpose of ρ_ab (on `b`).
pub fn negativity(state: &QuantumState, a: usize, b: usize) -> f64 {
    let rho = state.reduced_density(&[a, b]);
    let mut pt = DMatrix::zeros(4, 4);
    for r in 0..4 {
        for c in 0..4 {
            let (ra, rb, ca, cb) = (r & 1, r >> 1, c & 1, c >> 1);
            pt[(ra | cb << 1, ca | rb << 1)] = rho[(r, c)];
        }
    }
    let min = pt.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    -min
}

pub fn check_entanglement(state: &QuantumState, targets: &[usize], cfg: &Config) -> (Outcome, Diagnostics) {
    let mut pass = true;
    let mut diag = Diagnostics::default();
    for (i, &a) in targets.iter().enumerate() {
        for &b in &targets[i + 1..] {
            match cfg.entanglement_criterion {
                EntanglementCriterion::Correlation => {
                    let v = correlation(state, a, b);
                    pass &= v > cfg.entanglement_threshold;
                    diag.correlation = Some(diag.correlation.map_or(v, |m: f64| m.min(v)));
                }
                EntanglementCriterion::Ppt => {
                    let v = negativity(state, a, b);
                    pass &= v > cfg.entanglement_threshold;
                    diag.negativity = Some(diag.negativity.map_or(v, |m: f64| m.min(v)));
                }
            }
        }
    }
    (outcome(pass), diag)
}

pub fn check_equality(
    state: &QuantumState,
    targets: &[usize],
    amps: &[Complex64],
    cfg: &Config,
) -> (Outcome, Diagnostics) {
    let rho = state.reduced_density(targets);
    let mut f = Complex64::new(0.0, 0.0);
    for r in 0..amps.len() {
        for c in 0..amps.len() {
            f += amps[r].conj() * rho[(r, c)] * amps[c];
        }
    }
    (
        outcome(f.re >= 1.0 - cfg.equality_epsilon),
        Diagnostics {
            fidelity: Some(f.re),
            ..Diagnostics::default()
        },
    )
}

pub fn check(state: &QuantumState, a: &Assertion, cfg: &Config) -> (Outcome, Diagnostics) {
    match a.kind {
        AssertionKind::Superposition => check_superposition(state, &a.qubits, cfg),
        AssertionKind::Entanglement => check_entanglement(state, &a.qubits, cfg),
        AssertionKind::Equality => check_equality(state, &a.qubits, a.amplitudes.as_deref().unwrap_or(&[]), cfg),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub verdicts: Vec<Verdict>,
    pub final_state: QuantumState,
}

impl Run {
    pub fn first_failure(&self) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| !v.passed())
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(Verdict::passed)
    }
}

/// Runs the program from `|0…0⟩`, producing one verdict per assertion in
/// program order. Measurements and resets sample from a ChaCha8 stream seeded
/// with `cfg.seed`.
pub fn simulate(p: &FlatProgram, cfg: &Config) -> Result<Run, SimError> {
    if p.num_qubits > cfg.qubit_cap {
        return Err(SimError::QubitCap {
            qubits: p.num_qubits,
            cap: cfg.qubit_cap,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = QuantumState::zero(p.num_qubits);
    let mut verdicts = Vec::new();
    for (index, instr) in p.instructions.iter().enumerate() {
        match &instr.op {
            Op::Gate { .. } | Op::Reset { .. } => state.apply_prims(&instr.prims, &mut rng),
            Op::Measure { qubit, .. } => {
                state.measure(*qubit, &mut rng);
            }
            Op::Assert(a) => {
                let (outcome, diagnostics) = check(&state, a, cfg);
                verdicts.push(Verdict {
                    assertion_index: index,
                    id: instr.id,
                    line: instr.origin,
                    kind: a.kind,
                    outcome,
                    diagnostics,
                });
            }
            _ => {}
        }
    }
    Ok(Run {
        verdicts,
        final_state: state,
    })
}

pub fn final_state(p: &FlatProgram, cfg: &Config) -> Result<QuantumState, SimError> {
    simulate(p, cfg).map(|r| r.final_state)
}
