//! Single-qubit factor extraction for equality assertions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::{AddMethod, Assertion, FlatProgram, Instruction};
use crate::qasm::AssertionKind;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Result of the rank-1 test on one bit of a state vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BitFactor {
    /// Smaller singular value of the `2 × 2^(k−1)` grouping.
    pub sigma2: f64,
    /// Dominant left singular vector, phase-normalized.
    pub factor: [Complex64; 2],
}

fn row_pair(v: &[Complex64], bit: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let low = (1usize << bit) - 1;
    let half = v.len() / 2;
    let mut r0 = Vec::with_capacity(half);
    let mut r1 = Vec::with_capacity(half);
    for rest in 0..half {
        let i = (rest & low) | ((rest & !low) << 1);
        r0.push(v[i]);
        r1.push(v[i | 1 << bit]);
    }
    (r0, r1)
}

fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

/// Multiplies so the first component with modulus above `tol` is real and positive.
pub fn fix_phase(v: &mut [Complex64], tol: f64) {
    if let Some(lead) = v.iter().find(|z| z.norm() > tol) {
        let rot = lead.conj() / lead.norm();
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}

/// Rank-1 test for `bit` of `v`, via the closed-form eigenvectors of the 2×2 Gram matrix.
pub fn test_bit(v: &[Complex64], bit: usize, tol: f64) -> BitFactor {
    let (r0, r1) = row_pair(v, bit);
    let a = dot(&r0, &r0).re;
    let d = dot(&r1, &r1).re;
    let b = dot(&r0, &r1);
    let l1 = (a + d) / 2.0 + (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
    let mut u = if a >= d {
        [Complex64::new(l1 - d, 0.0), b.conj()]
    } else {
        [b, Complex64::new(l1 - a, 0.0)]
    };
    let n = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
    if n == 0.0 {
        u = [Complex64::new(1.0, 0.0), ZERO];
    } else {
        u = [u[0] / n, u[1] / n];
    }
    let w = [-u[1].conj(), u[0].conj()];
    let sigma2 = r0
        .iter()
        .zip(&r1)
        .map(|(x, y)| (w[0].conj() * x + w[1].conj() * y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    fix_phase(&mut u, tol);
    BitFactor { sigma2, factor: u }
}

/// `u† M` for the grouping on `bit`: the state of the remaining bits.
fn residual(v: &[Complex64], bit: usize, u: &[Complex64; 2]) -> Vec<Complex64> {
    let (r0, r1) = row_pair(v, bit);
    r0.iter()
        .zip(&r1)
        .map(|(x, y)| u[0].conj() * x + u[1].conj() * y)
        .collect()
}

fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-12 {
        r + 0.0
    } else {
        x
    }
}

fn tidy(z: Complex64) -> Complex64 {
    Complex64::new(snap(z.re), snap(z.im))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    /// Bit position in the original amplitude vector.
    pub position: usize,
    pub state: [Complex64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub positions: Vec<usize>,
    pub amplitudes: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub factors: Vec<Factor>,
    pub residual: Option<Residual>,
}

/// Greedy extraction of single-qubit factors, lowest bit first, re-testing the
/// residual after each extraction.
pub fn split(amps: &[Complex64], tol: f64) -> Split {
    let mut positions: Vec<usize> = (0..amps.len().trailing_zeros() as usize).collect();
    let mut v = amps.to_vec();
    let mut factors = Vec::new();
    let mut t = 0;
    while t < positions.len() {
        if positions.len() == 1 {
            let mut state = [v[0], v[1]];
            let n = (state[0].norm_sqr() + state[1].norm_sqr()).sqrt();
            state = [state[0] / n, state[1] / n];
            fix_phase(&mut state, tol);
            factors.push(Factor {
                position: positions[0],
                state: state.map(tidy),
            });
            positions.clear();
            break;
        }
        let f = test_bit(&v, t, tol);
        if f.sigma2 < tol {
            v = residual(&v, t, &f.factor);
            factors.push(Factor {
                position: positions.remove(t),
                state: f.factor.map(tidy),
            });
        } else {
            t += 1;
        }
    }
    factors.sort_by_key(|f| f.position);
    let residual = (!positions.is_empty()).then(|| {
        fix_phase(&mut v, tol);
        Residual {
            positions,
            amplitudes: v,
        }
    });
    Split { factors, residual }
}

/// Separable bit positions of `amps` with their single-qubit states.
pub fn separable_qubits(amps: &[Complex64], tol: f64) -> Vec<(usize, [Complex64; 2])> {
    split(amps, tol)
        .factors
        .into_iter()
        .map(|f| (f.position, f.state))
        .collect()
}

/// Re-tensors a split into a full amplitude vector.
pub fn reconstruct(s: &Split) -> Vec<Complex64> {
    let k = s.factors.len() + s.residual.as_ref().map_or(0, |r| r.positions.len());
    (0..1usize << k)
        .map(|i| {
            let mut z = Complex64::new(1.0, 0.0);
            for f in &s.factors {
                z *= f.state[i >> f.position & 1];
            }
            if let Some(r) = &s.residual {
                let local = r
                    .positions
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (t, &p)| acc | ((i >> p & 1) << t));
                z *= r.amplitudes[local];
            }
            z
        })
        .collect()
}

/// Largest entrywise difference between `a` and `b` after aligning global phase.
pub fn phase_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    let rot = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.iter().zip(b).map(|(x, y)| (x - y * rot).norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilitySplit {
    /// Input-program index of the equality assertion.
    pub source_assertion: usize,
    pub assertion: String,
    /// `(target position, global qubit, state)` per extracted qubit.
    pub separable_qubits: Vec<(usize, usize, [Complex64; 2])>,
    pub residual: Option<Residual>,
    pub added: Vec<String>,
    pub dropped_original: bool,
}

fn same_assertion(a: &Assertion, b: &Assertion) -> bool {
    a.kind == b.kind
        && a.qubits == b.qubits
        && match (&a.amplitudes, &b.amplitudes) {
            (Some(x), Some(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| (p - q).norm() < 1e-12),
            (None, None) => true,
            _ => false,
        }
}

/// Inserts `assert-eq q { a, b }` above each equality assertion (≥ 2 targets)
/// for every separable target qubit. With `drop_subsumed`, a fully separable
/// original is removed.
pub fn refine_equality(p: &FlatProgram, tol: f64, drop_subsumed: bool) -> (FlatProgram, Vec<SeparabilitySplit>) {
    let mut out = p.clone();
    let mut splits = Vec::new();
    let mut instructions: Vec<Instruction> = Vec::with_capacity(p.len());
    for (src, instr) in p.instructions.iter().enumerate() {
        let Some(a) = instr.assertion() else {
            instructions.push(instr.clone());
            continue;
        };
        if a.kind != AssertionKind::Equality || a.qubits.len() < 2 {
            instructions.push(instr.clone());
            continue;
        }
        let s = split(a.amplitudes.as_deref().unwrap_or(&[]), tol);
        if s.factors.is_empty() {
            instructions.push(instr.clone());
            continue;
        }
        let mut record = SeparabilitySplit {
            source_assertion: src,
            assertion: p.describe(src),
            separable_qubits: s
                .factors
                .iter()
                .map(|f| (f.position, a.qubits[f.position], f.state))
                .collect(),
            residual: s.residual.clone(),
            added: Vec::new(),
            dropped_original: false,
        };
        let run_start = instructions
            .iter()
            .rposition(|i| !i.is_assertion())
            .map_or(0, |k| k + 1);
        for f in &s.factors {
            let new = Assertion {
                kind: AssertionKind::Equality,
                qubits: vec![a.qubits[f.position]],
                amplitudes: Some(f.state.to_vec()),
            };
            let present = instructions[run_start..]
                .iter()
                .filter_map(Instruction::assertion)
                .any(|x| same_assertion(x, &new));
            if present {
                continue;
            }
            let added = out.new_assertion(new, instr.origin, AddMethod::Separation);
            record
                .added
                .push(crate::qasm::statement_text(&out.statement_of(&added)));
            instructions.push(added);
        }
        if drop_subsumed && s.residual.is_none() {
            record.dropped_original = true;
        } else {
            instructions.push(instr.clone());
        }
        splits.push(record);
    }
    out.instructions = instructions;
    (out, splits)
}
