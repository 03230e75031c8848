#![allow(dead_code)]

//! Seeded random programs and states shared by the integration tests.

use std::f64::consts::PI;
use std::fmt::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qrefine_core::gates::{Builtin, ALL_BUILTINS};
use qrefine_core::sim::{final_state, QuantumState};
use qrefine_core::{load, Config, FlatProgram};

pub const FIXTURES: [&str; 7] = [
    "bell",
    "cccx",
    "cccx_correct",
    "ghz",
    "ghz_mutant",
    "uncompute",
    "uncompute_mutant",
];

pub fn fixture(name: &str) -> String {
    let path = format!("{}/tests/fixtures/{name}.qasm", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn flat(text: &str) -> FlatProgram {
    load(text, &Config::default()).unwrap_or_else(|e| panic!("{e}\n{text}"))
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_qubits: usize,
    /// Upper bound on flattened body instructions (declarations excluded).
    pub max_instructions: usize,
    pub measurements: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            max_qubits: 8,
            max_instructions: 60,
            measurements: true,
        }
    }
}

struct Reg {
    name: &'static str,
    offset: usize,
    size: usize,
}

struct CustomGate {
    name: &'static str,
    params: usize,
    arity: usize,
}

fn angle(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..4) {
        0 => format!("{:.6}", rng.gen_range(-2.0 * PI..2.0 * PI)),
        1 => format!("pi / {}", [1, 2, 3, 4, 8][rng.gen_range(0..5)]),
        2 => format!("-pi / {}", [2, 4, 8][rng.gen_range(0..3)]),
        _ => format!("{:.3} * pi", rng.gen_range(-1.0..1.0)),
    }
}

fn pick_distinct(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    rand::seq::index::sample(rng, n, k).into_vec()
}

fn custom_gate(rng: &mut ChaCha8Rng, name: &'static str) -> (String, CustomGate) {
    let arity = rng.gen_range(1..=4);
    let params = rng.gen_range(0..=1);
    let formals: Vec<String> = (0..arity).map(|i| format!("a{i}")).collect();
    let mut body = Vec::new();
    for _ in 0..rng.gen_range(1..=4) {
        let fitting: Vec<Builtin> = ALL_BUILTINS
            .iter()
            .copied()
            .filter(|g| g.num_qubits() <= arity)
            .collect();
        let g = *fitting.choose(rng).unwrap();
        let qs = pick_distinct(rng, arity, g.num_qubits());
        let args: Vec<String> = (0..g.num_params())
            .map(|_| {
                if params == 1 && rng.gen_bool(0.5) {
                    "theta / 2".to_string()
                } else {
                    angle(rng)
                }
            })
            .collect();
        let ps = if args.is_empty() {
            String::new()
        } else {
            format!("({})", args.join(", "))
        };
        let ops: Vec<&str> = qs.iter().map(|&q| formals[q].as_str()).collect();
        body.push(format!("{}{ps} {};", g.name(), ops.join(", ")));
    }
    let ps = if params == 1 { "(theta)" } else { "" };
    let text = format!("gate {name}{ps} {} {{ {} }}", formals.join(", "), body.join(" "));
    (text, CustomGate { name, params, arity })
}

/// Dominant eigenvector of a Hermitian matrix.
pub fn dominant_eigenvector(rho: &DMatrix<Complex64>) -> Vec<Complex64> {
    let eig = rho.clone().symmetric_eigen();
    let (best, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    eig.eigenvectors.column(best).iter().copied().collect()
}

fn amplitude_text(z: Complex64) -> String {
    qrefine_core::qasm::complex_text(z)
}

/// A well-formed program in the supported grammar, deterministic in `seed`.
///
/// Equality assertions either claim the dominant eigenvector of the targets'
/// reduced state at that point (so they pass whenever it is pure) or a random
/// basis state.
pub fn random_program(seed: u64, shape: Shape) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = Config {
        seed,
        ..Config::default()
    };
    let n = rng.gen_range(1..=shape.max_qubits);
    let names = ["q", "anc", "t"];
    let mut regs = Vec::new();
    let mut left = n;
    let mut offset = 0;
    while left > 0 {
        let size = if regs.len() == names.len() - 1 {
            left
        } else {
            rng.gen_range(1..=left)
        };
        regs.push(Reg {
            name: names[regs.len()],
            offset,
            size,
        });
        offset += size;
        left -= size;
    }
    let qubit = |q: usize| {
        let r = regs.iter().find(|r| q < r.offset + r.size).unwrap();
        format!("{}[{}]", r.name, q - r.offset)
    };

    let mut head = String::new();
    if rng.gen_bool(0.5) {
        head.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    }
    let mut customs = Vec::new();
    for name in ["g", "w"] {
        if rng.gen_bool(0.3) {
            let (text, gate) = custom_gate(&mut rng, name);
            if gate.arity <= n {
                let _ = writeln!(head, "{text}");
                customs.push(gate);
            }
        }
    }
    for r in &regs {
        let _ = writeln!(head, "qreg {}[{}];", r.name, r.size);
    }
    let measuring = shape.measurements && rng.gen_bool(0.4);
    if measuring {
        let _ = writeln!(head, "creg c[{n}];");
    }

    let mut body = String::new();
    let mut budget = rng.gen_range(1..=shape.max_instructions);
    while budget > 0 {
        budget -= 1;
        let roll = rng.gen_range(0..100);
        let line = if roll < 55 {
            let fitting: Vec<Builtin> = ALL_BUILTINS.iter().copied().filter(|g| g.num_qubits() <= n).collect();
            let g = *fitting.choose(&mut rng).unwrap();
            let args: Vec<String> = (0..g.num_params()).map(|_| angle(&mut rng)).collect();
            let ps = if args.is_empty() {
                String::new()
            } else {
                format!("({})", args.join(", "))
            };
            let whole = regs.iter().find(|r| r.size <= budget + 1);
            match whole {
                Some(r) if g.num_qubits() == 1 && rng.gen_bool(0.1) => {
                    budget -= r.size - 1;
                    format!("{}{ps} {};", g.name(), r.name)
                }
                _ => {
                    let qs: Vec<String> = pick_distinct(&mut rng, n, g.num_qubits())
                        .into_iter()
                        .map(qubit)
                        .collect();
                    format!("{}{ps} {};", g.name(), qs.join(", "))
                }
            }
        } else if roll < 61 && !customs.is_empty() {
            let g = customs.choose(&mut rng).unwrap();
            let ps = if g.params == 1 {
                format!("({})", angle(&mut rng))
            } else {
                String::new()
            };
            let qs: Vec<String> = pick_distinct(&mut rng, n, g.arity).into_iter().map(qubit).collect();
            format!("{}{ps} {};", g.name, qs.join(", "))
        } else if roll < 66 && measuring {
            let q = rng.gen_range(0..n);
            format!("measure {} -> c[{q}];", qubit(q))
        } else if roll < 68 && shape.measurements {
            format!("reset {};", qubit(rng.gen_range(0..n)))
        } else if roll < 71 {
            let k = rng.gen_range(1..=n.min(3));
            let qs: Vec<String> = pick_distinct(&mut rng, n, k).into_iter().map(qubit).collect();
            format!("barrier {};", qs.join(", "))
        } else {
            assertion(&mut rng, n, &regs, &qubit, &head, &body, &cfg)
        };
        let _ = writeln!(body, "{line}");
    }
    head + &body
}

fn assertion(
    rng: &mut ChaCha8Rng,
    n: usize,
    regs: &[Reg],
    qubit: &dyn Fn(usize) -> String,
    head: &str,
    body: &str,
    cfg: &Config,
) -> String {
    let kind = match rng.gen_range(0..3) {
        1 if n >= 2 => 1,
        2 => 2,
        _ => 0,
    };
    let (targets, text): (Vec<usize>, String) = match regs.iter().find(|r| r.size <= 3 && rng.gen_bool(0.15)) {
        Some(r) if kind != 1 || r.size >= 2 => ((r.offset..r.offset + r.size).collect(), r.name.to_string()),
        _ => {
            let k = if kind == 1 {
                rng.gen_range(2..=n.min(3))
            } else {
                rng.gen_range(1..=n.min(3))
            };
            let qs = pick_distinct(rng, n, k);
            let text = qs.iter().map(|&q| qubit(q)).collect::<Vec<_>>().join(", ");
            (qs, text)
        }
    };
    match kind {
        0 => format!("assert-sup {text};"),
        1 => format!("assert-ent {text};"),
        _ => {
            let amps: Vec<Complex64> = if rng.gen_bool(0.7) {
                let state = final_state(&flat(&format!("{head}{body}")), cfg).unwrap();
                dominant_eigenvector(&state.reduced_density(&targets))
            } else {
                let mut v = vec![Complex64::new(0.0, 0.0); 1 << targets.len()];
                let hot = rng.gen_range(0..v.len());
                v[hot] = Complex64::new(1.0, 0.0);
                v
            };
            let body: Vec<String> = amps.into_iter().map(amplitude_text).collect();
            format!("assert-eq {text} {{ {} }}", body.join(", "))
        }
    }
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
}

/// Haar-random pure state on `k` qubits.
pub fn haar_state(rng: &mut ChaCha8Rng, k: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..1 << k)
        .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

/// `a ⊗ b` with `b` on the low bits.
pub fn kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

pub fn state_of(amplitudes: Vec<Complex64>) -> QuantumState {
    let num_qubits = amplitudes.len().trailing_zeros() as usize;
    QuantumState { amplitudes, num_qubits }
}

/// State reached by a random gate sequence (no measurements, no assertions).
pub fn circuit_state(rng: &mut ChaCha8Rng, n: usize, depth: usize) -> QuantumState {
    let mut s = QuantumState::zero(n);
    for _ in 0..depth {
        let fitting: Vec<Builtin> = ALL_BUILTINS.iter().copied().filter(|g| g.num_qubits() <= n).collect();
        let g = *fitting.choose(rng).unwrap();
        let params: Vec<f64> = (0..g.num_params()).map(|_| rng.gen_range(-PI..PI)).collect();
        let qs = pick_distinct(rng, n, g.num_qubits());
        s.apply(&g.matrix(&params), &qs);
    }
    s
}

pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
