//! Mutation testing of refined assertions.
//!
//! Two distance metrics are reported per mutant:
//!
//! * `distance`: non-assertion instructions strictly between the mutated
//!   instruction and the first failing assertion;
//! * `lines`: distinct source lines of functional instructions (gates,
//!   measurements, resets) above the first failing assertion, i.e. the lines a
//!   developer reads from the top of the program down to the failure.
//!
//! Assertions that already fail on the unmutated program are ignored when
//! locating the first failing assertion.

use std::collections::BTreeSet;
use std::fmt::Write;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Config;
use crate::families::{generate, Family};
use crate::model::{flatten_with, FlatProgram, InstrId, InstructionKind, Op};
use crate::pipeline::{refine_with, Error, Mode};
use crate::qasm::AssertionKind;
use crate::sim::{simulate, state_fidelity};

/// Final states with fidelity above `1 − EQUIVALENCE_TOLERANCE` count as equal.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_REPETITIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    RemoveSingleQubitGate,
    SwapFirstLastQubit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mutant {
    pub id: usize,
    /// Identity of the mutated instruction, stable across refinement.
    #[serde(skip)]
    pub target: InstrId,
    pub mutated_index: usize,
    pub line: usize,
    pub mutation: Mutation,
    pub description: String,
}

/// Unitary gate applications and the mutation each admits.
pub fn mutable_sites(p: &FlatProgram) -> Vec<(usize, Mutation)> {
    p.instructions
        .iter()
        .enumerate()
        .filter(|(_, i)| i.kind == InstructionKind::Unitary)
        .filter_map(|(k, i)| match &i.op {
            Op::Gate { qubits, .. } if qubits.len() == 1 => Some((k, Mutation::RemoveSingleQubitGate)),
            Op::Gate { qubits, .. } if qubits.len() >= 2 => Some((k, Mutation::SwapFirstLastQubit)),
            _ => None,
        })
        .collect()
}

/// Applies `mutation` to the instruction with identity `target`.
pub fn apply_mutation(p: &FlatProgram, target: InstrId, mutation: Mutation) -> Result<FlatProgram, Error> {
    let mut out = p.clone();
    let k = out
        .position_of(target)
        .ok_or_else(|| Error::Generate(format!("instruction {target} not found")))?;
    match mutation {
        Mutation::RemoveSingleQubitGate => {
            out.instructions.remove(k);
        }
        Mutation::SwapFirstLastQubit => {
            let mut qs = out.instructions[k].operands();
            let last = qs.len() - 1;
            qs.swap(0, last);
            out.regate(k, qs)?;
        }
    }
    Ok(out)
}

/// Samples up to `repetitions` distinct sites (seeded), mutates each, and drops
/// mutants whose final state matches the original up to global phase.
pub fn generate_mutants(p: &FlatProgram, repetitions: usize, cfg: &Config) -> Result<Vec<Mutant>, Error> {
    let sites = mutable_sites(p);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let picks = sample(&mut rng, sites.len(), repetitions.min(sites.len()));
    let reference = simulate(p, cfg)?.final_state;
    let mut out = Vec::new();
    for pick in picks.iter() {
        let (k, mutation) = sites[pick];
        let instr = &p.instructions[k];
        let mutated = apply_mutation(p, instr.id, mutation)?;
        let state = simulate(&mutated, cfg)?.final_state;
        if state_fidelity(&reference.amplitudes, &state.amplitudes) > 1.0 - EQUIVALENCE_TOLERANCE {
            continue;
        }
        let before = p.describe(k);
        let description = match mutation {
            Mutation::RemoveSingleQubitGate => format!("remove `{before}`"),
            Mutation::SwapFirstLastQubit => {
                let at = mutated.position_of(instr.id).unwrap();
                format!("`{before}` -> `{}`", mutated.describe(at))
            }
        };
        out.push(Mutant {
            id: out.len(),
            target: instr.id,
            mutated_index: k,
            line: instr.origin,
            mutation,
            description,
        });
    }
    Ok(out)
}

/// Where the first failing assertion sits, relative to the mutation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detection {
    pub assertion_index: usize,
    pub assertion_line: usize,
    pub distance: usize,
    pub lines: usize,
}

/// Distinct source lines of functional instructions above `index`.
pub fn inspection_lines(p: &FlatProgram, index: usize) -> usize {
    p.instructions[..index]
        .iter()
        .filter(|i| matches!(i.kind, InstructionKind::Unitary | InstructionKind::MeasurementLike))
        .map(|i| i.origin)
        .collect::<BTreeSet<_>>()
        .len()
}

/// Verdicts of `p` with mutation applied, located against the unmutated `p`.
pub fn detect(p: &FlatProgram, mutant: &Mutant, cfg: &Config) -> Result<Option<Detection>, Error> {
    let baseline: BTreeSet<InstrId> = simulate(p, cfg)?
        .verdicts
        .iter()
        .filter(|v| !v.passed())
        .map(|v| v.id)
        .collect();
    let mutated = apply_mutation(p, mutant.target, mutant.mutation)?;
    let run = simulate(&mutated, cfg)?;
    let Some(fail) = run.verdicts.iter().find(|v| !v.passed() && !baseline.contains(&v.id)) else {
        return Ok(None);
    };
    let site = p.position_of(mutant.target).unwrap();
    let at = p.position_of(fail.id).unwrap();
    if at < site {
        return Ok(None);
    }
    Ok(Some(Detection {
        assertion_index: at,
        assertion_line: fail.line,
        distance: p.instructions[site + 1..at]
            .iter()
            .filter(|i| !i.is_assertion())
            .count(),
        lines: inspection_lines(p, at),
    }))
}

fn reduction(before: usize, after: usize) -> Option<f64> {
    (before > 0).then(|| (before as f64 - after as f64) / before as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosisReport {
    pub mutant: Mutant,
    pub original: Option<Detection>,
    pub refined: Option<Detection>,
    /// Strict-between distance reduction; `None` when undetected or the original distance is 0.
    pub reduction: Option<f64>,
    pub lines_reduction: Option<f64>,
}

impl DiagnosisReport {
    pub fn detected(&self) -> bool {
        self.original.is_some() && self.refined.is_some()
    }
}

pub fn evaluate(
    original: &FlatProgram,
    refined: &FlatProgram,
    mutants: &[Mutant],
    cfg: &Config,
) -> Result<Vec<DiagnosisReport>, Error> {
    mutants
        .iter()
        .map(|m| {
            let o = detect(original, m, cfg)?;
            let r = detect(refined, m, cfg)?;
            let (reduction, lines_reduction) = match (&o, &r) {
                (Some(o), Some(r)) => (reduction(o.distance, r.distance), reduction(o.lines, r.lines)),
                _ => (None, None),
            };
            Ok(DiagnosisReport {
                mutant: m.clone(),
                original: o,
                refined: r,
                reduction,
                lines_reduction,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
}

pub fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some(Summary {
        count: values.len(),
        mean,
        std,
    })
}

/// A correct program whose assertions pass, tagged for aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub group: String,
    pub name: String,
    pub program: FlatProgram,
}

/// One mutant of one instance, evaluated under both modes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub group: String,
    pub instance: String,
    pub moving: DiagnosisReport,
    pub adding_moving: DiagnosisReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupAggregate {
    pub group: String,
    pub instances: usize,
    pub mutants: usize,
    pub moving: Option<Summary>,
    pub adding_moving: Option<Summary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    pub rows: Vec<EvalRow>,
    pub aggregates: Vec<GroupAggregate>,
}

/// Generated instances for every family × size × kind the family supports.
/// Entanglement on a product-state family is skipped.
pub fn family_instances(
    families: &[Family],
    sizes: &[usize],
    kinds: &[AssertionKind],
    cfg: &Config,
) -> Result<Vec<Instance>, Error> {
    let mut out = Vec::new();
    for &family in families {
        for &n in sizes {
            for &kind in kinds {
                let src = match generate(family, n, kind) {
                    Ok(src) => src,
                    Err(Error::Generate(_)) if kind == AssertionKind::Entanglement => continue,
                    Err(e) => return Err(e),
                };
                out.push(Instance {
                    group: family.name().to_string(),
                    name: format!("{family}-{n}-{}", kind.keyword()),
                    program: flatten_with(&src, cfg.diagonal_threshold)?,
                });
            }
        }
    }
    Ok(out)
}

/// Mutates each instance, refines it both ways and evaluates. Aggregates are
/// per group, in order of first appearance, over mutants with a defined reduction.
pub fn run_eval(instances: &[Instance], repetitions: usize, cfg: &Config) -> Result<EvalResult, Error> {
    let mut rows = Vec::new();
    let mut groups: Vec<(String, usize)> = Vec::new();
    for inst in instances {
        let p = &inst.program;
        let mutants = generate_mutants(p, repetitions, cfg)?;
        let moving = evaluate(p, &refine_with(p, cfg, Mode::Moving).program, &mutants, cfg)?;
        let full = evaluate(p, &refine_with(p, cfg, Mode::AddingMoving).program, &mutants, cfg)?;
        for (m, f) in moving.into_iter().zip(full) {
            rows.push(EvalRow {
                group: inst.group.clone(),
                instance: inst.name.clone(),
                moving: m,
                adding_moving: f,
            });
        }
        match groups.iter_mut().find(|(g, _)| *g == inst.group) {
            Some((_, count)) => *count += 1,
            None => groups.push((inst.group.clone(), 1)),
        }
    }
    let aggregates = groups
        .into_iter()
        .map(|(group, instances)| {
            let mine: Vec<&EvalRow> = rows.iter().filter(|r| r.group == group).collect();
            let collect = |pick: fn(&EvalRow) -> &DiagnosisReport| {
                mine.iter().filter_map(|r| pick(r).reduction).collect::<Vec<_>>()
            };
            GroupAggregate {
                instances,
                mutants: mine.len(),
                moving: summarize(&collect(|r| &r.moving)),
                adding_moving: summarize(&collect(|r| &r.adding_moving)),
                group,
            }
        })
        .collect();
    Ok(EvalResult { rows, aggregates })
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

fn cell(s: &Option<Summary>) -> String {
    match s {
        Some(s) => format!("{:.1}% ± {:.1}%", s.mean * 100.0, s.std * 100.0),
        None => "no detected mutants".into(),
    }
}

impl EvalResult {
    /// One row per mutant and mode.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "group,instance,mode,mutant,mutation,line,detected_original,detected_refined,distance_original,distance_refined,reduction,lines_original,lines_refined,lines_reduction\n",
        );
        for row in &self.rows {
            for (mode, r) in [("moving", &row.moving), ("adding_moving", &row.adding_moving)] {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    row.group,
                    row.instance,
                    mode,
                    r.mutant.id,
                    serde_json::to_value(r.mutant.mutation).unwrap().as_str().unwrap(),
                    r.mutant.line,
                    r.original.is_some(),
                    r.refined.is_some(),
                    opt(&r.original.as_ref().map(|d| d.distance)),
                    opt(&r.refined.as_ref().map(|d| d.distance)),
                    opt(&r.reduction),
                    opt(&r.original.as_ref().map(|d| d.lines)),
                    opt(&r.refined.as_ref().map(|d| d.lines)),
                    opt(&r.lines_reduction),
                );
            }
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::from("| program | moving | adding+moving |\n|---|---|---|\n");
        for a in &self.aggregates {
            let _ = writeln!(s, "| {} | {} | {} |", a.group, cell(&a.moving), cell(&a.adding_moving));
        }
        s
    }

    pub fn aggregates_json(&self) -> serde_json::Value {
        serde_json::json!({ "schema": crate::pipeline::REPORT_SCHEMA, "groups": self.aggregates })
    }
}
