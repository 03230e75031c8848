//! Workloads shared by the benchmarks.

use qrefine_core::{families, AssertionKind, Config, Family, FlatProgram};

pub const CCCX: &str = include_str!("../../core/tests/fixtures/cccx.qasm");
pub const GHZ_MUTANT: &str = include_str!("../../core/tests/fixtures/ghz_mutant.qasm");

pub fn program(text: &str) -> FlatProgram {
    qrefine_core::load(text, &Config::default()).expect("benchmark program loads")
}

pub fn family(family: Family, n: usize, kind: AssertionKind) -> FlatProgram {
    program(&families::generate_text(family, n, kind).expect("family generates"))
}
