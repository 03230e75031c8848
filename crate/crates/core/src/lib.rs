//! Assertion refinement for extended OpenQASM 2 programs.
//!
//! A program is parsed ([`qasm`]), flattened into instructions ([`model`]),
//! refined by adding assertions ([`interaction`], [`separation`]) and hoisting
//! them ([`mover`]), and checked on a statevector simulator ([`sim`]).
//! [`harness`] measures how much closer to an injected fault the first failing
//! assertion lands after refinement.

pub mod config;
pub mod families;
pub mod gates;
pub mod harness;
pub mod interaction;
pub mod model;
pub mod mover;
pub mod pipeline;
pub mod qasm;
pub mod separation;
pub mod sim;

pub use config::{Config, EntanglementCriterion};
pub use families::Family;
pub use model::{flatten, FlatProgram, Instruction, InstructionKind};
pub use mover::{move_all, MoveRecord};
pub use pipeline::{load, refine, refine_with, report_json, Error, Mode, Refinement};
pub use qasm::{parse, print, AssertionKind, SourceProgram};
pub use sim::{simulate, Outcome, Verdict};
