//! Refinement pipeline and its JSON report.

use serde::Serialize;
use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::interaction::{refine_entanglement, InteractionReport};
use crate::model::{flatten_with, FlatProgram, ModelError};
use crate::mover::{move_all, MoveRecord};
use crate::qasm::{parse, ParseError};
use crate::separation::{refine_equality, SeparabilitySplit};
use crate::sim::SimError;

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("analysis error: {0}")]
    Model(#[from] ModelError),
    #[error("simulation error: {0}")]
    Sim(#[from] SimError),
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Generate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Movement only.
    Moving,
    /// Interaction, then separation, then movement.
    AddingMoving,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Refinement {
    #[serde(skip)]
    pub program: FlatProgram,
    pub moves: Vec<MoveRecord>,
    pub interaction: InteractionReport,
    pub separation: Vec<SeparabilitySplit>,
}

pub fn refine_with(p: &FlatProgram, cfg: &Config, mode: Mode) -> Refinement {
    match mode {
        Mode::Moving => {
            let (program, moves) = move_all(p);
            Refinement {
                program,
                moves,
                interaction: InteractionReport::default(),
                separation: Vec::new(),
            }
        }
        Mode::AddingMoving => {
            let (p1, interaction) = refine_entanglement(p);
            let (p2, separation) = refine_equality(&p1, cfg.separability_threshold, cfg.drop_subsumed);
            let (program, moves) = move_all(&p2);
            Refinement {
                program,
                moves,
                interaction,
                separation,
            }
        }
    }
}

/// Full pipeline: interaction → separation → movement.
pub fn refine(p: &FlatProgram, cfg: &Config) -> Refinement {
    refine_with(p, cfg, Mode::AddingMoving)
}

pub fn load(text: &str, cfg: &Config) -> Result<FlatProgram, Error> {
    cfg.validate()?;
    Ok(flatten_with(&parse(text)?, cfg.diagonal_threshold)?)
}

#[derive(Serialize)]
struct Report<'a> {
    schema: u32,
    input: &'a str,
    #[serde(flatten)]
    refinement: &'a Refinement,
}

pub fn report_json(r: &Refinement, input: &str) -> serde_json::Value {
    serde_json::to_value(Report {
        schema: REPORT_SCHEMA,
        input,
        refinement: r,
    })
    .expect("report serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qasm::print;

    #[test]
    fn program_without_assertions_is_unchanged() {
        let cfg = Config::default();
        let text = "qreg q[2];\nh q[0];\ncx q[0], q[1];\n";
        let p = load(text, &cfg).unwrap();
        let r = refine(&p, &cfg);
        assert_eq!(print(&r.program.to_source(), true), text);
        let json = report_json(&r, "bell.qasm");
        assert_eq!(json["schema"], 1);
        assert_eq!(json["moves"].as_array().unwrap().len(), 0);
        assert_eq!(json["interaction"]["added"].as_array().unwrap().len(), 0);
        assert_eq!(json["separation"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn invalid_config_is_reported() {
        let cfg = Config {
            equality_epsilon: -1.0,
            ..Config::default()
        };
        assert!(matches!(load("qreg q[1];", &cfg), Err(Error::Config(_))));
    }
}
