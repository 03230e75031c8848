use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntanglementCriterion {
    /// `‖ρ_ab − ρ_a ⊗ ρ_b‖_F` above threshold.
    #[default]
    Correlation,
    /// Negative eigenvalue of the partial transpose of `ρ_ab`.
    Ppt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Equality passes when fidelity ≥ 1 − ε.
    pub equality_epsilon: f64,
    /// Second singular value below this counts as rank 1.
    pub separability_threshold: f64,
    pub diagonal_threshold: f64,
    /// Diagonal entries of ρ_T above this count as populated.
    pub superposition_threshold: f64,
    pub entanglement_threshold: f64,
    pub entanglement_criterion: EntanglementCriterion,
    pub drop_subsumed: bool,
    pub annotations: bool,
    pub seed: u64,
    pub qubit_cap: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            equality_epsilon: 1e-6,
            separability_threshold: 1e-9,
            diagonal_threshold: 1e-9,
            superposition_threshold: 1e-9,
            entanglement_threshold: 1e-6,
            entanglement_criterion: EntanglementCriterion::Correlation,
            drop_subsumed: false,
            annotations: false,
            seed: 0,
            qubit_cap: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("tolerance `{name}` must be strictly positive, got {value}")]
pub struct ConfigError {
    pub name: &'static str,
    pub value: f64,
}

impl Config {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, value) in [
            ("equality_epsilon", self.equality_epsilon),
            ("separability_threshold", self.separability_threshold),
            ("diagonal_threshold", self.diagonal_threshold),
            ("superposition_threshold", self.superposition_threshold),
            ("entanglement_threshold", self.entanglement_threshold),
        ] {
            if value.is_nan() || value <= 0.0 {
                return Err(ConfigError { name, value });
            }
        }
        Ok(())
    }
}
