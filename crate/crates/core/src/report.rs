//! The serialized verification report shared by the runners and the CLI.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::immersions::CatalogEntry;

pub const SCHEMA_VERSION: u32 = 1;

/// Largest defect per condition over all samples; `None` when the condition is
/// not part of the run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Defects {
    pub lagrangian: Option<f64>,
    pub special: Option<f64>,
    pub associative: Option<f64>,
    /// `[φ(E₁,E₂,F₂), φ(E₁,E₂,F₃), φ(F₂,F₃,E₁), φ(F₂,F₃,E₂)]`, maxima of absolute values.
    pub coassociative: Option<[f64; 4]>,
    /// As `coassociative` with the normal orientation reversed.
    pub coassociative_reversed: Option<[f64; 4]>,
    pub cayley: Option<f64>,
    pub x_closure: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub schema_version: u32,
    pub structure: String,
    pub mode: Option<String>,
    pub immersion: Option<CatalogEntry>,
    pub profile: Option<String>,
    pub phase_power: Option<i32>,
    pub samples: usize,
    pub seed: u64,
    pub defects: Defects,
    pub tolerance: f64,
    pub verdicts: BTreeMap<String, bool>,
    /// Identity counts of the algebra self-test.
    pub checks: BTreeMap<String, usize>,
    /// Largest residual per self-test identity.
    pub residuals: BTreeMap<String, f64>,
    pub passed: bool,
    pub wall_time_seconds: Option<f64>,
}

impl DefectReport {
    pub fn new(structure: &str, samples: usize, seed: u64, tolerance: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            structure: structure.to_string(),
            mode: None,
            immersion: None,
            profile: None,
            phase_power: None,
            samples,
            seed,
            defects: Defects::default(),
            tolerance,
            verdicts: BTreeMap::new(),
            checks: BTreeMap::new(),
            residuals: BTreeMap::new(),
            passed: true,
            wall_time_seconds: None,
        }
    }

    /// Records `defect <= tolerance` under `name`.
    pub fn judge(&mut self, name: &str, defect: f64) -> bool {
        let ok = defect <= self.tolerance;
        self.set_verdict(name, ok);
        ok
    }

    pub fn set_verdict(&mut self, name: &str, ok: bool) {
        self.verdicts.insert(name.to_string(), ok);
        self.passed = self.verdicts.values().all(|v| *v);
    }
}
