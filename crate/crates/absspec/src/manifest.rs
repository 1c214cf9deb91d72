//! Deterministic run manifests: every subcommand records its inputs,
//! tolerances, seed, and output files, so a run can be reproduced
//! bit-identically in sequential mode.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::Result;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    pub problem_name: String,
    /// FNV-1a fingerprint of the canonical problem serialization, hex.
    pub problem_hash: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub jobs: usize,
    pub timing_seconds: f64,
    pub outputs: Vec<String>,
    pub csv_schemas: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, problem_name: &str, problem_hash: u64, tol: &Tolerances) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            problem_name: problem_name.to_string(),
            problem_hash: format!("{problem_hash:016x}"),
            parameters: BTreeMap::new(),
            tolerances: tol.clone(),
            seed: 0,
            jobs: crate::par::jobs(),
            timing_seconds: 0.0,
            outputs: Vec::new(),
            csv_schemas: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).expect("parameter serializes"),
        );
    }

    pub fn record_output(&mut self, path: &Path, schema: &str) {
        self.outputs.push(path.display().to_string());
        if !self.csv_schemas.iter().any(|s| s == schema) {
            self.csv_schemas.push(schema.to_string());
        }
    }

    /// Write `<subcommand>-manifest.json` under `dir` and return the path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}-manifest.json", self.subcommand));
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text)?;
        Ok(path)
    }
}
