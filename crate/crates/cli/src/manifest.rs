use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::ExperimentKind;
use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// The orbit and algebra the run was set up on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    pub algebra: String,
    pub dim: usize,
    pub rank: usize,
    pub ann_dim: usize,
    pub orbit_dim: usize,
    pub phase_dim: usize,
    pub regular_orbit: bool,
    pub seed_invariants: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rank_tol: f64,
    pub min_gap: f64,
    pub certify_gap: f64,
    pub kernel_tol: f64,
    pub membership_tol: f64,
    pub divergence_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_tol: orbitflow::numeric::RANK_TOL,
            min_gap: orbitflow::numeric::MIN_GAP,
            certify_gap: orbitflow::poisson::CERTIFY_GAP,
            kernel_tol: orbitflow::orbit::KERNEL_TOL,
            membership_tol: orbitflow::orbit::MEMBERSHIP_TOL,
            divergence_tol: orbitflow::dynamics::DIVERGENCE_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub toolkit: String,
    pub version: String,
    pub kind: ExperimentKind,
    /// sha256 of the canonical config; every output file carries it.
    pub config_hash: String,
    pub config: Value,
    pub inputs: Inputs,
    pub tolerances: Tolerances,
    pub threads: usize,
    pub wall_time_s: f64,
    pub files: Vec<FileEntry>,
    pub metrics: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

impl Manifest {
    /// Reads a manifest from a file, or from `manifest.json` inside a run directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let file = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
        let text = std::fs::read_to_string(&file).map_err(|e| CliError::io(&file, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{} is not a run manifest: {e}", file.display())))
    }
}
