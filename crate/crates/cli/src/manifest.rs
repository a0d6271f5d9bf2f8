//! `manifest.json`: resolved config, its hash, output digests and timing.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::tasks::Artifact;
use crate::CliError;

pub const MANIFEST: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub manifest_version: u32,
    pub tool: String,
    pub version: String,
    pub task: String,
    /// SHA-256 of the compact JSON of `config.model` and `config.task`;
    /// the output path and thread count do not affect results.
    pub config_hash: String,
    /// The config with every default written out.
    pub config: RunConfig,
    pub outputs: Vec<OutputRecord>,
    pub threads: usize,
    pub wall_time_s: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Manifest {
    pub fn new(config: RunConfig, artifacts: &[Artifact], threads: usize, wall_time_s: f64) -> Self {
        let compact = serde_json::to_vec(&(&config.model, &config.task)).expect("config serializes");
        Manifest {
            manifest_version: MANIFEST_VERSION,
            tool: "hn-spectra".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            task: config.task.kind().into(),
            config_hash: sha256_hex(&compact),
            config,
            outputs: artifacts
                .iter()
                .map(|a| OutputRecord { file: a.name.clone(), sha256: sha256_hex(&a.bytes), bytes: a.bytes.len() })
                .collect(),
            threads,
            wall_time_s,
        }
    }

    pub fn read(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Writes the artifacts, then the manifest.
pub fn write_outputs(dir: &Path, artifacts: &[Artifact], manifest: &Manifest) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    for a in artifacts {
        fs::write(dir.join(&a.name), &a.bytes).map_err(io)?;
    }
    let mut text = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    text.push(b'\n');
    fs::write(dir.join(MANIFEST), text).map_err(io)
}
