//! Run manifests: everything needed to replay a command.

use std::fs;
use std::path::{Path, PathBuf};

use baaf::{BaafError, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::Command;

pub const RUN_FILE: &str = "run.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputHash {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Parsed command line, defaults filled in.
    pub command: Command,
    /// Resolved library configuration.
    pub config: serde_json::Value,
    pub master_seed: u64,
    pub inputs: Vec<InputHash>,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(
        command: Command,
        config: &impl Serialize,
        master_seed: u64,
        inputs: Vec<InputHash>,
        outputs: Vec<PathBuf>,
    ) -> Result<Self> {
        Ok(RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            config: serde_json::to_value(config).map_err(|e| BaafError::Internal(e.to_string()))?,
            master_seed,
            inputs,
            outputs,
        })
    }

    /// Writes `run.json` into `dir`, creating it.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(RUN_FILE);
        let text = serde_json::to_string_pretty(self).map_err(|e| BaafError::Internal(e.to_string()))?;
        write_file(&path, text.as_bytes())?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        serde_json::from_str(&text).map_err(|e| BaafError::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Fails if any recorded input changed since the run.
    pub fn verify_inputs(&self) -> Result<()> {
        for input in &self.inputs {
            let now = hash_file(&input.path)?;
            if now.sha256 != input.sha256 {
                return Err(BaafError::Validation(format!(
                    "{} changed since the recorded run",
                    input.path.display()
                )));
            }
        }
        Ok(())
    }
}

pub fn io_err(path: &Path, source: std::io::Error) -> BaafError {
    BaafError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

pub fn hash_file(path: &Path) -> Result<InputHash> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    Ok(InputHash {
        path: path.to_path_buf(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}
