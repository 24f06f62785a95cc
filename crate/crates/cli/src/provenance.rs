use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const TOOL: &str = "eegimg";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Written as `stage.json` beside every stage's artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageManifest {
    pub stage: String,
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub artifacts: Vec<String>,
}

impl StageManifest {
    pub fn new(stage: &str, config_hash: String, seed: Option<u64>) -> Self {
        Self {
            stage: stage.to_string(),
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            config_hash,
            seed,
            inputs: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.to_path_buf());
        self
    }

    pub fn artifact(mut self, name: &str) -> Self {
        self.artifacts.push(name.to_string());
        self
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join("stage.json"), self)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("value serialises");
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}
