use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use floquet_tm::io::FORMAT_TAG;
use floquet_tm::ChainConfig;
use serde::{Deserialize, Serialize};

use crate::args::Command;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Written next to every run's outputs. The data files themselves carry no
/// timestamp, so replaying a manifest reproduces them byte for byte.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub library_version: String,
    pub subcommand: String,
    pub parameters: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved_config: Option<ChainConfig>,
    pub output_dir: PathBuf,
    pub outputs: Vec<String>,
    pub created: String,
}

impl RunManifest {
    pub fn new(command: &Command, config: Option<ChainConfig>, output_dir: &Path, outputs: Vec<String>) -> Self {
        Self {
            format: FORMAT_TAG.to_string(),
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: command.name().to_string(),
            parameters: command.clone(),
            resolved_config: config,
            output_dir: output_dir.to_path_buf(),
            outputs,
            created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read manifest {}", path.display()))?;
        let m: RunManifest =
            serde_json::from_str(&text).with_context(|| format!("{} is not a run manifest", path.display()))?;
        if m.format != FORMAT_TAG {
            anyhow::bail!("manifest format {:?} is not {FORMAT_TAG:?}", m.format);
        }
        Ok(m)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
    }
}
