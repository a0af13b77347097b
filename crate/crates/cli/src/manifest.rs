use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptStatus {
    Ok,
    ParseFail,
    ExecFail,
    SynthFail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub description: String,
    /// Output file stem shared by every log.
    pub stem: String,
    /// Program file, or the synthesized program's path under the output root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub program: Option<String>,
    pub status: PromptStatus,
    /// Logs with a result file.
    pub logs_written: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub messages: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompts_file: Option<String>,
    pub program_paths: Vec<String>,
    pub logs_root: String,
    pub output_root: String,
    pub config_paths: Vec<String>,
    pub logs: Vec<String>,
    pub prompts: Vec<PromptRecord>,
    /// Seconds since the Unix epoch; the only field that differs between identical runs.
    pub started_unix_s: u64,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(dir: &Path) -> Result<RunManifest> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }
}
