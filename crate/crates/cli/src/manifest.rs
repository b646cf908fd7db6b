//! Run manifest: per-stage sha256 checksums of every input and output file,
//! plus the config snapshot and tool version. Checksums key on stage-relative
//! (outputs) or config-declared (inputs) path strings so two runs in
//! different output directories stay byte-identical. Wall-clock timings go to
//! a separate timings file for the same reason.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StageEntry {
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: BTreeMap<String, String>,
    pub stages: BTreeMap<String, StageEntry>,
}

impl RunManifest {
    pub fn new(config: BTreeMap<String, String>) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            stages: BTreeMap::new(),
        }
    }

    /// Load the existing manifest (stages are restartable) or start fresh.
    /// A changed config snapshot invalidates recorded stages.
    pub fn load_or_new(out: &Path, config: BTreeMap<String, String>) -> Self {
        let path = out.join("manifest.json");
        if let Ok(content) = std::fs::read_to_string(&path) {
            if let Ok(m) = serde_json::from_str::<RunManifest>(&content) {
                if m.config == config && m.tool_version == env!("CARGO_PKG_VERSION") {
                    return m;
                }
            }
        }
        RunManifest::new(config)
    }

    pub fn record(
        &mut self,
        stage: &str,
        inputs: &[(&str, &Path)],
        outputs: &[(&str, &Path)],
    ) -> Result<(), CliError> {
        let mut entry = StageEntry::default();
        for (key, path) in inputs {
            entry.inputs.insert(key.to_string(), sha256_file(path)?);
        }
        for (key, path) in outputs {
            entry.outputs.insert(key.to_string(), sha256_file(path)?);
        }
        self.stages.insert(stage.to_string(), entry);
        Ok(())
    }

    pub fn save(&self, out: &Path) -> Result<(), CliError> {
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::runtime(format!("manifest serialization: {e}")))?;
        std::fs::write(out.join("manifest.json"), body + "\n")
            .map_err(|e| CliError::runtime(format!("writing manifest: {e}")))
    }
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::runtime(format!("checksumming {}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Append a stage timing (seconds) to `<out>/timings.json`. Kept out of the
/// manifest so determinism checks can compare manifests byte for byte.
pub fn record_timing(out: &Path, stage: &str, seconds: f64) {
    let path = out.join("timings.json");
    let mut timings: BTreeMap<String, f64> = std::fs::read_to_string(&path)
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok())
        .unwrap_or_default();
    timings.insert(stage.to_string(), seconds);
    if let Ok(body) = serde_json::to_string_pretty(&timings) {
        let _ = std::fs::write(&path, body + "\n");
    }
}
