use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const RUN_MANIFEST_VERSION: u32 = 1;

/// Record written next to every command's outputs; `config` holds the fully
/// resolved arguments, which is all `replay` needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: u32,
    pub command: String,
    pub timestamp: String,
    pub master_seed: u64,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub config: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &str, master_seed: u64, config: serde_json::Value) -> Self {
        RunManifest {
            version: RUN_MANIFEST_VERSION,
            command: command.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            master_seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            config,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: RunManifest = serde_json::from_str(&text)?;
        if m.version != RUN_MANIFEST_VERSION {
            return Err(Error::SchemaMismatch {
                expected: RUN_MANIFEST_VERSION,
                found: m.version.to_string(),
            });
        }
        Ok(m)
    }
}

/// `<dir>/run_manifest.json` for directory outputs, `<file>.manifest.json` otherwise.
pub fn manifest_path(out: &Path, out_is_dir: bool) -> PathBuf {
    if out_is_dir {
        out.join("run_manifest.json")
    } else {
        let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".manifest.json");
        out.with_file_name(name)
    }
}

pub fn path_string(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}
