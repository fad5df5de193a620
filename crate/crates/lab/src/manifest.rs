//! Run manifests: what was run, from which config, and what it produced.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub operation: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub kind: String,
    /// SHA-256 of the canonical (sorted-key) config.
    pub config_hash: String,
    pub seed: u64,
    pub threads: usize,
    /// RFC 3339, UTC.
    pub started: String,
    pub finished: String,
    pub timings: Vec<Timing>,
    /// File names relative to the manifest's directory.
    pub outputs: Vec<String>,
    pub config: serde_json::Value,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    /// Reads a manifest from a file, or from `manifest.json` inside a directory.
    pub fn load(path: &Path) -> Result<(RunManifest, PathBuf)> {
        let file = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
        let text = std::fs::read_to_string(&file).map_err(|_| LabError::ManifestMissing(file.clone()))?;
        let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| LabError::io(file.display(), e))?;
        let dir = file.parent().map(Path::to_path_buf).unwrap_or_default();
        for out in &manifest.outputs {
            if !dir.join(out).is_file() {
                return Err(LabError::ManifestMissing(dir.join(out)));
            }
        }
        Ok((manifest, dir))
    }
}

pub fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Runs `f` and records its wall time under `operation`.
pub fn timed<T>(timings: &mut Vec<Timing>, operation: impl Into<String>, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    timings.push(Timing { operation: operation.into(), seconds: start.elapsed().as_secs_f64() });
    out
}
