//! Run manifests: every command records its full parameter set and output
//! list as JSON so a run can be reproduced from the manifest alone.

use std::path::{Path, PathBuf};
use std::time::Instant;

use knockdown::Result;
use serde::Serialize;

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub version: String,
    pub seed: Option<u64>,
    pub duration_seconds: f64,
    pub outputs: Vec<String>,
}

pub fn resolve_out_dir(flag: Option<&Path>) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    if let Ok(dir) = std::env::var("KNOCKDOWN_OUT") {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from(".")
}

/// Writes `<command>-manifest.json` into the output directory and returns
/// its path.
pub fn write(
    out_dir: &Path,
    command: &str,
    parameters: serde_json::Value,
    seed: Option<u64>,
    started: Instant,
    outputs: Vec<String>,
) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let manifest = RunManifest {
        command: command.to_string(),
        parameters,
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        duration_seconds: started.elapsed().as_secs_f64(),
        outputs,
    };
    let path = out_dir.join(format!("{command}-manifest.json"));
    let body = serde_json::to_string_pretty(&manifest)
        .expect("manifest serialization cannot fail") + "\n";
    std::fs::write(&path, body)?;
    Ok(path)
}
