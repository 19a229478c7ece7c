//! Run manifests: every subcommand records its configuration, seed, crate
//! version, and wall time next to its main artifact, so a run can be
//! reproduced from the manifest alone.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Result;
use serde::Serialize;
use serde_json::Value;

pub struct RunTimer {
    command: &'static str,
    started: Instant,
}

#[derive(Serialize)]
struct RunManifest {
    format_version: u32,
    command: String,
    seed: Option<u64>,
    args: Value,
    version: String,
    wall_time_s: f64,
}

impl RunTimer {
    pub fn start(command: &'static str) -> Self {
        Self { command, started: Instant::now() }
    }

    /// Writes `<artifact>.manifest.json` (or `manifest.json` inside a
    /// directory artifact).
    pub fn finish(self, artifact: &Path, seed: Option<u64>, args: Value) -> Result<()> {
        let manifest = RunManifest {
            format_version: 1,
            command: self.command.to_string(),
            seed,
            args,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        let path: PathBuf = if artifact.is_dir() {
            artifact.join("run_manifest.json")
        } else {
            let mut name = artifact.file_name().unwrap_or_default().to_os_string();
            name.push(".manifest.json");
            artifact.with_file_name(name)
        };
        std::fs::write(path, serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }
}
