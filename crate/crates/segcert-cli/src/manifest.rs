//! Run manifests: every output file is accompanied by a JSON record carrying
//! enough information to re-run it bit-exactly.

use std::path::Path;

use serde::Serialize;

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct RunManifest<P: Serialize> {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    /// Full parameterization of the run (config, seeds, sweep spec).
    pub parameters: P,
    /// True when a preset was run below its reference scale (fewer
    /// repetitions or a coarser grid than the published configuration).
    pub coarsened: bool,
    pub wall_time_s: f64,
}

impl<P: Serialize> RunManifest<P> {
    pub fn new(command: &str, parameters: P, coarsened: bool, wall_time_s: f64) -> Self {
        RunManifest {
            tool: "segcert",
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            parameters,
            coarsened,
            wall_time_s,
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Internal(format!("manifest serialization: {e}")))?;
        std::fs::write(path, json + "\n")
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }
}

/// Manifest path next to an output file: `out.csv` -> `out.manifest.json`.
pub fn manifest_path(out: &Path) -> std::path::PathBuf {
    match out.extension() {
        Some(_) => out.with_extension("manifest.json"),
        None => out.with_extension("manifest.json"),
    }
}
