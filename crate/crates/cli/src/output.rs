use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use degenpop::export::{to_json, write_json};
use serde::Serialize;

use crate::config::Config;
use crate::error::CliError;

/// An output directory that remembers what was written to it.
pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
    started: Instant,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'static str,
    config: &'a Config,
    outputs: &'a [String],
    /// Wall time lives here so the manifest itself stays reproducible.
    timing: &'static str,
}

#[derive(Serialize)]
struct Timing {
    wall_seconds: f64,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Config(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new(), started: Instant::now() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Records `name` (relative to the root) as an output.
    pub fn record(&mut self, name: impl Into<String>) {
        self.written.push(name.into());
    }

    pub fn text(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, contents)?;
        self.record(name);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.text(name, &to_json(value))
    }

    /// Writes `manifest.json` and `timing.json`.
    pub fn finish(mut self, command: &str, config: &Config) -> Result<(), CliError> {
        self.written.sort();
        let manifest = Manifest { command, version: env!("CARGO_PKG_VERSION"), config, outputs: &self.written, timing: "timing.json" };
        write_json(&self.path("manifest.json"), &manifest)?;
        write_json(&self.path("timing.json"), &Timing { wall_seconds: self.started.elapsed().as_secs_f64() })?;
        Ok(())
    }
}
