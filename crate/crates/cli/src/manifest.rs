//! Output files with their SHA-256 digests, and the run manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use xylab::oracle::CheckRecord;

use crate::config::ExperimentConfig;
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub check: String,
    pub instance: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: ExperimentConfig,
    /// Digest of the config with the output directory blanked.
    pub config_sha256: String,
    pub wall_clock_secs: f64,
    pub checks: Vec<CheckSummary>,
    pub outputs: Vec<OutputDigest>,
    pub notes: Vec<String>,
    pub exit_code: i32,
}

/// Collects the files of one run in a directory.
pub struct OutputSet {
    dir: PathBuf,
    written: Vec<OutputDigest>,
}

impl OutputSet {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(OutputSet {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.written.push(OutputDigest {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn outputs(&self) -> &[OutputDigest] {
        &self.written
    }
}

/// Accumulates what goes into the manifest while a command runs.
pub struct RunLog {
    pub command: String,
    pub config: ExperimentConfig,
    pub checks: Vec<CheckSummary>,
    pub notes: Vec<String>,
    started: Instant,
}

impl RunLog {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        RunLog {
            command: command.to_string(),
            config: config.clone(),
            checks: Vec::new(),
            notes: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn record(&mut self, rec: &CheckRecord) {
        self.checks.push(CheckSummary {
            check: rec.check.clone(),
            instance: rec.instance.clone(),
            pass: rec.pass,
        });
    }

    pub fn note(&mut self, note: impl Into<String>) {
        let note = note.into();
        log::warn!("{note}");
        self.notes.push(note);
    }

    /// Writes the manifest last, covering every file written before it.
    pub fn finish(self, out: &mut OutputSet, exit_code: i32) -> Result<RunManifest, CliError> {
        let mut portable = self.config.clone();
        portable.out_dir = Default::default();
        let config_json = serde_json::to_string(&portable).map_err(|e| CliError::Internal(e.to_string()))?;
        let manifest = RunManifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: sha256_hex(config_json.as_bytes()),
            config: self.config,
            wall_clock_secs: self.started.elapsed().as_secs_f64(),
            checks: self.checks,
            outputs: out.outputs().to_vec(),
            notes: self.notes,
            exit_code,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
        std::fs::write(out.dir().join(MANIFEST_FILE), text + "\n")?;
        Ok(manifest)
    }
}
