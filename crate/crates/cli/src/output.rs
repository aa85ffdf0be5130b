//! Exit codes, run manifests and artifact writing.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_SELF_CHECK: u8 = 3;
pub const EXIT_BUDGET: u8 = 4;

/// A command that did not finish cleanly, with the exit code to report.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self {
            code: EXIT_ERROR,
            message: format!("{}: {err}", path.display()),
        }
    }
}

impl From<clonebench::Error> for Failure {
    fn from(e: clonebench::Error) -> Self {
        Self::usage(e.to_string())
    }
}

/// Record written next to every artifact so a run can be replayed.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub config: Value,
    pub seed: u64,
    pub wall_time_secs: f64,
    pub tool_version: String,
    pub outputs: Vec<String>,
    pub exit_code: u8,
    pub notes: Vec<String>,
}

/// Collects outputs of one command and writes them with a manifest.
pub struct Run {
    command: &'static str,
    started: Instant,
    out: Option<PathBuf>,
    outputs: Vec<String>,
    pub notes: Vec<String>,
}

impl Run {
    pub fn new(command: &'static str, out: Option<PathBuf>) -> Self {
        Self {
            command,
            started: Instant::now(),
            out,
            outputs: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn elapsed_secs(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }

    /// Writes the primary artifact to `--out`, or to stdout without it.
    pub fn emit_primary(&mut self, body: &str) -> Result<(), Failure> {
        match self.out.clone() {
            Some(path) => self.write_file(&path, body),
            None => {
                print!("{body}");
                if !body.ends_with('\n') {
                    println!();
                }
                Ok(())
            }
        }
    }

    /// Writes a secondary artifact beside `--out` with the given suffix
    /// replacing the extension; skipped when writing to stdout.
    pub fn emit_sidecar(&mut self, suffix: &str, body: &str) -> Result<Option<PathBuf>, Failure> {
        let Some(path) = self.out.as_ref().map(|p| sidecar(p, suffix)) else {
            return Ok(None);
        };
        self.write_file(&path, body)?;
        Ok(Some(path))
    }

    fn write_file(&mut self, path: &Path, body: &str) -> Result<(), Failure> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        }
        std::fs::write(path, body).map_err(|e| Failure::io(path, e))?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    /// Writes the manifest (when `--out` was given) and returns `code`.
    pub fn finish(mut self, config: Value, seed: u64, code: u8) -> Result<u8, Failure> {
        let Some(out) = self.out.clone() else {
            return Ok(code);
        };
        let path = sidecar(&out, "manifest.json");
        let manifest = RunManifest {
            command: self.command.to_string(),
            args: std::env::args().collect(),
            config,
            seed,
            wall_time_secs: self.elapsed_secs(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: std::mem::take(&mut self.outputs),
            exit_code: code,
            notes: std::mem::take(&mut self.notes),
        };
        let body = to_json(&manifest);
        std::fs::write(&path, body).map_err(|e| Failure::io(&path, e))?;
        Ok(code)
    }
}

/// `out/result.json` with suffix `manifest.json` → `out/result.manifest.json`.
pub fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports always serialize");
    s.push('\n');
    s
}
