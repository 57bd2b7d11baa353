//! Output directory bookkeeping, CSV rendering and the run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};

/// Prefix of the provenance line that opens every CSV file.
pub const HASH_PREFIX: &str = "# config_hash=";

/// 17 significant digits: exact round trip for `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV text with a provenance line, a header and one row per record.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(config_hash: &str, header: &[&str]) -> Self {
        let mut text = format!("{HASH_PREFIX}{config_hash}\n");
        text.push_str(&header.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn comment(mut self, line: &str) -> Self {
        // comments go before the header so readers can skip a fixed prefix
        let header_start = self.text.find('\n').map_or(0, |i| i + 1);
        self.text.insert_str(header_start, &format!("# {line}\n"));
        self
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for c in cells {
            if !first {
                self.text.push(',');
            }
            first = false;
            self.text.push_str(c.as_ref());
        }
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

/// One written file with its content checksum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Provenance of one command invocation. Timestamps and wall time live
/// only here, so every other output is reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub command: String,
    pub tool_version: String,
    pub platform: String,
    pub threads: usize,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub wall_seconds: f64,
    pub exit_code: i32,
    pub files: Vec<FileEntry>,
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Writes files into one directory and keeps their inventory.
pub struct OutputDir {
    dir: PathBuf,
    files: Vec<FileEntry>,
    started: f64,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new(), started: unix_now() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.files.push(FileEntry {
            path: name.to_string(),
            bytes: bytes.len(),
            sha256: hex(&Sha256::digest(bytes)),
        });
        Ok(())
    }

    pub fn write_csv(&mut self, name: &str, csv: Csv) -> Result<()> {
        self.write(name, &csv.into_bytes())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| LabError::Numerical(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish(self, config_hash: &str, command: &str, threads: usize, exit_code: i32) -> Result<RunManifest> {
        let finished = unix_now();
        let manifest = RunManifest {
            config_hash: config_hash.to_string(),
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            platform: format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS),
            threads,
            started_unix: self.started,
            finished_unix: finished,
            wall_seconds: finished - self.started,
            exit_code,
            files: self.files,
        };
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| LabError::Numerical(format!("cannot serialize manifest: {e}")))?;
        std::fs::write(self.dir.join("manifest.json"), text + "\n")?;
        Ok(manifest)
    }
}

/// Config hash recorded in a CSV or JSON output file.
pub fn read_config_hash(path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(path)?;
    if let Some(rest) = text.lines().next().and_then(|l| l.strip_prefix(HASH_PREFIX)) {
        return Ok(rest.trim().to_string());
    }
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|_| LabError::config(format!("{} is neither a lab CSV nor JSON", path.display())))?;
    value
        .get("config_hash")
        .and_then(|h| h.as_str())
        .map(str::to_string)
        .ok_or_else(|| LabError::config(format!("{} carries no config hash", path.display())))
}
