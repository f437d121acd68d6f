use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::Failure;

pub const FILE_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to rerun a command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: Value,
    pub inputs: Vec<InputDigest>,
    /// Digest of the parity-check matrix the outputs refer to, if any.
    pub code_digest: Option<String>,
    pub seed: Option<u64>,
    pub started_unix_ms: u64,
    pub elapsed_ms: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct Recorder {
    command: String,
    started: SystemTime,
    clock: Instant,
    inputs: Vec<InputDigest>,
    code_digest: Option<String>,
}

impl Recorder {
    pub fn start(command: &str) -> Self {
        Recorder {
            command: command.to_string(),
            started: SystemTime::now(),
            clock: Instant::now(),
            inputs: Vec::new(),
            code_digest: None,
        }
    }

    /// Records an input file and returns its contents.
    pub fn input(&mut self, path: &Path) -> Result<String, Failure> {
        let text = crate::read(path)?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(text.as_bytes()),
        });
        Ok(text)
    }

    /// Like [`Recorder::input`], and marks the file as the code.
    pub fn code(&mut self, path: &Path) -> Result<String, Failure> {
        let text = self.input(path)?;
        self.code_digest = Some(sha256_hex(text.as_bytes()));
        Ok(text)
    }

    pub fn set_code_digest(&mut self, digest: Option<String>) {
        self.code_digest = digest;
    }

    pub fn finish<C: Serialize>(self, config: &C, seed: Option<u64>) -> RunManifest {
        RunManifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: serde_json::to_value(config).expect("config serializes"),
            inputs: self.inputs,
            code_digest: self.code_digest,
            seed,
            started_unix_ms: self
                .started
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis() as u64)
                .unwrap_or(0),
            elapsed_ms: self.clock.elapsed().as_millis() as u64,
        }
    }
}

/// Reads the manifest stored next to an output file, if there is one.
pub fn beside(file: &Path) -> Result<Option<RunManifest>, Failure> {
    let path = file.parent().unwrap_or(Path::new(".")).join(FILE_NAME);
    if !path.exists() {
        return Ok(None);
    }
    let text = crate::read(&path)?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}
