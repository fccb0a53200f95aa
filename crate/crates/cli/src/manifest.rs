use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Everything needed to rerun a command and get the same output file.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub base_seed: Option<u64>,
    pub tool_version: String,
    pub timestamp: String,
    /// SHA-256 of the input file, when the command reads one.
    pub input_digest: Option<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: Value, base_seed: Option<u64>, input: Option<&[u8]>) -> Self {
        Self {
            command: command.to_string(),
            config,
            base_seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            input_digest: input.map(digest),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{:x}", Sha256::digest(bytes))
}
