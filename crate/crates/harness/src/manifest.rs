//! Run manifests: what produced an output file.
//!
//! The manifest hash is the SHA-256 of the canonical JSON of the command
//! name, tool version, resolved configuration and the content hashes of all
//! inputs. Paths are recorded but not hashed, so the same run into a
//! different directory carries the same hash.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn file_hash(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputRef {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub config: Value,
    /// Keyed by role, e.g. "annotations" or "dataset".
    pub inputs: BTreeMap<String, InputRef>,
    /// Output file names relative to the output directory.
    pub outputs: Vec<String>,
    pub hash: String,
}

impl RunManifest {
    pub fn new(command: &str, config: &impl Serialize) -> Result<Self> {
        let mut m = Self {
            command: command.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            config: serde_json::to_value(config)?,
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            hash: String::new(),
        };
        m.rehash();
        Ok(m)
    }

    pub fn add_input(&mut self, role: &str, path: &Path) -> Result<()> {
        self.inputs.insert(
            role.to_string(),
            InputRef {
                path: path.display().to_string(),
                sha256: file_hash(path)?,
            },
        );
        self.rehash();
        Ok(())
    }

    fn rehash(&mut self) {
        let inputs: BTreeMap<&str, &str> = self
            .inputs
            .iter()
            .map(|(role, r)| (role.as_str(), r.sha256.as_str()))
            .collect();
        let canonical = serde_json::json!({
            "command": self.command,
            "tool_version": self.tool_version,
            "config": self.config,
            "inputs": inputs,
        });
        self.hash = sha256_hex(canonical.to_string().as_bytes());
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(dir.join("manifest.json"), text)?;
        Ok(())
    }
}
