use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    /// SHA-256 of the effective config serialized as JSON.
    pub config_sha256: String,
    pub seeds: Vec<u64>,
    pub parallel: bool,
    pub jobs: Option<usize>,
    pub outputs: Vec<String>,
}

pub fn config_hash(config_json: &str) -> String {
    hex::encode(Sha256::digest(config_json.as_bytes()))
}

pub fn write(dir: &Path, manifest: &Manifest<'_>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(manifest)?;
    std::fs::write(dir.join("manifest.json"), text + "\n")?;
    Ok(())
}
