//! Manifests, content hashes, and the one-line JSON summary every command
//! prints to standard output.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ConfigEcho;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub command: String,
    pub config: ConfigEcho,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
}

pub fn digest_file(path: &Path) -> anyhow::Result<InputDigest> {
    let bytes = std::fs::read(path)
        .map_err(|e| anyhow::anyhow!("cannot read input {}: {e}", path.display()))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: hex,
        bytes: bytes.len() as u64,
    })
}

pub fn write_manifest(
    out_dir: &Path,
    command: &str,
    config: ConfigEcho,
    inputs: &[PathBuf],
    outputs: &[PathBuf],
) -> anyhow::Result<PathBuf> {
    let digests = inputs
        .iter()
        .map(|p| digest_file(p))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let manifest = Manifest {
        tool: format!("kcoreset {}", env!("CARGO_PKG_VERSION")),
        command: command.to_string(),
        config,
        inputs: digests,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let path = out_dir.join("manifest.json");
    kernel_coreset::io::write_json(&path, &manifest)?;
    Ok(path)
}

/// Compact single-line JSON on stdout.
pub fn print_summary<T: Serialize>(summary: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string(summary)?);
    Ok(())
}
