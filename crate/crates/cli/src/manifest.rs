use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::Command;
use crate::Failure;

pub const TOOL: &str = "metascale";

/// Everything needed to rerun a command and check its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub seed: Option<u64>,
    /// Values derived from defaults at run time, for the record.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub derived: BTreeMap<String, f64>,
    /// SHA-256 of each input file, keyed by path as given.
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

/// Files a command read and wrote, and where its manifest goes.
pub struct Outcome {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub derived: BTreeMap<String, f64>,
    pub manifest_path: PathBuf,
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn digests(paths: &[PathBuf]) -> Result<BTreeMap<String, String>> {
    paths
        .iter()
        .map(|p| Ok((p.display().to_string(), file_digest(p)?)))
        .collect()
}

impl RunManifest {
    pub fn record(command: &Command, outcome: &Outcome) -> Result<Self> {
        Ok(RunManifest {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.clone(),
            seed: outcome.seed,
            derived: outcome.derived.clone(),
            inputs: digests(&outcome.inputs)?,
            outputs: digests(&outcome.outputs)?,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let m: RunManifest = serde_json::from_str(&text)
            .map_err(|e| Failure::Schema(format!("{}: {e}", path.display())))?;
        if m.tool != TOOL {
            return Err(Failure::Schema(format!("manifest was written by `{}`", m.tool)).into());
        }
        if m.version != env!("CARGO_PKG_VERSION") {
            log::warn!(
                "manifest version {} differs from this build ({})",
                m.version,
                env!("CARGO_PKG_VERSION")
            );
        }
        Ok(m)
    }

    pub fn check_inputs(&self) -> Result<()> {
        compare("input", &self.inputs)
    }

    pub fn check_outputs(&self) -> Result<()> {
        compare("output", &self.outputs)
    }
}

fn compare(kind: &str, expected: &BTreeMap<String, String>) -> Result<()> {
    let mut bad = Vec::new();
    for (path, want) in expected {
        if &file_digest(Path::new(path))? != want {
            bad.push(path.as_str());
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!("{kind} digest mismatch: {}", bad.join(", "))).into())
    }
}
