//! Declarative campaign configuration: a TOML file supplies defaults,
//! command-line flags override field by field, and every run embeds the
//! fully resolved configuration (and its digest) in its outputs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Optional values loaded from `--config`; all fields may be absent.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub code: CodeSection,
    #[serde(default)]
    pub decoder: DecoderSection,
    #[serde(default)]
    pub pool: PoolSection,
    #[serde(default)]
    pub selection: SelectionSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub collect: CollectSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSection {
    pub alist: Option<PathBuf>,
    pub puncture: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderSection {
    pub kind: Option<String>,
    pub normalization: Option<f64>,
    pub max_iterations: Option<u32>,
    pub clip: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolSection {
    pub provenance: Option<String>,
    pub p: Option<f64>,
    pub d_c: Option<usize>,
    pub count: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionSection {
    pub k_tilde: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub snr_db: Option<Vec<f64>>,
    pub min_errors: Option<u64>,
    pub max_frames: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectSection {
    pub ebn0_db: Option<f64>,
    pub target_fer: Option<f64>,
    pub count: Option<usize>,
    pub max_frames: Option<u64>,
    pub search_lo_db: Option<f64>,
    pub search_hi_db: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub frames: Option<PathBuf>,
    pub pool: Option<PathBuf>,
    pub records: Option<PathBuf>,
    pub selection: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("reading config {}", path.display()), e))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Io(format!("parsing config {}: {e}", path.display())))
    }
}

/// SHA-256 hex of a resolved configuration's canonical JSON.
pub fn config_digest<T: Serialize>(resolved: &T) -> String {
    let json = serde_json::to_string(resolved).expect("config serializes");
    Sha256::digest(json.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
