//! Configuration file loading and digests.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::generator::GenConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

/// Parses a TOML config; missing sections and fields take their defaults.
pub fn parse_config(text: &str, path: &Path) -> Result<GenConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Parse { path: path.to_path_buf(), message: e.to_string() })
}

/// Loads `path`, or the defaults when no path is given.
pub fn load_config(path: Option<&Path>) -> Result<GenConfig, ConfigError> {
    let Some(path) = path else { return Ok(GenConfig::default()) };
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
    parse_config(&text, path)
}

/// Canonical JSON text of the resolved config. This is what gets written to
/// the dataset and digested.
pub fn canonical_json(cfg: &GenConfig) -> String {
    let mut s = serde_json::to_string_pretty(cfg).expect("config serializes");
    s.push('\n');
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn config_digest(cfg: &GenConfig) -> String {
    sha256_hex(canonical_json(cfg).as_bytes())
}
