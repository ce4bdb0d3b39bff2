//! Output-file helpers: every artifact embeds the resolved config hash and
//! root seed, and re-running an identical configuration reproduces each file
//! byte for byte.

use crate::config::RunConfig;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

pub const GENERATOR_NAME: &str = "chacha12";

#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub config_hash: String,
    pub seed: u64,
    pub generator: &'static str,
}

impl RunMeta {
    pub fn new(config: &RunConfig) -> Self {
        Self {
            config_hash: config.hash(),
            seed: config.seed,
            generator: GENERATOR_NAME,
        }
    }

    /// Comment line prefixed to CSV outputs.
    pub fn csv_header(&self) -> String {
        format!(
            "# config_hash={} seed={} generator={}\n",
            self.config_hash, self.seed, self.generator
        )
    }
}

pub fn ensure_out_dir(config: &RunConfig) -> Result<(), String> {
    fs::create_dir_all(&config.out)
        .map_err(|e| format!("cannot create {}: {e}", config.out.display()))
}

pub fn write_json<T: Serialize>(
    config: &RunConfig,
    meta: &RunMeta,
    name: &str,
    payload: &T,
) -> Result<PathBuf, String> {
    let path = config.out.join(name);
    let body = serde_json::json!({
        "meta": meta,
        "payload": payload,
    });
    let text = serde_json::to_string_pretty(&body).expect("json serializes");
    fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}

pub fn write_csv(
    config: &RunConfig,
    meta: &RunMeta,
    name: &str,
    body: &str,
) -> Result<PathBuf, String> {
    let path = config.out.join(name);
    let text = format!("{}{}", meta.csv_header(), body);
    fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}

pub fn read_to_string(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}
