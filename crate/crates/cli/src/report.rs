//! JSON report envelope shared by all subcommands.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const TOOL: &str = "dhm";
pub const SCHEMA: u32 = 1;

/// SHA-256 of the canonical configuration text, hex encoded. The output
/// directory is left out so that identical runs written to different places
/// hash alike.
pub fn config_hash(cfg: &RunConfig) -> String {
    let mut cfg = cfg.clone();
    cfg.output_dir = None;
    hex(&Sha256::digest(cfg.canonical().as_bytes()))
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema: u32,
    pub command: &'a str,
    pub config_hash: String,
    pub seed: u64,
    pub result: T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(command: &'a str, cfg: &RunConfig, result: T) -> Self {
        Self {
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            schema: SCHEMA,
            command,
            config_hash: config_hash(cfg),
            seed: cfg.seed,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report types serialize");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json())
    }
}

/// Finite floats pass through; NaN and infinities become `null`.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}
