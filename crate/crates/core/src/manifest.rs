//! Provenance for CLI runs.

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// SHA-256 of the resolved configuration's JSON encoding.
    pub config_digest: String,
    pub seed: u64,
    pub timestamp: DateTime<Utc>,
    pub subcommand: String,
}

/// Hex SHA-256 of `value` serialized as JSON. Field order is fixed by the
/// type definitions, so equal configurations give equal digests.
pub fn config_digest<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("configuration serializes to JSON");
    hex::encode(Sha256::digest(&bytes))
}

impl RunManifest {
    pub fn new<T: Serialize + ?Sized>(subcommand: &str, config: &T, seed: u64) -> Self {
        RunManifest {
            tool_version: TOOL_VERSION.to_string(),
            config_digest: config_digest(config),
            seed,
            timestamp: Utc::now(),
            subcommand: subcommand.to_string(),
        }
    }

    /// `#`-prefixed CSV comment line. The timestamp is left out so repeated
    /// runs write identical files.
    pub fn comment_line(&self) -> String {
        format!(
            "# placesim {} subcommand={} config_digest={} seed={}",
            self.tool_version, self.subcommand, self.config_digest, self.seed
        )
    }

    pub fn timestamp_rfc3339(&self) -> String {
        self.timestamp.to_rfc3339_opts(SecondsFormat::Secs, true)
    }
}
