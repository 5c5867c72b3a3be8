use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;

/// Run record embedded in every file written with `--out`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    /// sha256 of every input file, keyed by the path given on the command line.
    pub inputs: BTreeMap<String, String>,
    pub version: String,
    pub seed: u64,
    pub bounds: BTreeMap<String, String>,
    pub timestamp: String,
}

/// Collects input hashes and bounds while a subcommand runs.
#[derive(Debug, Default)]
pub struct Recorder {
    pub inputs: BTreeMap<String, String>,
    pub bounds: BTreeMap<String, String>,
}

impl Recorder {
    pub fn read(&mut self, path: &str) -> std::io::Result<Vec<u8>> {
        let bytes = std::fs::read(path)?;
        self.inputs.insert(path.to_string(), hex::encode(Sha256::digest(&bytes)));
        Ok(bytes)
    }

    pub fn bound(&mut self, name: &str, value: impl ToString) {
        self.bounds.insert(name.to_string(), value.to_string());
    }

    pub fn finish(self, seed: u64) -> RunManifest {
        RunManifest {
            command: std::env::args().collect(),
            inputs: self.inputs,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            bounds: self.bounds,
            timestamp: timestamp(),
        }
    }
}

/// `SOURCE_DATE_EPOCH` when set, otherwise the current time, in RFC 3339.
fn timestamp() -> String {
    let secs = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .unwrap_or_else(|| OffsetDateTime::now_utc().unix_timestamp());
    OffsetDateTime::from_unix_timestamp(secs)
        .ok()
        .and_then(|t| t.format(&Rfc3339).ok())
        .unwrap_or_else(|| secs.to_string())
}
