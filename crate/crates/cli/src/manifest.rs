//! Tamper-evident record of a run and the files it wrote.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub field: String,
    pub shards: String,
    pub checkpoint_dir: Option<String>,
    /// Seconds since the Unix epoch.
    pub started: u64,
    pub finished: u64,
    /// SHA-256 of each output, keyed by path.
    pub outputs: BTreeMap<String, String>,
}

pub fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn digest_file(path: &Path) -> io::Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

/// Where the manifest of an output file lives.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

impl RunManifest {
    pub fn new(command: &str, field: String, shards: String) -> Self {
        RunManifest {
            command: command.into(),
            parameters: BTreeMap::new(),
            field,
            shards,
            checkpoint_dir: None,
            started: now(),
            finished: 0,
            outputs: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.parameters.insert(key.into(), value.to_string());
        self
    }

    pub fn record(&mut self, path: &Path) -> io::Result<()> {
        self.outputs.insert(path.display().to_string(), digest_file(path)?);
        Ok(())
    }

    pub fn write(&mut self, path: &Path) -> io::Result<()> {
        self.finished = now();
        fs::write(path, serde_json::to_string_pretty(self).expect("manifest serializes") + "\n")
    }

    pub fn read(path: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    /// Outputs whose current digest differs from the recorded one.
    pub fn mismatches(&self) -> Vec<String> {
        self.outputs
            .iter()
            .filter(|(p, d)| digest_file(Path::new(p)).ok().as_ref() != Some(*d))
            .map(|(p, _)| p.clone())
            .collect()
    }
}
