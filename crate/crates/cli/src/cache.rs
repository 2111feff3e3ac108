//! Content-addressed report cache, one JSON file per configuration hash.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub config: ExperimentConfig,
    /// Report JSON, byte for byte as first written.
    pub report: String,
    pub csv: String,
}

#[derive(Clone, Debug)]
pub struct ResultCache {
    dir: PathBuf,
}

impl ResultCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// A stored entry for `cfg`, if present and readable. Entries written by
    /// another tool version never match because the version is in the key.
    pub fn get(&self, cfg: &ExperimentConfig) -> Option<CacheEntry> {
        let key = cfg.cache_key();
        let text = fs::read_to_string(self.path(&key)).ok()?;
        let entry: CacheEntry = serde_json::from_str(&text).ok()?;
        (entry.key == key).then_some(entry)
    }

    /// Writes through a temporary file and a rename so readers never see a
    /// partial entry.
    pub fn put(
        &self,
        cfg: &ExperimentConfig,
        report: &str,
        csv: &str,
    ) -> std::io::Result<CacheEntry> {
        fs::create_dir_all(&self.dir)?;
        let key = cfg.cache_key();
        let entry = CacheEntry {
            key: key.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            config: cfg.clone(),
            report: report.to_string(),
            csv: csv.to_string(),
        };
        let tmp = self.dir.join(format!(".{key}.{}.tmp", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(serde_json::to_string(&entry)?.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, self.path(&key))?;
        Ok(entry)
    }
}
