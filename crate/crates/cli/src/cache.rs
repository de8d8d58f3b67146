//! Content-addressed cache of finished CSVs under `<out>/.cache/<digest>/`.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::table::TOOL_VERSION;

const MANIFEST: &str = "manifest.json";

/// Config as JSON with sorted keys and without the output location, so the
/// same experiment written elsewhere shares its cache entry.
pub fn canonical_json(cfg: &ExperimentConfig) -> String {
    let mut v = serde_json::to_value(cfg).expect("config serializes");
    if let Some(obj) = v.as_object_mut() {
        obj.remove("output");
    }
    v.to_string()
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn sha256_hex(data: &[u8]) -> String {
    hex(&Sha256::digest(data))
}

pub fn cache_key(cfg: &ExperimentConfig) -> String {
    sha256_hex(format!("{TOOL_VERSION}\n{}", canonical_json(cfg)).as_bytes())
}

pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(out_dir: &Path) -> Self {
        Self { root: out_dir.join(".cache") }
    }

    pub fn entry(&self, key: &str) -> PathBuf {
        self.root.join(key)
    }

    /// Returns the cached files if the entry exists and every file matches
    /// its recorded digest; anything else counts as a miss.
    pub fn load(&self, key: &str) -> Option<Vec<(String, Vec<u8>)>> {
        let dir = self.entry(key);
        let manifest: BTreeMap<String, String> =
            serde_json::from_slice(&fs::read(dir.join(MANIFEST)).ok()?).ok()?;
        if manifest.is_empty() {
            return None;
        }
        let mut out = Vec::with_capacity(manifest.len());
        for (name, digest) in manifest {
            if name.contains('/') || name.contains('\\') || name == MANIFEST {
                return None;
            }
            let data = fs::read(dir.join(&name)).ok()?;
            if sha256_hex(&data) != digest {
                return None;
            }
            out.push((name, data));
        }
        Some(out)
    }

    pub fn store(&self, key: &str, files: &[(String, Vec<u8>)]) -> io::Result<()> {
        let dir = self.entry(key);
        if dir.exists() {
            fs::remove_dir_all(&dir)?;
        }
        fs::create_dir_all(&dir)?;
        let mut manifest = BTreeMap::new();
        for (name, data) in files {
            fs::write(dir.join(name), data)?;
            manifest.insert(name.clone(), sha256_hex(data));
        }
        let body = serde_json::to_vec_pretty(&manifest).map_err(io::Error::other)?;
        fs::write(dir.join(MANIFEST), body)
    }
}
