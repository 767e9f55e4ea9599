//! Output locations and provenance records.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::Failure;

pub const OUT_DIR_ENV: &str = "SPHDIFF_OUT_DIR";

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_hash: String,
    pub seed: Option<u64>,
}

impl Provenance {
    /// Hashes the resolved parameters, leaving out output locations.
    pub fn new<T: Serialize>(command: &'static str, params: &T, seed: Option<u64>) -> Self {
        let mut value = serde_json::to_value(params).expect("parameters serialize");
        if let Value::Object(m) = &mut value {
            m.remove("out");
            m.remove("out_dir");
        }
        let canonical = serde_json::to_string(&value).expect("parameters serialize");
        Self {
            tool: "sphdiff",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config_hash: hex::encode(Sha256::digest(canonical.as_bytes())),
            seed,
        }
    }
}

/// `--out` if given, else `name` inside `$SPHDIFF_OUT_DIR` (or the current
/// directory).
pub fn resolve(explicit: Option<&Path>, name: &str) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => default_dir().join(name),
    }
}

pub fn default_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

pub fn ensure_parent(path: &Path) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", parent.display())))?;
    }
    Ok(())
}

pub fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    ensure_parent(path)?;
    let f = File::create(path).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// `<path>.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[derive(Serialize)]
struct Sidecar<'a, E: Serialize> {
    #[serde(flatten)]
    extra: E,
    provenance: &'a Provenance,
}

pub fn write_sidecar<E: Serialize>(path: &Path, provenance: &Provenance, extra: E) -> Result<(), Failure> {
    write_json(&sidecar_path(path), &Sidecar { extra, provenance })
}

/// Runs `f` on a buffered writer for `path` and flushes it.
pub fn write_with<F>(path: &Path, f: F) -> Result<(), Failure>
where
    F: FnOnce(&mut BufWriter<File>) -> sphdiff_core::Result<()>,
{
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush()?;
    Ok(())
}
