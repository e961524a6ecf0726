//! Output writers that stamp every file with its provenance.
//!
//! JSON outputs gain a `"provenance"` member, CSV outputs a leading `#` line, and
//! JSON Lines outputs a `<file>.meta.json` sidecar. Provenance holds the tool
//! version, the seed and a hash over the run's parameters and input contents.
//! File paths are deliberately left out so that reruns elsewhere are byte-identical.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use metamix::{Error, Result, TOOL_VERSION};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Prints a summary line on stdout. A closed pipe is not an error for a summary.
pub fn report(line: impl Display) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

pub struct Run {
    seed: Option<u64>,
    config: Value,
    inputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Run {
    pub fn new(seed: Option<u64>, config: &impl Serialize) -> Result<Self> {
        Ok(Self {
            seed,
            config: serde_json::to_value(config)?,
            inputs: BTreeMap::new(),
        })
    }

    /// Records the content hash of an input file (or of every file in a directory).
    pub fn input(mut self, name: &str, path: &Path) -> Result<Self> {
        let digest = if path.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(path)
                .map_err(|e| Error::io(path, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            files.sort();
            let mut h = Sha256::new();
            for f in files {
                h.update(f.file_name().unwrap_or_default().as_encoded_bytes());
                h.update(std::fs::read(&f).map_err(|e| Error::io(&f, e))?);
            }
            hex::encode(h.finalize())
        } else {
            sha256_hex(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
        };
        self.inputs.insert(name.to_string(), digest);
        Ok(self)
    }

    pub fn config_hash(&self) -> String {
        let canonical = json!({ "config": self.config, "inputs": self.inputs });
        sha256_hex(canonical.to_string().as_bytes())
    }

    pub fn provenance(&self) -> Value {
        json!({
            "tool_version": TOOL_VERSION,
            "seed": self.seed,
            "config_hash": self.config_hash(),
            "config": self.config,
            "inputs": self.inputs,
        })
    }

    pub fn write_json(&self, path: &Path, value: &impl Serialize) -> Result<()> {
        let mut v = serde_json::to_value(value)?;
        match &mut v {
            Value::Object(map) => {
                map.insert("provenance".into(), self.provenance());
            }
            other => {
                v = json!({ "value": other.take(), "provenance": self.provenance() });
            }
        }
        let mut text = serde_json::to_string_pretty(&v)?;
        text.push('\n');
        write(path, text.as_bytes())
    }

    /// `body` must already end in a newline.
    pub fn write_csv(&self, path: &Path, body: &str) -> Result<()> {
        let header = format!(
            "# tool_version={} seed={} config_hash={}\n",
            TOOL_VERSION,
            self.seed.map_or("none".to_string(), |s| s.to_string()),
            self.config_hash()
        );
        write(path, format!("{header}{body}").as_bytes())
    }

    /// Provenance for a JSON Lines output, written beside it.
    pub fn write_sidecar(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(&json!({ "provenance": self.provenance() }))?;
        text.push('\n');
        write(&sidecar_path(path), text.as_bytes())
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    path.with_file_name(name)
}

/// `dir/result.json` -> `dir/result.<suffix>`.
pub fn companion_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}.{suffix}"))
}

pub fn file_name(path: &Path) -> String {
    path.file_name().unwrap_or_default().to_string_lossy().into_owned()
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
