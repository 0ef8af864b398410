//! Run manifests: config echo, timing, and checksums of every output.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::snapshot::csv_shape;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the manifest's directory when possible.
    pub path: PathBuf,
    pub sha256: String,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub tool_version: String,
    pub wall_clock_seconds: f64,
    pub input_checksum: Option<String>,
    pub outputs: Vec<OutputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config: serde_json::Value) -> Self {
        Self {
            command: command.into(),
            config,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_seconds: 0.0,
            input_checksum: None,
            outputs: Vec::new(),
        }
    }

    /// Records a CSV output; `dir` is the directory paths are stored relative to.
    pub fn add_csv(&mut self, dir: &Path, path: &Path) -> Result<()> {
        let (rows, cols) = csv_shape(path)?;
        self.push(dir, path, rows, cols)
    }

    /// Records a non-tabular output (rows and cols are 0).
    pub fn add_file(&mut self, dir: &Path, path: &Path) -> Result<()> {
        self.push(dir, path, 0, 0)
    }

    fn push(&mut self, dir: &Path, path: &Path, rows: usize, cols: usize) -> Result<()> {
        let sha256 = file_sha256(path)?;
        let rel = path.strip_prefix(dir).unwrap_or(path).to_path_buf();
        self.outputs.push(OutputFile { path: rel, sha256, rows, cols });
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::format(path, e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }

    /// Checks that every listed output exists with the recorded shape and checksum.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for out in &self.outputs {
            let path = dir.join(&out.path);
            let sha = file_sha256(&path)?;
            if sha != out.sha256 {
                return Err(Error::format(&path, "checksum differs from manifest"));
            }
            if out.cols > 0 {
                let shape = csv_shape(&path)?;
                if shape != (out.rows, out.cols) {
                    return Err(Error::format(
                        &path,
                        format!("shape {shape:?} differs from manifest ({}, {})", out.rows, out.cols),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_abc() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn write_read_verify() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("t.csv");
        std::fs::write(&csv, "a,b\n1,2\n3,4\n").unwrap();
        let mut m = RunManifest::new("solve", serde_json::json!({"gamma": 0.5}));
        m.add_csv(dir.path(), &csv).unwrap();
        assert_eq!((m.outputs[0].rows, m.outputs[0].cols), (2, 2));
        assert_eq!(m.outputs[0].path, PathBuf::from("t.csv"));
        let mp = dir.path().join("manifest.json");
        m.write(&mp).unwrap();
        let back = RunManifest::read(&mp).unwrap();
        assert_eq!(back, m);
        back.verify(dir.path()).unwrap();
        std::fs::write(&csv, "a,b\n1,2\n").unwrap();
        assert!(back.verify(dir.path()).is_err());
    }
}
