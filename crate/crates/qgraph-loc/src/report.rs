//! Experiment outputs: versioned CSV files, JSON summaries, and manifests.
//!
//! Every diagnostic writes its rows as CSV with a schema comment line,
//! a JSON summary, and a manifest echoing the fully resolved parameters,
//! the code version, and the produced file names. File names carry a
//! parameter hash so sweeps never collide and any file can be traced back
//! to the exact inputs that made it.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const CSV_SCHEMA_VERSION: &str = "qgraph-loc v1";

/// 12-hex digest of the canonical JSON encoding of the parameters.
pub fn param_hash<T: Serialize>(params: &T) -> String {
    let json = serde_json::to_string(params).expect("params serialize");
    let mut h = Sha256::new();
    h.update(json.as_bytes());
    let digest = h.finalize();
    digest[..6].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub diagnostic: String,
    pub params: serde_json::Value,
    pub base_seed: u64,
    pub outputs: Vec<String>,
}

/// Writes into one output directory; creates it on construction.
pub struct ReportWriter {
    dir: PathBuf,
}

impl ReportWriter {
    pub fn new(dir: impl AsRef<Path>) -> std::io::Result<Self> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(Self {
            dir: dir.as_ref().to_path_buf(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// CSV with the schema comment line and a header row; `rows` are
    /// pre-formatted cells.
    pub fn write_csv(
        &self,
        diagnostic: &str,
        hash: &str,
        schema: &str,
        columns: &[&str],
        rows: &[Vec<String>],
    ) -> std::io::Result<PathBuf> {
        let path = self.dir.join(format!("{diagnostic}-{hash}.csv"));
        let mut out = String::new();
        out.push_str(&format!("# {CSV_SCHEMA_VERSION} schema={schema}\n"));
        out.push_str(&columns.join(","));
        out.push('\n');
        for row in rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        fs::write(&path, out)?;
        Ok(path)
    }

    pub fn write_summary<T: Serialize>(
        &self,
        diagnostic: &str,
        hash: &str,
        summary: &T,
    ) -> std::io::Result<PathBuf> {
        let path = self.dir.join(format!("{diagnostic}-{hash}.json"));
        let mut f = fs::File::create(&path)?;
        let text = serde_json::to_string_pretty(summary).expect("summary serialize");
        f.write_all(text.as_bytes())?;
        f.write_all(b"\n")?;
        Ok(path)
    }

    pub fn write_manifest(
        &self,
        diagnostic: &str,
        hash: &str,
        params: serde_json::Value,
        base_seed: u64,
        outputs: &[PathBuf],
    ) -> std::io::Result<PathBuf> {
        let manifest = Manifest {
            tool: "qgraph-loc".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            diagnostic: diagnostic.into(),
            params,
            base_seed,
            outputs: outputs
                .iter()
                .map(|p| {
                    p.file_name()
                        .map(|n| n.to_string_lossy().into_owned())
                        .unwrap_or_default()
                })
                .collect(),
        };
        let path = self.dir.join(format!("{diagnostic}-{hash}.manifest.json"));
        let mut f = fs::File::create(&path)?;
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serialize");
        f.write_all(text.as_bytes())?;
        f.write_all(b"\n")?;
        Ok(path)
    }
}

/// Deterministic float formatting for CSV cells (shortest round-trip).
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
