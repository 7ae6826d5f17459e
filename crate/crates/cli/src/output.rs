use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::Format;

pub const OUT_DIR_VAR: &str = "NNDLAB_OUT_DIR";

/// A finished experiment: its configuration and the same data as a CSV
/// table and as JSON.
pub struct Document {
    pub name: String,
    pub config: Value,
    /// Extra `# key: value` lines after the config line.
    pub notes: Vec<(String, String)>,
    pub csv: Vec<u8>,
    pub json: Value,
}

impl Document {
    pub fn render(&self, format: Format) -> anyhow::Result<Vec<u8>> {
        let mut buf = Vec::new();
        match format {
            Format::Csv => {
                writeln!(buf, "# config: {}", serde_json::to_string(&self.config)?)?;
                for (k, v) in &self.notes {
                    writeln!(buf, "# {k}: {v}")?;
                }
                buf.extend_from_slice(&self.csv);
            }
            Format::Json => {
                serde_json::to_writer_pretty(&mut buf, &json!({ "config": self.config, "data": self.json }))?;
                buf.push(b'\n');
            }
        }
        Ok(buf)
    }
}

fn default_path(name: &str, format: Format) -> Option<PathBuf> {
    let dir = std::env::var_os(OUT_DIR_VAR).filter(|d| !d.is_empty())?;
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    Some(Path::new(&dir).join(format!("{name}.{ext}")))
}

pub fn emit(doc: &Document, format: Format, out: Option<&Path>) -> anyhow::Result<()> {
    let bytes = doc.render(format)?;
    match out.map(Path::to_path_buf).or_else(|| default_path(&doc.name, format)) {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        }
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
