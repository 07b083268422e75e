//! Run manifests and report emission.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

/// Provenance embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub tool_version: String,
    pub seed: u64,
    /// RFC 3339. Taken from `SOURCE_DATE_EPOCH` when that is set, so
    /// reproducible runs can produce byte-identical files.
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            timestamp: timestamp(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }
}

fn timestamp() -> String {
    let fixed = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::<Utc>::from_timestamp(secs, 0));
    fixed
        .unwrap_or_else(Utc::now)
        .to_rfc3339_opts(SecondsFormat::Secs, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    manifest: &'a RunManifest,
    report: &'a T,
}

pub fn render_json<T: Serialize>(manifest: &RunManifest, report: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope { manifest, report })?;
    s.push('\n');
    Ok(s)
}

/// CSV body preceded by a `# manifest: {...}` comment line.
pub fn render_csv<R: Serialize>(manifest: &RunManifest, rows: &[R]) -> Result<String> {
    let mut out = format!("# manifest: {}\n", serde_json::to_string(manifest)?);
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    out.push_str(&String::from_utf8(writer.into_inner()?)?);
    Ok(out)
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}
