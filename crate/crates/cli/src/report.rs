//! Output directory handling and the JSON report envelope.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context as _, Result};
use kinfp_core::Field;
use serde::Serialize;
use serde_json::Value;

use crate::config::Common;

pub struct Output {
    pub subcommand: &'static str,
    pub common: Common,
    pub timestamp: bool,
    files: Vec<String>,
}

#[derive(Serialize)]
struct Report<'a, R> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    created_at: Option<u64>,
    config: &'a Value,
    result: &'a R,
    files: &'a [String],
}

impl Output {
    pub fn new(subcommand: &'static str, common: Common, timestamp: bool) -> Self {
        Self {
            subcommand,
            common,
            timestamp,
            files: Vec::new(),
        }
    }

    fn path(&mut self, suffix: &str) -> Result<std::path::PathBuf> {
        let dir = &self.common.out_dir;
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let name = format!("{}{suffix}", self.subcommand);
        self.files.push(name.clone());
        Ok(dir.join(name))
    }

    pub fn write_text(&mut self, suffix: &str, text: &str) -> Result<()> {
        let p = self.path(suffix)?;
        write(&p, text.as_bytes())
    }

    pub fn write_field(&mut self, suffix: &str, field: &Field) -> Result<()> {
        let p = self.path(suffix)?;
        kinfp_core::fields::write_field(field, &p).with_context(|| format!("writing {}", p.display()))
    }

    /// Writes `<subcommand>.json` and echoes it on stdout.
    pub fn finish<R: Serialize>(mut self, config: &Value, result: &R) -> Result<()> {
        let created_at = self
            .timestamp
            .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
        let p = self.path(".json")?;
        let report = Report {
            tool: "kinfp",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: self.subcommand,
            created_at,
            config,
            result,
            files: &self.files,
        };
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        write(&p, text.as_bytes())?;
        print!("{text}");
        Ok(())
    }
}

fn write(p: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))
}
