//! Deterministic CSV and JSON writers.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Round-trip safe: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Compact form used in file names.
pub fn tag(x: f64) -> String {
    format!("{x}")
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(hash: &str, columns: &[&str]) -> Self {
        let mut text = format!("# mcgl {VERSION} config_hash={hash}\n");
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn numbers(&mut self, values: &[f64]) {
        let mut line = String::new();
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            let _ = write!(line, "{}", num(*v));
        }
        line.push('\n');
        self.text.push_str(&line);
    }

    pub fn write(&self, dir: &Path, name: &str) -> anyhow::Result<PathBuf> {
        write_file(dir, name, &self.text)
    }
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    version: &'a str,
    config_hash: &'a str,
    #[serde(flatten)]
    record: &'a T,
}

/// Pretty JSON with the tool version and config hash as leading fields.
pub fn json<T: Serialize>(hash: &str, record: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(&Stamped { version: VERSION, config_hash: hash, record })?;
    s.push('\n');
    Ok(s)
}

pub fn write_file(dir: &Path, name: &str, text: &str) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
