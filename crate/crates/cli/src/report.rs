//! Artifact writing: 12-significant-digit floats, stable field order, and a
//! manifest of per-file hashes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Rounds to 12 significant digits; the shortest round-trip form of the
/// result is what gets printed.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

pub fn fmt_f(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    format!("{:?}", round12(x))
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_default()
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round12).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut v = serde_json::to_value(value).map_err(|e| CliError::Io(e.to_string()))?;
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// A table written through the csv crate; the header is always present.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Csv,
    Json,
}

/// Collects artifacts in memory, then writes them with a manifest.
pub struct Bundle {
    files: BTreeMap<String, (Kind, String)>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    scenario: &'a str,
    scenario_sha256: String,
    seed: u64,
    files: BTreeMap<&'a str, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Bundle {
    pub fn new() -> Self {
        Self { files: BTreeMap::new() }
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.files.insert(name.into(), (Kind::Json, to_json(value)?));
        Ok(())
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        self.files.insert(name.into(), (Kind::Csv, table.to_csv()?));
        Ok(())
    }

    pub fn raw_csv(&mut self, name: &str, body: String) {
        self.files.insert(name.into(), (Kind::Csv, body));
    }

    /// Writes the files allowed by `format`, then `manifest.json`. Returns
    /// the written paths.
    pub fn write(
        &self,
        dir: &Path,
        keep: impl Fn(Kind) -> bool,
        command: &str,
        scenario_json: &str,
        seed: u64,
    ) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let mut written = Vec::new();
        let mut hashes = BTreeMap::new();
        for (name, (kind, body)) in &self.files {
            if !keep(*kind) {
                continue;
            }
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            hashes.insert(name.as_str(), sha256_hex(body.as_bytes()));
            written.push(path);
        }
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            scenario: scenario_json,
            scenario_sha256: sha256_hex(scenario_json.as_bytes()),
            seed,
            files: hashes,
        };
        let path = dir.join("manifest.json");
        std::fs::write(&path, to_json(&manifest)?).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        written.push(path);
        Ok(written)
    }
}

impl Default for Bundle {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt_f(0.1 + 0.2), "0.3");
        assert_eq!(fmt_f(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt_f(-2.5e-7), "-2.5e-7");
        assert_eq!(fmt_f(0.0), "0.0");
        assert_eq!(fmt_opt(None), "");
    }

    #[test]
    fn json_floats_are_rounded() {
        let s = to_json(&serde_json::json!({"a": [1.0f64 / 3.0], "n": 7})).unwrap();
        assert!(s.contains("0.333333333333"), "{s}");
        assert!(!s.contains("0.3333333333333"), "{s}");
        assert!(s.contains("\"n\": 7"));
    }

    #[test]
    fn empty_table_keeps_header() {
        assert_eq!(Table::new(&["index", "x"]).to_csv().unwrap(), "index,x\n");
    }
}
