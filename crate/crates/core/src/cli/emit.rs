//! CSV and JSON emission of result tables, and the run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::experiments::{Field, Table};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// A float rounded to 10 significant digits, printed in the shortest form
/// that reads back to the rounded value.
pub fn format_float(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "NaN".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{v:.9e}").parse().unwrap_or(v);
    if rounded == 0.0 {
        return "0".into();
    }
    let a = rounded.abs();
    if !(1e-5..1e15).contains(&a) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

fn cell(f: &Field) -> String {
    match f {
        Field::Int(v) => v.to_string(),
        Field::Num(v) => format_float(*v),
        Field::Flag(v) => v.to_string(),
        Field::Text(s) => s.clone(),
    }
}

pub fn write_csv<W: Write>(table: &Table, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(cell))?;
    }
    w.flush()?;
    Ok(())
}

fn json_value(f: &Field) -> serde_json::Value {
    match f {
        Field::Num(v) => format_float(*v)
            .parse::<f64>()
            .ok()
            .and_then(serde_json::Number::from_f64)
            .map_or(serde_json::Value::Null, serde_json::Value::Number),
        other => serde_json::to_value(other).unwrap_or(serde_json::Value::Null),
    }
}

pub fn write_json<W: Write>(table: &Table, mut out: W) -> Result<()> {
    let rows: Vec<serde_json::Map<String, serde_json::Value>> = table
        .rows
        .iter()
        .map(|r| table.columns.iter().cloned().zip(r.iter().map(json_value)).collect())
        .collect();
    serde_json::to_writer_pretty(&mut out, &rows)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn write_table<W: Write>(table: &Table, format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(table, out),
        Format::Json => write_json(table, out),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub config_sha256: String,
    pub seed: u64,
    pub version: String,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<OutputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes every table to `dir/<name>.<ext>`; returns the files written.
pub fn write_tables(dir: &Path, tables: &[Table], format: Format) -> Result<Vec<OutputFile>> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::with_capacity(tables.len());
    for t in tables {
        let mut bytes = Vec::new();
        write_table(t, format, &mut bytes)?;
        let name = format!("{}.{}", t.name, format.extension());
        std::fs::write(dir.join(&name), &bytes)?;
        files.push(OutputFile {
            path: name,
            sha256: sha256_hex(&bytes),
        });
    }
    Ok(files)
}

pub fn manifest_path(dir: &Path) -> PathBuf {
    dir.join("manifest.json")
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(manifest)?;
    bytes.push(b'\n');
    std::fs::write(manifest_path(dir), bytes)?;
    Ok(())
}
