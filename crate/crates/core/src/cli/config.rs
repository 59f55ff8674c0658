//! Flat `key = value` config files, merged under the command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use crate::error::{Error, Result};

/// Options of the top-level command that take a value.
const GLOBAL_VALUED: &[&str] = &["--seed", "--out", "--format", "--threads", "--inner-budget", "--config"];

/// Parses one key per line; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("config line {}: expected key=value", no + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::Config(format!("config line {}: empty key", no + 1)));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::Config(format!("config line {}: `{k}` given twice", no + 1)));
        }
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Path of `--config` in `args`, if any.
pub fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

/// Rebuilds `args` as program, subcommand path, config entries as flags,
/// then the user's remaining arguments. Later flags win, so the command
/// line overrides the file.
pub fn merge(args: &[OsString], path_len: usize, config: &BTreeMap<String, String>) -> Vec<OsString> {
    let mut path_idx = Vec::new();
    let mut i = 1;
    while i < args.len() && path_idx.len() < path_len {
        let s = args[i].to_string_lossy();
        if GLOBAL_VALUED.contains(&s.as_ref()) {
            i += 2;
            continue;
        }
        if !s.starts_with('-') {
            path_idx.push(i);
        }
        i += 1;
    }
    let mut out: Vec<OsString> = vec![args[0].clone()];
    out.extend(path_idx.iter().map(|&k| args[k].clone()));
    for (k, v) in config {
        if k == "config" {
            continue;
        }
        out.push(format!("--{k}").into());
        if v != "true" {
            out.push(v.into());
        }
    }
    out.extend(
        args.iter()
            .enumerate()
            .skip(1)
            .filter(|(k, _)| !path_idx.contains(k))
            .map(|(_, a)| a.clone()),
    );
    out
}
