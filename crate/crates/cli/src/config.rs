//! `--config FILE`: flat `key = value` lines whose keys are flag names. Each
//! entry becomes a `--key=value` argument unless that flag is already on the
//! command line, so explicit flags always win.

use std::ffi::OsString;
use std::path::Path;

use crate::error::CliError;

/// Flags that take no value; `key = true` enables them.
const SWITCHES: [&str; 1] = ["allow-large"];

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(CliError::Usage(format!("config line {}: bad key {key:?}", lineno + 1)));
        }
        entries.push((key, value.trim().to_string()));
    }
    Ok(entries)
}

fn has_flag(args: &[OsString], key: &str) -> bool {
    let flag = format!("--{key}");
    let prefix = format!("--{key}=");
    args.iter().filter_map(|a| a.to_str()).any(|a| a == flag || a.starts_with(&prefix))
}

fn config_path(args: &[OsString]) -> Result<Option<String>, CliError> {
    let mut iter = args.iter().filter_map(|a| a.to_str());
    while let Some(a) = iter.next() {
        if a == "--config" {
            return iter
                .next()
                .map(|p| Some(p.to_string()))
                .ok_or_else(|| CliError::Usage("--config needs a path".into()));
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Ok(Some(p.to_string()));
        }
    }
    Ok(None)
}

/// Appends the config file's entries (minus those overridden by flags) to `args`.
pub fn merge_config_file(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args)? else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Usage(format!("cannot read config {path}: {e}")))?;
    merge_entries(args, parse_config(&text)?)
}

fn merge_entries(mut args: Vec<OsString>, entries: Vec<(String, String)>) -> Result<Vec<OsString>, CliError> {
    let mut extra = Vec::new();
    for (key, value) in entries {
        if has_flag(&args, &key) {
            continue;
        }
        if SWITCHES.contains(&key.as_str()) {
            match value.as_str() {
                "true" => extra.push(OsString::from(format!("--{key}"))),
                "false" => {}
                _ => return Err(CliError::Usage(format!("config key {key} expects true or false"))),
            }
        } else {
            extra.push(OsString::from(format!("--{key}={value}")));
        }
    }
    args.extend(extra);
    Ok(args)
}
