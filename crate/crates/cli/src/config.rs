//! `key = value` config files.
//!
//! Keys are the long flag names without the leading dashes. The loaded
//! pairs are spliced in right after the subcommand, so any flag given on the
//! command line comes later and wins.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use crate::{Error, Result};

pub const CONFIG_FLAG: &str = "--config";

pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: &str| Error::Config {
            line: i + 1,
            message: message.to_string(),
        };
        let (key, value) = line.split_once('=').ok_or_else(|| err("expected `key = value`"))?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
            return Err(err("keys are flag names such as `max-rounds`"));
        }
        if value.is_empty() {
            return Err(err("missing value"));
        }
        pairs.push((key.to_string(), value.to_string()));
    }
    Ok(pairs)
}

/// Flags equivalent to `pairs`. `true` turns into a bare switch and `false`
/// drops the key.
pub fn to_flags(pairs: &[(String, String)]) -> Vec<OsString> {
    let mut out = Vec::new();
    for (k, v) in pairs {
        match v.as_str() {
            "true" => out.push(format!("--{k}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{k}").into());
                out.push(v.into());
            }
        }
    }
    out
}

pub fn load(path: &Path) -> Result<Vec<OsString>> {
    Ok(to_flags(&parse(&fs::read_to_string(path)?)?))
}

/// Removes `--config <path>` (or `--config=<path>`) from `args` and splices
/// the file's flags in after the subcommand at `args[1]`.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        let text = arg.to_string_lossy();
        if text == CONFIG_FLAG {
            let value = iter.next().ok_or_else(|| Error::Config {
                line: 0,
                message: "--config needs a path".into(),
            })?;
            path = Some(value);
        } else if let Some(p) = text.strip_prefix("--config=") {
            path = Some(p.into());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let injected = load(Path::new(&path))?;
    let at = rest.len().min(2);
    rest.splice(at..at, injected);
    Ok(rest)
}
