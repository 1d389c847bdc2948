//! `--config` files: `key = value` lines spliced in front of the command
//! line so explicit flags win.

use std::path::Path;

use polymatrix_core::{Error, Result};

/// Reads `key = value` pairs. `#` starts a comment; keys are long flag
/// names without the leading dashes.
pub fn read_config(path: &Path) -> Result<Vec<(String, String)>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: k + 1,
            message: "expected `key = value`".into(),
        })?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(Error::Parse {
                line: k + 1,
                message: format!("bad config key `{key}`"),
            });
        }
        pairs.push((key, value.trim().to_string()));
    }
    Ok(pairs)
}

/// Finds the `--config` value in raw arguments.
pub fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

/// Inserts config pairs right after the subcommand name. Boolean keys take
/// `true` or `false`.
pub fn splice(args: Vec<String>, pairs: &[(String, String)], subcommands: &[&str]) -> Vec<String> {
    let Some(pos) = args.iter().position(|a| subcommands.contains(&a.as_str())) else {
        return args;
    };
    let mut extra = Vec::new();
    for (k, v) in pairs {
        match v.as_str() {
            "true" => extra.push(format!("--{k}")),
            "false" => {}
            _ => {
                extra.push(format!("--{k}"));
                extra.push(v.clone());
            }
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[pos + 1..]);
    out
}
