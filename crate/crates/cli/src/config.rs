//! Flat `key = value` configuration files.
//!
//! Keys are long flag names of the subcommand. Values from the file are
//! injected into the argument list ahead of parsing, so flags given on
//! the command line always win and unknown keys are rejected by the
//! same parser that rejects unknown flags.

use std::collections::BTreeMap;
use std::ffi::OsString;

use clap::Command;

use crate::CliError;

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected key = value", i + 1))
        })?;
        let key = key.trim().replace('_', "-");
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!(
                "config line {}: duplicate key '{key}'",
                i + 1
            )));
        }
    }
    Ok(out)
}

/// Location of the config path among the raw arguments, if any.
fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        for flag in ["--config", "--spec"] {
            if s == flag {
                return it.next().cloned();
            }
            if let Some(v) = s.strip_prefix(&format!("{flag}=")) {
                return Some(v.into());
            }
        }
    }
    None
}

fn given_on_command_line(args: &[OsString], long: &str) -> bool {
    let flag = format!("--{long}");
    args.iter().any(|a| {
        let s = a.to_string_lossy();
        s == flag || s.starts_with(&format!("{flag}="))
    })
}

/// Appends config entries not already present as flags.
pub fn merge_config(cmd: &Command, mut args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let Some(sub) = args
        .get(1)
        .and_then(|s| cmd.find_subcommand(s.to_string_lossy().as_ref()))
    else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.to_string_lossy())))?;
    for (key, value) in parse_config(&text)? {
        if given_on_command_line(&args, &key) {
            continue;
        }
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown config key '{key}' for '{}'",
                    sub.get_name()
                ))
            })?;
        if arg.get_action().takes_values() {
            args.push(format!("--{key}").into());
            args.push(value.into());
        } else {
            match value.as_str() {
                "true" => args.push(format!("--{key}").into()),
                "false" => {}
                _ => {
                    return Err(CliError::Usage(format!(
                        "config key '{key}' expects true or false"
                    )))
                }
            }
        }
    }
    Ok(args)
}
