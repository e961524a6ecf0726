//! Config-file defaults, applied by appending flags the command line left out.
//!
//! The file is a JSON object. Top-level scalar or array entries apply to any
//! subcommand that has a flag of that name; an object under a subcommand path
//! such as `"mix da2"` applies only there and takes precedence.

use std::ffi::OsString;
use std::path::Path;

use clap::{ArgAction, CommandFactory};
use metamix::{Error, Result};
use serde_json::{Map, Value};

use crate::args::Cli;

fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter();
    while let Some(tok) = it.next() {
        let s = tok.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

fn render(value: &Value) -> Option<String> {
    match value {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Array(items) => items
            .iter()
            .map(render)
            .collect::<Option<Vec<_>>>()
            .map(|v| v.join(",")),
        Value::Null | Value::Object(_) => None,
    }
}

pub fn apply(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let Value::Object(root) = serde_json::from_str(&text)? else {
        return Err(Error::InvalidArgument("config file must hold a JSON object".into()));
    };

    let top = Cli::command();
    let mut cmd = &top;
    let mut names = Vec::new();
    for tok in argv.iter().skip(1) {
        let tok = tok.to_string_lossy();
        if tok.starts_with('-') {
            continue;
        }
        match cmd.find_subcommand(tok.as_ref()) {
            Some(sub) => {
                names.push(sub.get_name().to_string());
                cmd = sub;
            }
            None if cmd.has_subcommands() => continue,
            None => break,
        }
    }

    let mut entries: Map<String, Value> = root
        .iter()
        .filter(|(_, v)| !v.is_object())
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    if let Some(Value::Object(scoped)) = root.get(&names.join(" ")) {
        entries.extend(scoped.clone());
    }

    let given: Vec<String> = argv.iter().map(|t| t.to_string_lossy().into_owned()).collect();
    let mut out = argv;
    for (key, value) in entries {
        let long = key.replace('_', "-");
        let Some(arg) = cmd
            .get_arguments()
            .chain(top.get_arguments())
            .find(|a| a.get_long() == Some(long.as_str()))
        else {
            continue;
        };
        let flag = format!("--{long}");
        if given.iter().any(|t| *t == flag || t.starts_with(&format!("{flag}="))) {
            continue;
        }
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            if value == Value::Bool(true) {
                out.push(flag.into());
            }
            continue;
        }
        let rendered = render(&value)
            .ok_or_else(|| Error::InvalidArgument(format!("config value for {key} must be a scalar or list")))?;
        out.push(flag.into());
        out.push(rendered.into());
    }
    Ok(out)
}
