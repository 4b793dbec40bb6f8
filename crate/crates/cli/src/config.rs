//! `--config run.json` support.
//!
//! A config file is a JSON object whose keys are long flag names. The
//! optional `"command"` key names the subcommand when none is given on the
//! command line. Config values are appended after the command-line flags,
//! so they take precedence.
//!
//! ```json
//! {"command": "simulate", "model": "density", "n": 4, "p": 0.3,
//!  "steps": 20000, "seed": 7, "out": "t.jsonl"}
//! ```

use anyhow::{bail, Context, Result};
use serde_json::Value;

const SUBCOMMANDS: [&str; 8] = [
    "simulate",
    "detect",
    "transform",
    "fit",
    "partition",
    "diagnose",
    "exchangeability",
    "sample",
];

/// Rewrites `argv`, expanding a `--config` file into flags.
pub fn expand(argv: Vec<String>) -> Result<Vec<String>> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        if arg == "--config" {
            path = Some(it.next().context("--config needs a path")?);
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {path}"))?;
    let config: Value = serde_json::from_str(&text).with_context(|| format!("parsing {path}"))?;
    let Value::Object(map) = config else {
        bail!("{path}: config must be a JSON object");
    };
    let has_command = rest.iter().skip(1).any(|a| SUBCOMMANDS.contains(&a.as_str()));
    if !has_command {
        match map.get("command") {
            Some(Value::String(c)) => rest.insert(1.min(rest.len()), c.clone()),
            Some(_) => bail!("{path}: \"command\" must be a string"),
            None => bail!("{path}: no subcommand given and no \"command\" key"),
        }
    }
    for (key, value) in map {
        if key == "command" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Bool(true) => rest.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                for item in items {
                    rest.push(flag.clone());
                    rest.push(scalar(&key, item)?);
                }
            }
            other => {
                rest.push(flag);
                rest.push(scalar(&key, other)?);
            }
        }
    }
    Ok(rest)
}

fn scalar(key: &str, v: Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s),
        Value::Number(n) => Ok(n.to_string()),
        Value::Array(items) => Ok(items
            .into_iter()
            .map(|i| scalar(key, i))
            .collect::<Result<Vec<_>>>()?
            .join(",")),
        other => bail!("config key {key:?}: unsupported value {other}"),
    }
}
