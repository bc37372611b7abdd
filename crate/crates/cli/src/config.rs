//! `--config file.json`: a flat JSON object whose keys are long flag names.
//! Its entries are spliced in before the user's own flags, so flags given on
//! the command line win.

use std::ffi::OsString;
use std::fs;

use serde_json::Value;

pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy().into_owned();
        if s == "--config" {
            path = Some(it.next().ok_or("--config needs a file")?.to_string_lossy().into_owned());
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let tokens = tokens(&text).map_err(|e| format!("config {path}: {e}"))?;
    // binary name and subcommand first
    let split = rest.len().min(2);
    let mut out: Vec<OsString> = rest[..split].to_vec();
    out.extend(tokens.into_iter().map(OsString::from));
    out.extend(rest[split..].iter().cloned());
    Ok(out)
}

fn tokens(text: &str) -> Result<Vec<String>, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let Value::Object(map) = value else {
        return Err("expected a JSON object".into());
    };
    let mut out = Vec::new();
    for (key, v) in map {
        let flag = format!("--{key}");
        match v {
            Value::Bool(true) => out.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Number(n) => {
                out.push(flag);
                out.push(n.to_string());
            }
            Value::String(s) => {
                out.push(flag);
                out.push(s);
            }
            _ => return Err(format!("value of '{key}' must be a scalar")),
        }
    }
    Ok(out)
}
