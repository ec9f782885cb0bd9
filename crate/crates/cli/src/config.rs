//! JSON config files and the reproducibility hash.
//!
//! A config file is a flat JSON object whose keys are the long flags of one
//! subcommand (`k_scale` and `k-scale` are both accepted). Its entries are spliced
//! into the argument list ahead of the user's own flags, so clap validates them
//! like any other argument and a flag given on the command line wins.

use std::ffi::OsString;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::output::CliError;

/// Global flags, which the caller resolves itself rather than through splicing.
pub const GLOBAL_KEYS: [&str; 2] = ["out-dir", "threads"];

/// Global options that take a value, for locating the subcommand in `argv`.
const GLOBAL_VALUE_FLAGS: [&str; 3] = ["--config", "--out-dir", "--threads"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    /// Subcommand named by the file, if any.
    pub command: Option<String>,
    pub out_dir: Option<String>,
    pub threads: Option<usize>,
    /// `--key=value` tokens for the subcommand.
    pub tokens: Vec<String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("config {} is not valid JSON: {e}", path.display())))?;
        match value {
            Value::Object(map) => Self::from_map(map),
            _ => Err(CliError::usage("config file must hold a JSON object")),
        }
    }

    pub fn from_map(map: Map<String, Value>) -> Result<Self, CliError> {
        let mut cfg = ConfigFile::default();
        for (raw_key, value) in map {
            let key = raw_key.replace('_', "-");
            match key.as_str() {
                "command" => cfg.command = Some(as_string(&raw_key, &value)?),
                "out-dir" => cfg.out_dir = Some(as_string(&raw_key, &value)?),
                "threads" => {
                    let n = value.as_u64().ok_or_else(|| CliError::usage("config key threads must be a positive integer"))?;
                    cfg.threads = Some(n as usize);
                }
                _ => match value {
                    Value::Null | Value::Bool(false) => {}
                    Value::Bool(true) => cfg.tokens.push(format!("--{key}")),
                    Value::Array(items) => {
                        let parts: Vec<String> = items.iter().map(|v| as_string(&raw_key, v)).collect::<Result<_, _>>()?;
                        cfg.tokens.push(format!("--{key}={}", parts.join(",")));
                    }
                    other => cfg.tokens.push(format!("--{key}={}", as_string(&raw_key, &other)?)),
                },
            }
        }
        Ok(cfg)
    }
}

fn as_string(key: &str, v: &Value) -> Result<String, CliError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(CliError::usage(format!("config key {key} must be a string, number or list of those"))),
    }
}

/// Index of the subcommand token: the first argument after `argv[0]` that is
/// neither a global flag nor the value of one.
pub fn subcommand_position(argv: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let tok = argv[i].to_string_lossy();
        if !tok.starts_with('-') {
            return Some(i);
        }
        i += if GLOBAL_VALUE_FLAGS.contains(&tok.as_ref()) { 2 } else { 1 };
    }
    None
}

/// `argv` with the config tokens inserted right after the subcommand.
pub fn splice(argv: &[OsString], tokens: &[String]) -> Vec<OsString> {
    let mut out = argv.to_vec();
    if let Some(pos) = subcommand_position(argv) {
        for (k, t) in tokens.iter().enumerate() {
            out.insert(pos + 1 + k, OsString::from(t));
        }
    }
    out
}

/// SHA-256 of the canonical JSON of the resolved parameters.
pub fn config_hash<T: Serialize>(params: &T) -> String {
    let bytes = serde_json::to_vec(params).expect("parameters serialize to JSON");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn tokens_from_json() {
        let Value::Object(map) = json!({"k_scale": 1.1, "eps": 0.1, "command": "construct", "threads": 2, "flag": true, "off": false})
        else {
            unreachable!()
        };
        let cfg = ConfigFile::from_map(map).unwrap();
        assert_eq!(cfg.command.as_deref(), Some("construct"));
        assert_eq!(cfg.threads, Some(2));
        let mut t = cfg.tokens.clone();
        t.sort();
        assert_eq!(t, vec!["--eps=0.1", "--flag", "--k-scale=1.1"]);
        let Value::Object(map) = json!({"a": [1, 0, 0, -1.5]}) else { unreachable!() };
        assert_eq!(ConfigFile::from_map(map).unwrap().tokens, vec!["--a=1,0,0,-1.5"]);
        let Value::Object(map) = json!({"a": {"b": 1}}) else { unreachable!() };
        assert!(ConfigFile::from_map(map).is_err());
    }

    #[test]
    fn splicing_after_subcommand() {
        let argv = os(&["lightcone", "--out-dir", "x", "--config", "c.json", "scan", "--eps", "0.2,0.1"]);
        assert_eq!(subcommand_position(&argv), Some(5));
        let spliced = splice(&argv, &["--eps=0.3,0.2".into()]);
        assert_eq!(spliced[6], OsString::from("--eps=0.3,0.2"));
        assert_eq!(spliced.last().unwrap(), &OsString::from("0.2,0.1"));
        assert_eq!(subcommand_position(&os(&["lightcone", "--threads", "2"])), None);
    }

    #[test]
    fn hash_is_stable() {
        let a = config_hash(&json!({"eps": 0.1}));
        assert_eq!(a, config_hash(&json!({"eps": 0.1})));
        assert_ne!(a, config_hash(&json!({"eps": 0.2})));
        assert_eq!(a.len(), 64);
    }
}
