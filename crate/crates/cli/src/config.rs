//! `--config` files and the provenance stamp written into every output.

use std::ffi::OsString;
use std::fs;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Reads `key = value` lines into `--key value` arguments.
/// Blank lines and `#` comments are skipped; `true`/`false` toggle bare flags.
pub fn config_args(text: &str) -> Result<Vec<OsString>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('[') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("config line {}: expected key = value", i + 1);
        };
        let key = k.trim().replace('_', "-");
        let val = v.trim().trim_matches('"');
        if key.is_empty() || key == "config" {
            bail!("config line {}: invalid key {:?}", i + 1, k.trim());
        }
        match val {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{key}").into());
                out.push(val.into());
            }
        }
    }
    Ok(out)
}

/// Splices config-file arguments in right after the subcommand, so flags given
/// on the command line (which come later) take precedence.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = args.get(i + 1).cloned();
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.into());
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = fs::read_to_string(&path)
        .with_context(|| format!("reading config {}", path.to_string_lossy()))?;
    let extra = config_args(&text)?;
    let Some(sub) = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
    else {
        return Ok(args);
    };
    let at = sub + 2;
    let mut out = args[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub tool_version: &'static str,
    pub seed: u64,
    pub config_hash: String,
}

const UNHASHED: [&str; 7] = [
    "jobs", "config", "out", "out_dir", "report", "vectors", "details",
];

impl RunMeta {
    /// Hashes the effective settings. Thread count, the config path and output
    /// destinations are left out since none of them changes results.
    pub fn new<T: Serialize>(seed: u64, settings: &T) -> Self {
        let mut v = serde_json::to_value(settings).expect("settings serialize");
        if let Some(obj) = v.as_object_mut() {
            for key in UNHASHED {
                obj.remove(key);
            }
        }
        let digest = Sha256::digest(v.to_string().as_bytes());
        let config_hash = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
        Self {
            tool_version: env!("CARGO_PKG_VERSION"),
            seed,
            config_hash,
        }
    }

    pub fn json(&self) -> String {
        serde_json::to_string(self).expect("meta serializes")
    }
}
