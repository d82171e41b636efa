//! Run manifests written next to every output file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

pub const FORMAT: &str = "oriperc.manifest.v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub command: String,
    /// Arguments after the program name, as given.
    pub argv: Vec<String>,
    pub seed: Option<u64>,
    pub version: String,
    pub threads: usize,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn path_for(output: &Path) -> PathBuf {
        let mut s = output.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn write(&self, output: &Path) -> Result<PathBuf> {
        let path = Self::path_for(output);
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let m: RunManifest = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if m.format != FORMAT {
            bail!("{} is not a run manifest (format {:?})", path.display(), m.format);
        }
        Ok(m)
    }
}

/// Replaces (or appends) the value of a `--flag value` / `--flag=value` pair.
pub fn set_flag(argv: &[String], flag: &str, value: &str) -> Vec<String> {
    let mut out = Vec::with_capacity(argv.len() + 2);
    let mut found = false;
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == flag {
            out.push(a.clone());
            out.push(value.to_string());
            it.next();
            found = true;
        } else if a.strip_prefix(flag).is_some_and(|r| r.starts_with('=')) {
            out.push(format!("{flag}={value}"));
            found = true;
        } else {
            out.push(a.clone());
        }
    }
    if !found {
        out.push(flag.to_string());
        out.push(value.to_string());
    }
    out
}
