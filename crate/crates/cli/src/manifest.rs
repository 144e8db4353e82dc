//! Flat `key=value` run manifests.
//!
//! Plain keys are the flags of the run and can be fed back through
//! `--config`; `meta.*` keys record the tool version and SHA-256 digests of
//! every input and output file. Nothing time-dependent is written, so
//! repeating a run reproduces the manifest byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

pub const FILE_NAME: &str = "manifest.txt";

pub struct Manifest {
    command: &'static str,
    entries: Vec<(String, String)>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Manifest {
    pub fn new(command: &'static str) -> Self {
        Manifest {
            command,
            entries: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    /// Records a configuration that may be echoed back as a list flag.
    pub fn set_list<T: ToString>(&mut self, key: &str, values: &[T]) -> &mut Self {
        let joined = values.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
        self.set(key, joined)
    }

    pub fn input(&mut self, path: &Path) -> &mut Self {
        self.inputs.push(path.to_path_buf());
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.to_path_buf());
        self
    }

    pub fn render(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str(&format!("command={}\n", self.command));
        for (k, v) in &self.entries {
            out.push_str(&format!("{k}={v}\n"));
        }
        out.push_str(&format!("meta.tool={} {}\n", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")));
        for p in &self.inputs {
            out.push_str(&format!("meta.input.{}=sha256:{}\n", p.display(), digest(p)?));
        }
        // outputs by file name so that a replay into another directory matches
        for p in &self.outputs {
            let name = p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned());
            out.push_str(&format!("meta.output.{name}=sha256:{}\n", digest(p)?));
        }
        Ok(out)
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(FILE_NAME);
        fs::write(&path, self.render()?).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub fn digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let hash = Sha256::digest(&bytes);
    Ok(hash.iter().map(|b| format!("{b:02x}")).collect())
}

/// Turns a `key=value` file into `--key value` tokens for `command`.
///
/// Blank lines and `#` comments are skipped, as are `meta.*` keys. A
/// `command` key must match the running subcommand. List values are split
/// on whitespace; `true`/`false` toggle switches.
pub fn config_tokens(path: &Path, command: &str, switches: &[&str]) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut tokens = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("{}:{}: expected key=value", path.display(), n + 1))?;
        let (key, value) = (key.trim(), value.trim());
        if key.starts_with("meta.") {
            continue;
        }
        if key == "command" {
            anyhow::ensure!(
                value == command,
                "{}:{}: config is for '{value}', not '{command}'",
                path.display(),
                n + 1
            );
            continue;
        }
        if switches.contains(&key) {
            match value {
                "true" => tokens.push(format!("--{key}")),
                "false" => {}
                _ => anyhow::bail!("{}:{}: {key} must be true or false", path.display(), n + 1),
            }
            continue;
        }
        tokens.push(format!("--{key}"));
        tokens.extend(value.split_whitespace().map(str::to_string));
    }
    Ok(tokens)
}
