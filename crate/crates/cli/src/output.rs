//! Run manifests and output files.
//!
//! Every data file carries the manifest hash: CSV files start with a
//! `# manifest <hash>` line, JSON files have a top-level `manifest` field and
//! `.hg` files a `% manifest <hash>` comment. The hash covers the command,
//! every parameter (defaults included) and the SHA-256 of each input file, so
//! it is stable across machines and runs. Timestamps live only in
//! `manifest.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const TOOL: &str = "hyperbayes";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(path: &Path, bytes: &[u8]) -> Self {
        InputDigest {
            path: path.display().to_string(),
            sha256: hex(&Sha256::digest(bytes)),
        }
    }
}

#[derive(Serialize)]
struct HashBasis<'a, P: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    parameters: &'a P,
    inputs: Vec<&'a str>,
}

#[derive(Clone, Debug, Serialize)]
struct OutputEntry {
    file: String,
    /// False for wall-clock measurements, which differ between runs.
    deterministic: bool,
}

#[derive(Serialize)]
struct Manifest<'a, P: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    hash: &'a str,
    parameters: &'a P,
    inputs: &'a [InputDigest],
    outputs: &'a [OutputEntry],
    threads: usize,
    started_unix_ms: u128,
    finished_unix_ms: u128,
}

#[derive(Serialize)]
struct Tagged<'a, T: Serialize> {
    manifest: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// Collects the files written by one command and finally its manifest.
pub struct Run<'a, P: Serialize> {
    dir: PathBuf,
    command: &'a str,
    parameters: &'a P,
    inputs: Vec<InputDigest>,
    hash: String,
    outputs: Vec<OutputEntry>,
    threads: usize,
    started: u128,
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl<'a, P: Serialize> Run<'a, P> {
    pub fn new(
        dir: &Path,
        command: &'a str,
        parameters: &'a P,
        inputs: Vec<InputDigest>,
        threads: usize,
    ) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))?;
        let basis = HashBasis {
            tool: TOOL,
            version: VERSION,
            command,
            parameters,
            inputs: inputs.iter().map(|i| i.sha256.as_str()).collect(),
        };
        let json = serde_json::to_vec(&basis).expect("parameters serialize");
        Ok(Run {
            dir: dir.to_path_buf(),
            command,
            parameters,
            inputs,
            hash: hex(&Sha256::digest(json)),
            outputs: Vec::new(),
            threads,
            started: now_ms(),
        })
    }

    fn write(&mut self, name: &str, contents: &str, deterministic: bool) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(OutputEntry {
            file: name.to_owned(),
            deterministic,
        });
        Ok(())
    }

    /// CSV with the manifest line prepended; `body` includes the header.
    pub fn csv(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let text = format!("# manifest {}\n{body}", self.hash);
        self.write(name, &text, true)
    }

    /// Wall-clock CSV, excluded from the byte-identity guarantee.
    pub fn timing_csv(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let text = format!("# manifest {}\n{body}", self.hash);
        self.write(name, &text, false)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<(), CliError> {
        let tagged = Tagged {
            manifest: &self.hash,
            body,
        };
        let mut text = serde_json::to_string_pretty(&tagged).expect("outputs serialize");
        text.push('\n');
        self.write(name, &text, true)
    }

    pub fn hypergraph(&mut self, name: &str, h: &hyperbayes::Hypergraph) -> Result<(), CliError> {
        let comment = format!("manifest {}", self.hash);
        let text = hyperbayes::format::write_hypergraph_with_comments(h, &[comment]);
        self.write(name, &text, true)
    }

    pub fn finish(self) -> Result<(), CliError> {
        let manifest = Manifest {
            tool: TOOL,
            version: VERSION,
            command: self.command,
            hash: &self.hash,
            parameters: self.parameters,
            inputs: &self.inputs,
            outputs: &self.outputs,
            threads: self.threads,
            started_unix_ms: self.started,
            finished_unix_ms: now_ms(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        let path = self.dir.join("manifest.json");
        fs::write(&path, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
    }
}
