use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> io::Result<Self> {
        let bytes = fs::read(path)?;
        Ok(Self { path: path.display().to_string(), sha256: hex(&Sha256::digest(&bytes)) })
    }
}

/// Record of one invocation, written next to its outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub seed: u64,
    pub tool_version: String,
    pub wall_time_seconds: f64,
}

impl RunManifest {
    pub fn new(seed: u64) -> Self {
        Self {
            command_line: std::env::args().collect(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_seconds: 0.0,
        }
    }

    pub fn write(&mut self, outputs: &[PathBuf], inputs: &[PathBuf], elapsed: Duration) -> io::Result<Option<PathBuf>> {
        let Some(first) = outputs.first() else {
            return Ok(None);
        };
        self.inputs = inputs.iter().map(|p| FileDigest::of(p)).collect::<io::Result<_>>()?;
        self.outputs = outputs.iter().map(|p| FileDigest::of(p)).collect::<io::Result<_>>()?;
        self.wall_time_seconds = elapsed.as_secs_f64();
        let path = manifest_path(first);
        let text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        fs::write(&path, text + "\n")?;
        Ok(Some(path))
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
