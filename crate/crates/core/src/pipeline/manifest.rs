use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use crate::error::Result;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// Output directory that remembers what was written into it.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<PathBuf> {
        let p = self.path(name);
        fs::write(&p, bytes)?;
        self.record(p.clone());
        Ok(p)
    }

    /// Registers a file written by other means.
    pub fn record(&mut self, path: PathBuf) {
        if !self.files.contains(&path) {
            self.files.push(path);
        }
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.files
    }
}

#[derive(Debug, Clone)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Run record: tool version, config hash, inputs and outputs with
/// checksums, timings and warnings.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub config_sha256: String,
    pub inputs: Vec<ManifestEntry>,
    pub outputs: Vec<ManifestEntry>,
    pub started_unix: f64,
    pub elapsed_s: f64,
    pub warnings: Vec<String>,
    pub notes: Vec<(String, String)>,
}

/// Wall-clock timer for a manifest.
pub struct Timer {
    started_unix: f64,
    start: Instant,
}

impl Timer {
    pub fn start() -> Self {
        Self {
            started_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0),
            start: Instant::now(),
        }
    }
}

fn entry(path: &Path, base: &Path) -> Result<ManifestEntry> {
    let bytes = fs::read(path)?;
    Ok(ManifestEntry {
        path: path.strip_prefix(base).unwrap_or(path).display().to_string(),
        sha256: sha256_hex(&bytes),
        bytes: bytes.len() as u64,
    })
}

impl Manifest {
    pub fn new(command: &str, seed: u64, config_source: &str, timer: Timer) -> Self {
        Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config_sha256: sha256_hex(config_source.as_bytes()),
            inputs: Vec::new(),
            outputs: Vec::new(),
            started_unix: timer.started_unix,
            elapsed_s: timer.start.elapsed().as_secs_f64(),
            warnings: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn with_inputs(mut self, inputs: &[PathBuf]) -> Result<Self> {
        for p in inputs {
            self.inputs.push(entry(p, Path::new(""))?);
        }
        Ok(self)
    }

    pub fn note(mut self, key: &str, value: impl ToString) -> Self {
        self.notes.push((key.to_string(), value.to_string()));
        self
    }

    /// Checksums every recorded output and writes `manifest.txt`.
    pub fn finish(mut self, out: &mut Outputs, warnings: &[String]) -> Result<Self> {
        self.warnings = warnings.to_vec();
        let dir = out.dir().to_path_buf();
        self.outputs = out.files().iter().map(|p| entry(p, &dir)).collect::<Result<_>>()?;
        fs::write(dir.join("manifest.txt"), self.render())?;
        Ok(self)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command = {}", self.command);
        let _ = writeln!(s, "tool_version = {}", self.tool_version);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "config_sha256 = {}", self.config_sha256);
        let _ = writeln!(s, "started_unix = {:.3}", self.started_unix);
        let _ = writeln!(s, "elapsed_s = {:.3}", self.elapsed_s);
        for (k, v) in &self.notes {
            let _ = writeln!(s, "note.{k} = {v}");
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning = {w}");
        }
        for e in &self.inputs {
            let _ = writeln!(s, "input = {}  sha256:{}  {} bytes", e.path, e.sha256, e.bytes);
        }
        for e in &self.outputs {
            let _ = writeln!(s, "output = {}  sha256:{}  {} bytes", e.path, e.sha256, e.bytes);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_lists_every_output() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Outputs::create(dir.path()).unwrap();
        out.write("a.csv", "x\n1\n").unwrap();
        out.write("b.csv", "y\n").unwrap();
        let m = Manifest::new("test", 1, "", Timer::start()).finish(&mut out, &[]).unwrap();
        assert_eq!(m.outputs.len(), 2);
        let text = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
        assert!(text.contains("output = a.csv  sha256:"));
    }
}
