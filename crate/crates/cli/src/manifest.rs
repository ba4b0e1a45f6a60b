use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use indexscope_core::mfdfa::RNG_IDENTITY;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMING_FILE: &str = "timing.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Deterministic record of one run. Wall-clock timing lives in
/// `timing.json` so that reruns produce identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub input_sha256: Option<String>,
    pub seed: u64,
    pub rng: String,
    pub artifacts: Vec<Artifact>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub command: String,
    /// `(stage, seconds)` in execution order.
    pub stages: Vec<(String, f64)>,
    pub total_seconds: f64,
}

pub fn sha256_file(path: &Path) -> Result<(String, u64)> {
    let mut file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    let mut bytes = 0u64;
    loop {
        let n = file.read(&mut buf).map_err(|e| CliError::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        bytes += n as u64;
    }
    Ok((hex::encode(hasher.finalize()), bytes))
}

/// Formats a float with the shortest representation that round-trips.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Output directory that remembers every file written into it.
pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
    started: Instant,
    stage_start: Instant,
    stages: Vec<(String, f64)>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        let now = Instant::now();
        Ok(OutDir {
            root: root.to_path_buf(),
            written: Vec::new(),
            started: now,
            stage_start: now,
            stages: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Absolute path for `rel`, creating parent directories.
    pub fn path(&self, rel: &str) -> Result<PathBuf> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        Ok(path)
    }

    /// Registers a file some other writer produced.
    pub fn record(&mut self, rel: &str) {
        if !self.written.iter().any(|w| w == rel) {
            self.written.push(rel.to_string());
        }
    }

    pub fn csv<I>(&mut self, rel: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.path(rel)?;
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        self.record(rel);
        Ok(())
    }

    pub fn text(&mut self, rel: &str, contents: &str) -> Result<()> {
        let path = self.path(rel)?;
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.record(rel);
        Ok(())
    }

    /// Closes the current timing stage.
    pub fn stage(&mut self, name: &str) {
        let now = Instant::now();
        self.stages
            .push((name.to_string(), (now - self.stage_start).as_secs_f64()));
        self.stage_start = now;
    }

    /// Writes `manifest.json` (every recorded file, sorted by path) and
    /// `timing.json`.
    pub fn finish(
        mut self,
        command: &str,
        config: &RunConfig,
        input: Option<&Path>,
    ) -> Result<RunManifest> {
        self.written.sort();
        let artifacts = self
            .written
            .iter()
            .map(|rel| {
                let (sha256, bytes) = sha256_file(&self.root.join(rel))?;
                Ok(Artifact {
                    path: rel.clone(),
                    sha256,
                    bytes,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let input_sha256 = input.map(|p| sha256_file(p).map(|(h, _)| h)).transpose()?;
        let manifest = RunManifest {
            toolkit: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_hash: config.hash()?,
            input_sha256,
            seed: config.seed,
            rng: RNG_IDENTITY.to_string(),
            artifacts,
        };
        write_json(&self.root.join(MANIFEST_FILE), &manifest)?;
        let timing = Timing {
            command: command.to_string(),
            stages: self.stages,
            total_seconds: self.started.elapsed().as_secs_f64(),
        };
        write_json(&self.root.join(TIMING_FILE), &timing)?;
        Ok(manifest)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Artifacts whose current checksum differs from the manifest, or that are
/// missing.
pub fn verify(dir: &Path, manifest: &RunManifest) -> Vec<String> {
    manifest
        .artifacts
        .iter()
        .filter(|a| match sha256_file(&dir.join(&a.path)) {
            Ok((h, _)) => h != a.sha256,
            Err(_) => true,
        })
        .map(|a| a.path.clone())
        .collect()
}
