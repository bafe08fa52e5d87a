use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use patchkit::post::{DEFAULT_THRESHOLD_DB, ENERGY_TOLERANCE};
use patchkit::{Error, Result};
use sha2::{Digest, Sha256};

use crate::runfile::RawRun;

pub const MANIFEST: &str = "manifest.txt";

fn digest(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

/// Provenance record of a result bundle. Written last, so its presence marks
/// a complete bundle.
pub struct Manifest {
    config_hash: String,
    files: Vec<PathBuf>,
}

impl Manifest {
    pub fn new(run: &RawRun) -> Self {
        Manifest {
            config_hash: digest(run.canonical().as_bytes()),
            files: Vec::new(),
        }
    }

    pub fn add(&mut self, _root: &Path, path: PathBuf) {
        self.files.push(path);
    }

    /// Hashes every registered file and writes the manifest; returns all
    /// files including the manifest.
    pub fn finish(mut self, root: &Path) -> Result<Vec<PathBuf>> {
        self.files.sort();
        self.files.dedup();
        let mut out = String::new();
        let _ = writeln!(out, "tool = patchkit {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "core = patchkit-core {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "config_sha256 = {}", self.config_hash);
        let _ = writeln!(out, "band_threshold_db = {DEFAULT_THRESHOLD_DB}");
        let _ = writeln!(out, "energy_tolerance = {ENERGY_TOLERANCE}");
        let _ = writeln!(
            out,
            "determinism = no random seeds; outputs depend only on the run file and tool version"
        );
        let _ = writeln!(out, "[files]");
        for f in &self.files {
            let data = std::fs::read(f).map_err(|e| Error::Io {
                path: f.clone(),
                source: e,
            })?;
            let rel = f.strip_prefix(root).unwrap_or(f);
            let _ = writeln!(out, "{}  {}", digest(&data), rel.display());
        }
        let path = root.join(MANIFEST);
        std::fs::write(&path, out).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        self.files.push(path);
        Ok(self.files)
    }
}

/// Checks every hash listed in a manifest against the files on disk.
pub fn verify(root: &Path) -> Result<usize> {
    let path = root.join(MANIFEST);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io { path, source: e })?;
    let mut n = 0;
    for line in text.lines().skip_while(|l| *l != "[files]").skip(1) {
        let (hash, rel) = line
            .split_once("  ")
            .ok_or_else(|| Error::Format(format!("bad manifest line `{line}`")))?;
        let f = root.join(rel);
        let data = std::fs::read(&f).map_err(|e| Error::Io {
            path: f.clone(),
            source: e,
        })?;
        if digest(&data) != hash {
            return Err(Error::Mismatch(format!(
                "{} does not match its manifest hash",
                rel
            )));
        }
        n += 1;
    }
    Ok(n)
}
