//! Result files and the run manifest. Files are removed again unless the
//! whole run succeeds.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Hex digest of the config bytes, extended by the seed override if any.
pub fn config_hash(bytes: &[u8], seed_override: Option<u64>) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    if let Some(s) = seed_override {
        h.update(format!("\nseed-override:{s}").as_bytes());
    }
    hex::encode(h.finalize())
}

#[derive(Clone, Debug, Serialize)]
pub struct Integrator {
    pub method: &'static str,
    pub steps: Option<usize>,
    pub riccati_steps: Option<usize>,
    pub steps_per_unit_time: usize,
    pub blow_up_threshold: f64,
}

impl Integrator {
    pub fn rk4(steps: Option<usize>, riccati_steps: Option<usize>) -> Self {
        Integrator {
            method: "rk4",
            steps,
            riccati_steps,
            steps_per_unit_time: graphon_core::ode::STEPS_PER_UNIT_TIME,
            blow_up_threshold: graphon_core::ode::BLOW_UP_THRESHOLD,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: &'static str,
    pub version: &'static str,
    pub config: String,
    pub config_sha256: String,
    pub seed_override: Option<u64>,
    pub format: &'static str,
    pub jobs: usize,
    pub cases: usize,
    pub integrator: Integrator,
    pub outputs: Vec<String>,
    pub created_unix: u64,
}

pub fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Writes `<stem>[-suffix].<ext>` files into one directory.
pub struct Output {
    dir: PathBuf,
    stem: String,
    written: Vec<PathBuf>,
    committed: bool,
}

impl Output {
    pub fn new(dir: &Path, stem: String) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            stem,
            written: Vec::new(),
            committed: false,
        })
    }

    pub fn file_name(&self, suffix: &str, ext: &str) -> String {
        if suffix.is_empty() {
            format!("{}.{ext}", self.stem)
        } else {
            format!("{}-{suffix}.{ext}", self.stem)
        }
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    pub fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.written)
    }
}

impl Drop for Output {
    fn drop(&mut self) {
        if !self.committed {
            for p in &self.written {
                let _ = fs::remove_file(p);
            }
        }
    }
}
