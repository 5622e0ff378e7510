use std::fs;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use sha2::{Digest, Sha256};
use vsynth::io::{read_frame_dir, read_vsv, RunConfig};
use vsynth::Video;

/// Usage/config problems exit with 2, everything else with 1.
#[derive(Debug)]
pub enum CliError {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<vsynth::Error> for CliError {
    fn from(e: vsynth::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

pub fn usage(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Usage(e.into())
}

/// Loads the run config (defaults when `path` is `None`) and applies
/// `VSYNTH_SEED`.
pub fn load_config(path: Option<&Path>) -> CliResult<RunConfig> {
    match path {
        Some(p) => {
            if !p.is_file() {
                return Err(usage(anyhow!("config file {} not found", p.display())));
            }
            RunConfig::load(p).map_err(usage)
        }
        None => {
            let mut cfg = RunConfig::default();
            cfg.apply_seed_override(std::env::var(vsynth::io::SEED_ENV).ok().as_deref())
                .map_err(usage)?;
            Ok(cfg)
        }
    }
}

pub fn require_file(path: &Path, what: &str) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(usage(anyhow!("{what} {} not found", path.display())))
    }
}

/// A `.vsv` file, or a directory of PNG frames sampled at `fs`.
pub fn load_video(path: &Path, fs: f64) -> CliResult<Video> {
    if path.is_dir() {
        Ok(read_frame_dir(path, fs)?)
    } else if path.is_file() {
        Ok(read_vsv(path)?)
    } else {
        Err(usage(anyhow!("input {} not found", path.display())))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Written files, reported in the final manifest line.
pub struct Outputs {
    command: &'static str,
    paths: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            paths: Vec::new(),
        }
    }

    pub fn write(&mut self, path: PathBuf, bytes: &[u8]) -> CliResult<()> {
        fs::write(&path, bytes).map_err(|e| anyhow!("writing {}: {e}", path.display()))?;
        if !self.paths.contains(&path) {
            self.paths.push(path);
        }
        Ok(())
    }

    pub fn manifest_line(&self) -> String {
        let paths: Vec<String> = self.paths.iter().map(|p| p.display().to_string()).collect();
        format!(
            "manifest {}",
            serde_json::json!({ "command": self.command, "outputs": paths })
        )
    }
}

pub fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(anyhow!("creating {}: {e}", dir.display())))
}

/// `lo:hi` in Hz.
pub fn parse_band(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("band {s:?} is not lo:hi"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad lower edge {lo:?}"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad upper edge {hi:?}"))?;
    Ok((lo, hi))
}
