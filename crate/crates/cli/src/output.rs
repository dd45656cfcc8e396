//! CSV tables and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::{CliError, VERSION};

/// 17 significant digits.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Provenance written as the first line of every table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stamp {
    pub config_hash: String,
    pub seed: u64,
}

impl Stamp {
    fn comment(&self) -> String {
        format!("# config_sha256={} seed={} version={}\n", self.config_hash, self.seed, VERSION)
    }
}

/// Writes `header` and `rows` to `dir/name` after the stamp comment.
pub fn write_csv(dir: &Path, name: &str, stamp: &Stamp, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut file = fs::File::create(&path)?;
    file.write_all(stamp.comment().as_bytes())?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(path)
}

/// Config hash, seed, tool version and emitted files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunManifest {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(stamp: &Stamp) -> Self {
        Self {
            config_hash: stamp.config_hash.clone(),
            seed: stamp.seed,
            version: VERSION.to_string(),
            outputs: Vec::new(),
        }
    }

    /// `manifest.txt` in `dir`, one `key = value` per line.
    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        fs::create_dir_all(dir)?;
        let mut text = format!(
            "config_sha256 = {}\nseed = {}\nversion = {}\n",
            self.config_hash, self.seed, self.version
        );
        for o in &self.outputs {
            let name = o.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            text.push_str(&format!("output = {name}\n"));
        }
        let path = dir.join("manifest.txt");
        fs::write(&path, text)?;
        Ok(path)
    }
}
