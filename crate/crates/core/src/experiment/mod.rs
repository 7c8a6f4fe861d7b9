//! Reproducible, file-producing commands.
//!
//! Each command takes a serializable config and an output directory. Besides
//! its results the directory receives `config.json` (the effective config) and
//! `manifest.json` (input hashes and the schema version of every output).
//! Nothing written depends on wall-clock time or absolute paths.

mod generate;
mod rl;
mod select;
mod train;

pub use generate::run_generate;
pub use rl::{run_rl, EffectSource, RlCommandConfig, RlSummary};
pub use select::{run_select, SelectCommandConfig};
pub use train::{fold_plan, run_eval, run_train, DataSpec, EvalCommandConfig, TrainCommandConfig};

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;
pub const THREADS_ENV: &str = "NUDGEOPT_THREADS";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!(
                "unknown format `{other}` (csv, json)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub manifest_version: u32,
    pub command: String,
    pub seed: u64,
    /// Input file name to its SHA-256.
    pub inputs: BTreeMap<String, String>,
    /// Output file name to its versioned schema id.
    pub outputs: BTreeMap<String, String>,
}

/// Output directory of one command run.
pub struct RunDir {
    dir: PathBuf,
    pub format: Format,
    manifest: Manifest,
}

impl RunDir {
    pub fn create(dir: &Path, format: Format, command: &str, seed: u64) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            format,
            manifest: Manifest {
                manifest_version: MANIFEST_VERSION,
                command: command.to_string(),
                seed,
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
            },
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Hashes `path` into the manifest under its file name.
    pub fn input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let name = path.file_name().map_or_else(
            || path.display().to_string(),
            |n| n.to_string_lossy().into_owned(),
        );
        self.manifest
            .inputs
            .insert(name, hex::encode(Sha256::digest(&bytes)));
        Ok(())
    }

    /// Records `name` as written with `schema`, returning its path.
    pub fn output(&mut self, name: &str, schema: &str) -> PathBuf {
        self.manifest
            .outputs
            .insert(name.to_string(), schema.to_string());
        self.path(name)
    }

    pub fn write_json<T: Serialize + ?Sized>(
        &mut self,
        name: &str,
        schema: &str,
        value: &T,
    ) -> Result<()> {
        let path = self.output(name, schema);
        write_json(&path, value)
    }

    pub fn write_csv(
        &mut self,
        name: &str,
        schema: &str,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> Result<()> {
        let path = self.output(name, schema);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| Error::io(&path, e))
    }

    /// Writes the effective config and the manifest.
    pub fn finish<C: Serialize>(mut self, config: &C) -> Result<Manifest> {
        self.write_json("config.json", "config/v1", config)?;
        let path = self.path("manifest.json");
        write_json(&path, &self.manifest)?;
        Ok(self.manifest)
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Caps the global rayon pool at `NUDGEOPT_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize =
        raw.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
            Error::Config(format!("{THREADS_ENV}=`{raw}` is not a positive integer"))
        })?;
    // A second initialisation is harmless; keep the first pool.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

pub(crate) fn create_file(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

/// The config at `path`, or the default when no file is given.
pub fn load_or_default<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    path.map_or_else(|| Ok(T::default()), load_config)
}
