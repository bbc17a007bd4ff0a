//! CSV datasets and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_NAME: &str = "manifest.toml";

/// Full-precision scientific notation; shortest text that round-trips.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A homogeneous table destined for one CSV file. Column names carry units.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Dataset {
    pub fn new(name: &str, header: &[&'static str]) -> Self {
        Self { name: name.to_string(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width differs from header in {}", self.name);
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("write to memory");
        for row in &self.rows {
            w.write_record(row).expect("write to memory");
        }
        w.into_inner().expect("flush to memory")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
    pub rows: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub scenario: String,
    pub scenario_sha256: String,
    pub timestamp_unix: u64,
    pub threads: usize,
    pub status: String,
    pub parameters: BTreeMap<String, String>,
    pub tolerances: BTreeMap<String, f64>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn read(dir: &Path) -> Result<Option<Self>, CliError> {
        let path = dir.join(MANIFEST_NAME);
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        toml::from_str(&text)
            .map(Some)
            .map_err(|e| CliError::Validation(format!("{} is not a cwpath manifest: {}", path.display(), e.message())))
    }
}

/// Makes `dir` ready for a new run. Files listed by a previous manifest are
/// removed; anything else in the directory is an error.
pub fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    if let Some(old) = RunManifest::read(dir)? {
        for f in &old.files {
            let p = dir.join(&f.name);
            if p.is_file() {
                fs::remove_file(&p).map_err(|e| CliError::io(&p, e))?;
            }
        }
        let p = dir.join(MANIFEST_NAME);
        fs::remove_file(&p).map_err(|e| CliError::io(&p, e))?;
    }
    let mut stray: Vec<String> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    if !stray.is_empty() {
        stray.sort();
        return Err(CliError::Validation(format!(
            "output directory {} holds files from another source: {}",
            dir.display(),
            stray.join(", ")
        )));
    }
    Ok(())
}

/// Writes every dataset, then the manifest listing them.
pub fn write_outputs(dir: &Path, datasets: &[Dataset], mut manifest: RunManifest) -> Result<RunManifest, CliError> {
    prepare_dir(dir)?;
    manifest.files.clear();
    for d in datasets {
        let bytes = d.to_bytes();
        let path = dir.join(&d.name);
        fs::write(&path, &bytes).map_err(|e| CliError::io(&path, e))?;
        manifest.files.push(FileEntry {
            name: d.name.clone(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
            rows: d.rows.len() as u64,
        });
    }
    let text = toml::to_string(&manifest).map_err(|e| CliError::Validation(format!("manifest: {e}")))?;
    let path = dir.join(MANIFEST_NAME);
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}
