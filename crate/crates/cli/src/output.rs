//! Output files: metadata header above every CSV, optional JSON sidecars.

use std::path::{Path, PathBuf};

use pfzeros::io::Metadata;

use crate::CliError;

pub struct Output {
    dir: PathBuf,
    json: bool,
}

impl Output {
    pub fn new(dir: PathBuf, json: bool) -> Result<Self, CliError> {
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir, json })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&self, path: &Path, text: &str) -> Result<(), CliError> {
        std::fs::write(path, text).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }

    pub fn csv(&self, name: &str, meta: &Metadata, body: &str) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        self.write(&path, &format!("{}{body}", meta.header()))?;
        Ok(path)
    }

    /// Sidecar JSON, written only with `--json`.
    pub fn sidecar<T: serde::Serialize>(&self, name: &str, meta: &Metadata, value: &T) -> Result<(), CliError> {
        if self.json {
            self.always_json(name, meta, value)?;
        }
        Ok(())
    }

    pub fn always_json<T: serde::Serialize>(&self, name: &str, meta: &Metadata, value: &T) -> Result<(), CliError> {
        let doc = serde_json::json!({ "metadata": meta_map(meta), "data": value });
        let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Runtime(e.to_string()))?;
        self.write(&self.path(name), &text)
    }
}

fn meta_map(meta: &Metadata) -> serde_json::Map<String, serde_json::Value> {
    meta.entries().iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect()
}
