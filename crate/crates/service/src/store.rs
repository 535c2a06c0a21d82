//! On-disk layout under the data directory:
//!
//! ```text
//! datasets/<id>.csv        uploaded bytes
//! datasets/<id>.json       column roles
//! models/<id>/session.json weights, edits, constraints, revision
//! models/<id>/model.json   current model, when one exists
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Serialize};

use crate::error::{ApiError, ApiResult};

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> ApiResult<Self> {
        let root = root.into();
        fs::create_dir_all(root.join("datasets"))?;
        fs::create_dir_all(root.join("models"))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dataset_path(&self, id: &str, ext: &str) -> PathBuf {
        self.root.join("datasets").join(format!("{id}.{ext}"))
    }

    fn model_dir(&self, id: &str) -> PathBuf {
        self.root.join("models").join(id)
    }

    pub fn save_dataset<M: Serialize>(&self, id: &str, csv: &[u8], meta: &M) -> ApiResult<()> {
        write_atomic(&self.dataset_path(id, "csv"), csv)?;
        write_atomic(&self.dataset_path(id, "json"), &to_json(meta)?)?;
        Ok(())
    }

    pub fn save_session<S: Serialize>(&self, id: &str, session: &S) -> ApiResult<()> {
        let dir = self.model_dir(id);
        fs::create_dir_all(&dir)?;
        write_atomic(&dir.join("session.json"), &to_json(session)?)?;
        Ok(())
    }

    pub fn save_model_bytes(&self, id: &str, bytes: &[u8]) -> ApiResult<()> {
        let dir = self.model_dir(id);
        fs::create_dir_all(&dir)?;
        write_atomic(&dir.join("model.json"), bytes)?;
        Ok(())
    }

    /// `(id, csv bytes, meta)` for every stored dataset.
    pub fn load_datasets<M: DeserializeOwned>(&self) -> ApiResult<Vec<(String, Vec<u8>, M)>> {
        let mut out = Vec::new();
        for entry in sorted_entries(&self.root.join("datasets"))? {
            let Some(id) = entry.file_name().and_then(|s| s.to_str()).and_then(|s| s.strip_suffix(".json")) else {
                continue;
            };
            let meta = from_json(&fs::read(&entry)?)?;
            let csv = fs::read(self.dataset_path(id, "csv"))?;
            out.push((id.to_string(), csv, meta));
        }
        Ok(out)
    }

    /// `(id, session, model bytes)` for every stored model session.
    pub fn load_sessions<S: DeserializeOwned>(&self) -> ApiResult<Vec<(String, S, Option<Vec<u8>>)>> {
        let mut out = Vec::new();
        for dir in sorted_entries(&self.root.join("models"))? {
            let Some(id) = dir.file_name().and_then(|s| s.to_str()).map(str::to_string) else {
                continue;
            };
            let session_path = dir.join("session.json");
            if !session_path.is_file() {
                continue;
            }
            let session = from_json(&fs::read(session_path)?)?;
            let model_path = dir.join("model.json");
            let model = model_path.is_file().then(|| fs::read(model_path)).transpose()?;
            out.push((id, session, model));
        }
        Ok(out)
    }
}

fn sorted_entries(dir: &Path) -> ApiResult<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
    v.sort();
    Ok(v)
}

fn to_json<T: Serialize>(v: &T) -> ApiResult<Vec<u8>> {
    serde_json::to_vec_pretty(v).map_err(|e| ApiError::Storage(e.to_string()))
}

fn from_json<T: DeserializeOwned>(b: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(b).map_err(|e| ApiError::Storage(e.to_string()))
}
