//! Append-only response cache.
//!
//! On disk the cache is JSON Lines, one [`CacheRecord`] per line:
//!
//! ```json
//! {"cache_key":"<sha256 hex>","provider_id":"mock:x","prompt":"...","response":[["3",0.4],["4",0.6]],"timestamp":1718000000}
//! ```
//!
//! Records are never rewritten. Inserting a key that already exists is a
//! no-op, so replaying the same run leaves the file unchanged.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{LlmError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub cache_key: String,
    pub provider_id: String,
    pub prompt: String,
    pub response: Vec<(String, f64)>,
    /// Unix seconds at insertion.
    pub timestamp: u64,
}

#[derive(Debug)]
struct Inner {
    entries: HashMap<String, CacheRecord>,
    file: Option<File>,
}

#[derive(Debug)]
pub struct ResponseCache {
    path: Option<PathBuf>,
    inner: Mutex<Inner>,
}

impl ResponseCache {
    pub fn in_memory() -> Self {
        ResponseCache {
            path: None,
            inner: Mutex::new(Inner {
                entries: HashMap::new(),
                file: None,
            }),
        }
    }

    /// Opens (or creates) a cache file and loads its records.
    pub fn open(path: &Path) -> Result<Self> {
        let err = |message: String| LlmError::Cache {
            path: path.display().to_string(),
            message,
        };
        let mut entries = HashMap::new();
        if path.exists() {
            let f = File::open(path).map_err(|e| err(e.to_string()))?;
            for (n, line) in BufReader::new(f).lines().enumerate() {
                let line = line.map_err(|e| err(e.to_string()))?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: CacheRecord = serde_json::from_str(&line)
                    .map_err(|e| err(format!("line {}: {e}", n + 1)))?;
                entries.entry(rec.cache_key.clone()).or_insert(rec);
            }
        }
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| err(e.to_string()))?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| err(e.to_string()))?;
        Ok(ResponseCache {
            path: Some(path.to_path_buf()),
            inner: Mutex::new(Inner {
                entries,
                file: Some(file),
            }),
        })
    }

    pub fn get(&self, key: &str) -> Option<CacheRecord> {
        self.inner.lock().unwrap().entries.get(key).cloned()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stores a record unless its key is already present. Each record is
    /// written with a single `write_all` of one complete line.
    pub fn insert(&self, record: CacheRecord) -> Result<()> {
        let mut inner = self.inner.lock().unwrap();
        if inner.entries.contains_key(&record.cache_key) {
            return Ok(());
        }
        if let Some(f) = inner.file.as_mut() {
            let mut line = serde_json::to_string(&record).map_err(|e| LlmError::Cache {
                path: self.path_string(),
                message: e.to_string(),
            })?;
            line.push('\n');
            f.write_all(line.as_bytes())
                .and_then(|_| f.flush())
                .map_err(|e| LlmError::Cache {
                    path: self.path_string(),
                    message: e.to_string(),
                })?;
        }
        inner.entries.insert(record.cache_key.clone(), record);
        Ok(())
    }

    fn path_string(&self) -> String {
        self.path
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "<memory>".into())
    }
}
