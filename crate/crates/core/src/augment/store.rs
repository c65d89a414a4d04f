use std::collections::{BTreeMap, HashSet};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::backend::AugmentedDescription;
use crate::error::{Error, Result};
use crate::kg::EntityId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoreRecord {
    pub node: EntityId,
    pub prompt_hash: String,
    pub backend: String,
    pub text: String,
}

impl From<AugmentedDescription> for StoreRecord {
    fn from(d: AugmentedDescription) -> Self {
        Self {
            node: d.node,
            prompt_hash: d.prompt_hash,
            backend: d.backend_id,
            text: d.text,
        }
    }
}

/// Append-only JSONL log of generated descriptions.
#[derive(Debug)]
pub struct AugmentationStore {
    path: PathBuf,
    records: Vec<StoreRecord>,
    keys: HashSet<(EntityId, String, String)>,
}

impl AugmentationStore {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut store = Self {
            path,
            records: Vec::new(),
            keys: HashSet::new(),
        };
        if store.path.exists() {
            let text = fs::read_to_string(&store.path).map_err(|e| Error::io(&store.path, e))?;
            for (n, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let rec: StoreRecord = serde_json::from_str(line).map_err(|e| {
                    Error::Format(format!("{}:{}: {e}", store.path.display(), n + 1))
                })?;
                store.remember(rec);
            }
        }
        Ok(store)
    }

    fn remember(&mut self, rec: StoreRecord) {
        self.keys
            .insert((rec.node, rec.prompt_hash.clone(), rec.backend.clone()));
        self.records.push(rec);
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn records(&self) -> &[StoreRecord] {
        &self.records
    }

    pub fn contains(&self, node: EntityId, prompt_hash: &str, backend: &str) -> bool {
        self.keys
            .contains(&(node, prompt_hash.to_string(), backend.to_string()))
    }

    /// Appends records in the order given.
    pub fn append(&mut self, records: Vec<StoreRecord>) -> Result<()> {
        if records.is_empty() {
            return Ok(());
        }
        let mut buf = Vec::new();
        for r in &records {
            serde_json::to_writer(&mut buf, r)?;
            buf.push(b'\n');
        }
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| Error::io(&self.path, e))?;
        f.write_all(&buf).map_err(|e| Error::io(&self.path, e))?;
        f.sync_data().map_err(|e| Error::io(&self.path, e))?;
        for r in records {
            self.remember(r);
        }
        Ok(())
    }

    /// Node → text for one backend; a later record for the same node wins.
    pub fn texts(&self, backend: &str) -> BTreeMap<EntityId, &str> {
        self.records
            .iter()
            .filter(|r| r.backend == backend)
            .map(|r| (r.node, r.text.as_str()))
            .collect()
    }

    /// Text generated for exactly this prompt.
    pub fn lookup(&self, node: EntityId, prompt_hash: &str, backend: &str) -> Option<&str> {
        self.records
            .iter()
            .rev()
            .find(|r| r.node == node && r.prompt_hash == prompt_hash && r.backend == backend)
            .map(|r| r.text.as_str())
    }
}
