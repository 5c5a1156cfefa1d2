//! File-backed session persistence. Only the config id and the answer map are
//! stored; snapshots are recomputed on restore.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use docasm_core::facts::FactValue;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersistedSession {
    pub id: String,
    pub config_id: String,
    pub answers: BTreeMap<u32, FactValue>,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store I/O on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("session record `{id}` is corrupt: {message}")]
    Corrupt { id: String, message: String },
    #[error("`{0}` is not a valid session id")]
    BadId(String),
}

const QUARANTINE: &str = "quarantine";

pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-')
}

#[derive(Debug)]
pub struct SessionStore {
    root: PathBuf,
    quarantined: Mutex<BTreeSet<String>>,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl SessionStore {
    /// Opens (creating if needed) a store rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(root.join(QUARANTINE)).map_err(io(&root))?;
        let quarantined = fs::read_dir(root.join(QUARANTINE))
            .map_err(io(&root))?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                e.file_name()
                    .to_str()
                    .and_then(|n| n.strip_suffix(".json"))
                    .map(String::from)
            })
            .collect();
        Ok(SessionStore {
            root,
            quarantined: Mutex::new(quarantined),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, id: &str) -> Result<PathBuf, StoreError> {
        if !is_valid_id(id) {
            return Err(StoreError::BadId(id.to_string()));
        }
        Ok(self.root.join(format!("{id}.json")))
    }

    /// Writes the record through a temporary file and an atomic rename.
    pub fn save(&self, record: &PersistedSession) -> Result<(), StoreError> {
        let path = self.path(&record.id)?;
        let tmp = self.root.join(format!(".{}.tmp", record.id));
        let bytes = serde_json::to_vec_pretty(record).expect("records serialize");
        let mut file = fs::File::create(&tmp).map_err(io(&tmp))?;
        file.write_all(&bytes).map_err(io(&tmp))?;
        file.sync_all().map_err(io(&tmp))?;
        fs::rename(&tmp, &path).map_err(io(&path))
    }

    /// Reads a record. Unreadable records are moved to the quarantine
    /// directory and reported as corrupt.
    pub fn load(&self, id: &str) -> Result<Option<PersistedSession>, StoreError> {
        let path = self.path(id)?;
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(io(&path)(e)),
        };
        match serde_json::from_slice::<PersistedSession>(&bytes) {
            Ok(record) if record.id == id => Ok(Some(record)),
            Ok(record) => Err(self.quarantine(id, format!("record names session `{}`", record.id))),
            Err(e) => Err(self.quarantine(id, e.to_string())),
        }
    }

    /// Moves a record aside so it no longer counts as a session.
    pub fn quarantine(&self, id: &str, message: String) -> StoreError {
        let from = self.root.join(format!("{id}.json"));
        let to = self.root.join(QUARANTINE).join(format!("{id}.json"));
        if let Err(e) = fs::rename(&from, &to) {
            tracing::error!(session = id, "cannot quarantine record: {e}");
        }
        tracing::warn!(session = id, "quarantined corrupt session record: {message}");
        self.quarantined.lock().unwrap().insert(id.to_string());
        StoreError::Corrupt {
            id: id.to_string(),
            message,
        }
    }

    /// Ids of all readable records; corrupt ones are quarantined on the way.
    pub fn scan(&self) -> Result<Vec<String>, StoreError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.root).map_err(io(&self.root))? {
            let entry = entry.map_err(io(&self.root))?;
            let name = entry.file_name();
            let Some(id) = name.to_str().and_then(|n| n.strip_suffix(".json")) else {
                continue;
            };
            if !is_valid_id(id) {
                continue;
            }
            match self.load(id) {
                Ok(Some(_)) => ids.push(id.to_string()),
                Ok(None) | Err(StoreError::Corrupt { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn quarantined(&self) -> Vec<String> {
        self.quarantined.lock().unwrap().iter().cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str) -> PersistedSession {
        PersistedSession {
            id: id.into(),
            config_id: "jurisdiction".into(),
            answers: [(1, FactValue::infer("8")), (2, FactValue::Boolean(true))]
                .into_iter()
                .collect(),
        }
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        store.save(&record("abc")).unwrap();
        assert_eq!(store.load("abc").unwrap(), Some(record("abc")));
        assert_eq!(store.load("missing").unwrap(), None);
        assert_eq!(store.scan().unwrap(), ["abc"]);
        assert!(matches!(store.load("../etc"), Err(StoreError::BadId(_))));
    }

    #[test]
    fn truncated_records_are_quarantined() {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        store.save(&record("good")).unwrap();
        let text = serde_json::to_string(&record("bad")).unwrap();
        fs::write(dir.path().join("bad.json"), &text[..text.len() / 2]).unwrap();
        assert_eq!(store.scan().unwrap(), ["good"]);
        assert_eq!(store.quarantined(), ["bad"]);
        assert!(dir.path().join("quarantine/bad.json").exists());
        assert_eq!(store.load("bad").unwrap(), None);

        let reopened = SessionStore::open(dir.path()).unwrap();
        assert_eq!(reopened.quarantined(), ["bad"]);
    }
}
