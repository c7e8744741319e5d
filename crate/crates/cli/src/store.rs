//! Flat-file project store: one JSON document per project.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use apr_core::{RecommendationSet, RequirementsSpec};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectRecord {
    pub id: String,
    pub spec: RequirementsSpec,
    #[serde(default)]
    pub last_recommendation: Option<RecommendationSet>,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub updated_at: u64,
}

#[derive(Debug)]
pub enum StoreError {
    NotFound(String),
    Io(std::io::Error),
    Corrupt(String),
}

impl std::fmt::Display for StoreError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StoreError::NotFound(id) => write!(f, "no project {id}"),
            StoreError::Io(e) => write!(f, "project store I/O error: {e}"),
            StoreError::Corrupt(m) => write!(f, "corrupt project document: {m}"),
        }
    }
}

impl std::error::Error for StoreError {}

impl From<std::io::Error> for StoreError {
    fn from(e: std::io::Error) -> Self {
        StoreError::Io(e)
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Writes to one project are serialized by a per-id lock; reads of
/// different projects never contend.
#[derive(Debug)]
pub struct ProjectStore {
    dir: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl ProjectStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn lock_for(&self, id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(id.to_string()).or_default().clone()
    }

    /// Only canonical UUIDs map to files, so ids can never escape the store.
    fn path_for(&self, id: &str) -> Result<PathBuf, StoreError> {
        let uuid = Uuid::parse_str(id).map_err(|_| StoreError::NotFound(id.to_string()))?;
        if uuid.hyphenated().to_string() != id {
            return Err(StoreError::NotFound(id.to_string()));
        }
        Ok(self.dir.join(format!("{id}.json")))
    }

    fn write(&self, record: &ProjectRecord) -> Result<(), StoreError> {
        let path = self.path_for(&record.id)?;
        let tmp = path.with_extension("json.tmp");
        let mut json = serde_json::to_string_pretty(record).expect("project serializes");
        json.push('\n');
        fs::write(&tmp, json)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    fn read(&self, id: &str) -> Result<ProjectRecord, StoreError> {
        let path = self.path_for(id)?;
        let json = match fs::read_to_string(&path) {
            Ok(json) => json,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound(id.to_string()))
            }
            Err(e) => return Err(e.into()),
        };
        serde_json::from_str(&json).map_err(|e| StoreError::Corrupt(format!("{id}: {e}")))
    }

    /// Stores a new project. The caller validates the spec first.
    pub fn create(&self, spec: RequirementsSpec) -> Result<ProjectRecord, StoreError> {
        let t = now();
        let record = ProjectRecord {
            id: Uuid::new_v4().hyphenated().to_string(),
            spec,
            last_recommendation: None,
            created_at: t,
            updated_at: t,
        };
        let lock = self.lock_for(&record.id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        self.write(&record)?;
        Ok(record)
    }

    pub fn get(&self, id: &str) -> Result<ProjectRecord, StoreError> {
        let lock = self.lock_for(id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        self.read(id)
    }

    /// Read-modify-write under the project's lock.
    pub fn update(
        &self,
        id: &str,
        change: impl FnOnce(&mut ProjectRecord),
    ) -> Result<ProjectRecord, StoreError> {
        let lock = self.lock_for(id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut record = self.read(id)?;
        change(&mut record);
        record.updated_at = now().max(record.created_at);
        self.write(&record)?;
        Ok(record)
    }

    pub fn list_ids(&self) -> Result<Vec<String>, StoreError> {
        let mut ids: Vec<String> = fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                name.strip_suffix(".json").map(str::to_string)
            })
            .filter(|id| self.path_for(id).is_ok())
            .collect();
        ids.sort();
        Ok(ids)
    }
}
