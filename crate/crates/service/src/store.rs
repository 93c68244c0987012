//! Session registry with optional on-disk persistence.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use matchkit::session::Session;
use matchkit::{parse, serialize, ParseMode};

pub type SharedSession = Arc<Mutex<Session>>;

#[derive(Default)]
pub struct Store {
    sessions: RwLock<HashMap<String, SharedSession>>,
    dir: Option<PathBuf>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-')
}

impl Store {
    pub fn in_memory() -> Self {
        Store::default()
    }

    /// Loads every `<id>.match` under `dir` (created if missing).
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut sessions = HashMap::new();
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().is_none_or(|e| e != "match") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).filter(|s| valid_id(s)) else {
                continue;
            };
            let text = fs::read_to_string(&path)?;
            let version = fs::read_to_string(path.with_extension("version"))
                .ok()
                .and_then(|v| v.trim().parse().ok())
                .unwrap_or(1);
            let mut session = Session::new(id, parse(&text, ParseMode::Lenient).0);
            session.version = version;
            log::info!("restored session {id} at version {version}");
            sessions.insert(id.to_string(), Arc::new(Mutex::new(session)));
        }
        Ok(Store {
            sessions: RwLock::new(sessions),
            dir: Some(dir),
        })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn get(&self, id: &str) -> Option<SharedSession> {
        self.sessions.read().unwrap().get(id).cloned()
    }

    pub fn insert(&self, session: Session) -> io::Result<SharedSession> {
        self.persist(&session)?;
        let id = session.id.clone();
        let shared = Arc::new(Mutex::new(session));
        self.sessions.write().unwrap().insert(id, shared.clone());
        Ok(shared)
    }

    /// Writes the session's file and version. A no-op without a state dir.
    pub fn persist(&self, session: &Session) -> io::Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let base = dir.join(&session.id);
        fs::write(base.with_extension("match"), serialize(&session.document))?;
        fs::write(base.with_extension("version"), session.version.to_string())
    }
}
