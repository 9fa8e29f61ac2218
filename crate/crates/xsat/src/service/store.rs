//! Write-through session files: `<id>.spec` with every clause, `<id>.json`
//! with the temporarily deleted clause ids, `<id>.tree` with the document,
//! and `index.json` listing the sessions.

use std::fs;
use std::io;
use std::path::PathBuf;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use xsat_core::textio::{parse_document_native, parse_spec, print_pattern, print_spec};

use super::{ClauseState, Session};

#[derive(Serialize, Deserialize, Default)]
struct Index {
    sessions: Vec<String>,
}

#[derive(Serialize, Deserialize, Default)]
struct SessionMeta {
    deleted: Vec<String>,
}

pub struct Store {
    dir: PathBuf,
    /// Serializes writes of the index.
    index: Mutex<()>,
}

fn invalid(message: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, message)
}

impl Store {
    pub fn open(dir: PathBuf) -> io::Result<Store> {
        fs::create_dir_all(&dir)?;
        Ok(Store {
            dir,
            index: Mutex::new(()),
        })
    }

    pub fn load(&self) -> io::Result<Vec<Session>> {
        let path = self.dir.join("index.json");
        if !path.exists() {
            return Ok(Vec::new());
        }
        let index: Index = serde_json::from_str(&fs::read_to_string(&path)?).map_err(|e| invalid(e.to_string()))?;
        let mut sessions = Vec::with_capacity(index.sessions.len());
        for id in index.sessions {
            let text = fs::read_to_string(self.dir.join(format!("{id}.spec")))?;
            let spec = parse_spec(&text).map_err(|errors| invalid(format!("{id}.spec: {}", errors[0])))?;
            let meta: SessionMeta = match fs::read_to_string(self.dir.join(format!("{id}.json"))) {
                Ok(t) => serde_json::from_str(&t).map_err(|e| invalid(e.to_string()))?,
                Err(e) if e.kind() == io::ErrorKind::NotFound => SessionMeta::default(),
                Err(e) => return Err(e),
            };
            let tree = self.dir.join(format!("{id}.tree"));
            let document = if tree.exists() {
                let text = fs::read_to_string(&tree)?;
                Some(parse_document_native(text.trim()).map_err(|e| invalid(format!("{id}.tree: {e}")))?)
            } else {
                None
            };
            let clauses = spec
                .into_clauses()
                .into_iter()
                .map(|c| {
                    let state = if meta.deleted.iter().any(|d| d == c.id.as_str()) {
                        ClauseState::Deleted
                    } else {
                        ClauseState::Active
                    };
                    (c, state)
                })
                .collect();
            sessions.push(Session { id, clauses, document });
        }
        Ok(sessions)
    }

    pub fn save(&self, s: &Session, all_ids: &[String]) -> io::Result<()> {
        fs::write(self.dir.join(format!("{}.spec", s.id)), print_spec(&s.all()))?;
        let meta = SessionMeta {
            deleted: s
                .clauses
                .iter()
                .filter(|(_, st)| *st == ClauseState::Deleted)
                .map(|(c, _)| c.id.as_str().to_string())
                .collect(),
        };
        fs::write(self.dir.join(format!("{}.json", s.id)), serde_json::to_string_pretty(&meta)?)?;
        if let Some(d) = &s.document {
            fs::write(self.dir.join(format!("{}.tree", s.id)), format!("{}\n", print_pattern(d)))?;
        }
        let _guard = self.index.lock().expect("index lock");
        let mut sessions = all_ids.to_vec();
        sessions.sort_by_key(|id| (id.len(), id.clone()));
        fs::write(self.dir.join("index.json"), serde_json::to_string_pretty(&Index { sessions })?)
    }
}
