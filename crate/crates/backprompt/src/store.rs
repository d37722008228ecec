//! JSON Lines persistence for transcripts and recorded exchanges.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use backprompt_core::harness::{ModelError, RecordEntry, RecordSink};
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        source: serde_json::Error,
    },
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One compact JSON object per line, each line ending in `\n`.
pub fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), StoreError> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(to_jsonl(items).as_bytes()).map_err(io_err(path))
}

/// Parse JSON Lines text. Blank lines are skipped.
pub fn parse_jsonl<T: DeserializeOwned>(text: &str, path: &Path) -> Result<Vec<T>, StoreError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|source| StoreError::Json {
                path: path.to_path_buf(),
                line: i + 1,
                source,
            })
        })
        .collect()
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, StoreError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_jsonl(&text, path)
}

/// Shared in-memory record store. Entries are written out sorted by
/// stream and index, so the file does not depend on worker scheduling.
#[derive(Debug, Clone, Default)]
pub struct MemorySink(Arc<Mutex<Vec<RecordEntry>>>);

impl MemorySink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.lock().expect("record lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sorted(&self) -> Vec<RecordEntry> {
        let mut v = self.0.lock().expect("record lock").clone();
        v.sort_by(|a, b| a.stream.cmp(&b.stream).then(a.index.cmp(&b.index)));
        v
    }
}

impl RecordSink for MemorySink {
    fn append(&self, entry: RecordEntry) -> Result<(), ModelError> {
        self.0
            .lock()
            .map_err(|_| ModelError::Storage("record store lock poisoned".into()))?
            .push(entry);
        Ok(())
    }
}

/// Group recorded entries by stream name.
pub fn by_stream(entries: Vec<RecordEntry>) -> BTreeMap<String, Vec<RecordEntry>> {
    let mut map: BTreeMap<String, Vec<RecordEntry>> = BTreeMap::new();
    for e in entries {
        map.entry(e.stream.clone()).or_default().push(e);
    }
    map
}
