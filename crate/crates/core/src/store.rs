//! File-backed canonical store.
//!
//! ```text
//! <root>/records/<pct-encoded persistent_id>.json   canonical SourceRecord
//! <root>/chunks/<pct-encoded persistent_id>.json    chunks of that record
//! <root>/graph/<pct-encoded collection_id>.json     graph + communities
//! <root>/index/<pct-encoded collection_id>.vec      vector index
//! ```
//!
//! One writer at a time; readers see whole files because every write goes
//! through a temporary file and a rename.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Chunk, SourceRecord};

const FILE_NAME_SET: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'_');

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store unavailable: {0}")]
    Unavailable(String),
    #[error("store entry corrupt: {0}")]
    Corrupt(String),
}

fn unavailable(path: &Path, e: io::Error) -> StoreError {
    StoreError::Unavailable(format!("{}: {e}", path.display()))
}

pub fn encode_key(key: &str) -> String {
    utf8_percent_encode(key, FILE_NAME_SET).to_string()
}

pub fn decode_key(encoded: &str) -> String {
    percent_decode_str(encoded).decode_utf8_lossy().into_owned()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpsertKind {
    Inserted,
    Updated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub persistent_id: String,
    pub status: UpsertKind,
    pub chunk_count: usize,
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

impl Store {
    /// Opens (creating if needed) a store rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let store = Store { root: root.into() };
        for dir in ["records", "chunks", "graph", "index"] {
            let path = store.root.join(dir);
            fs::create_dir_all(&path).map_err(|e| unavailable(&path, e))?;
        }
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn record_path(&self, persistent_id: &str) -> PathBuf {
        self.root.join("records").join(format!("{}.json", encode_key(persistent_id)))
    }

    fn chunks_path(&self, persistent_id: &str) -> PathBuf {
        self.root.join("chunks").join(format!("{}.json", encode_key(persistent_id)))
    }

    pub fn graph_path(&self, collection_id: &str) -> PathBuf {
        self.root.join("graph").join(format!("{}.json", encode_key(collection_id)))
    }

    pub fn index_path(&self, collection_id: &str) -> PathBuf {
        self.root.join("index").join(format!("{}.vec", encode_key(collection_id)))
    }

    /// Inserts or replaces a record together with its chunks. Previous
    /// chunks of the record are discarded.
    pub fn upsert_source(&self, record: &SourceRecord, chunks: &[Chunk]) -> Result<IngestReport, StoreError> {
        record
            .validate()
            .map_err(|e| StoreError::Corrupt(format!("refusing invalid record: {e}")))?;
        let record_path = self.record_path(&record.persistent_id);
        let status = if record_path.exists() { UpsertKind::Updated } else { UpsertKind::Inserted };
        let chunks_json = serde_json::to_vec_pretty(chunks).expect("chunks serialize");
        let chunks_path = self.chunks_path(&record.persistent_id);
        write_atomic(&chunks_path, &chunks_json).map_err(|e| unavailable(&chunks_path, e))?;
        write_atomic(&record_path, record.to_canonical_json().as_bytes()).map_err(|e| unavailable(&record_path, e))?;
        Ok(IngestReport {
            persistent_id: record.persistent_id.clone(),
            status,
            chunk_count: chunks.len(),
        })
    }

    pub fn get_record(&self, persistent_id: &str) -> Result<Option<SourceRecord>, StoreError> {
        let path = self.record_path(persistent_id);
        match fs::read_to_string(&path) {
            Ok(text) => SourceRecord::from_canonical_json(&text)
                .map(Some)
                .map_err(|e| StoreError::Corrupt(format!("{}: {e}", path.display()))),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(unavailable(&path, e)),
        }
    }

    pub fn chunks_of(&self, persistent_id: &str) -> Result<Vec<Chunk>, StoreError> {
        let path = self.chunks_path(persistent_id);
        match fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes).map_err(|e| StoreError::Corrupt(format!("{}: {e}", path.display()))),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(vec![]),
            Err(e) => Err(unavailable(&path, e)),
        }
    }

    /// All records, sorted by persistent id.
    pub fn records(&self) -> Result<Vec<SourceRecord>, StoreError> {
        let dir = self.root.join("records");
        let mut records = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| unavailable(&dir, e))? {
            let path = entry.map_err(|e| unavailable(&dir, e))?.path();
            if path.extension().is_none_or(|ext| ext != "json") {
                continue;
            }
            let text = fs::read_to_string(&path).map_err(|e| unavailable(&path, e))?;
            records.push(
                SourceRecord::from_canonical_json(&text)
                    .map_err(|e| StoreError::Corrupt(format!("{}: {e}", path.display())))?,
            );
        }
        records.sort_by(|a, b| a.persistent_id.cmp(&b.persistent_id));
        Ok(records)
    }

    pub fn records_in(&self, collection_id: &str) -> Result<Vec<SourceRecord>, StoreError> {
        Ok(self
            .records()?
            .into_iter()
            .filter(|r| r.collection_id == collection_id)
            .collect())
    }

    pub fn collections(&self) -> Result<Vec<String>, StoreError> {
        let mut ids: Vec<String> = self.records()?.into_iter().map(|r| r.collection_id).collect();
        ids.sort();
        ids.dedup();
        Ok(ids)
    }

    pub fn load_corpus(&self, collection_id: &str) -> Result<Corpus, StoreError> {
        let mut corpus = Corpus::default();
        for record in self.records_in(collection_id)? {
            for chunk in self.chunks_of(&record.persistent_id)? {
                corpus.chunks.insert(chunk.chunk_id.clone(), chunk);
            }
            corpus.records.insert(record.persistent_id.clone(), record);
        }
        Ok(corpus)
    }
}

/// In-memory view of one collection's records and chunks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub records: BTreeMap<String, SourceRecord>,
    pub chunks: BTreeMap<String, Chunk>,
}

impl Corpus {
    pub fn from_parts(records: Vec<SourceRecord>, chunks: Vec<Chunk>) -> Self {
        Corpus {
            records: records.into_iter().map(|r| (r.persistent_id.clone(), r)).collect(),
            chunks: chunks.into_iter().map(|c| (c.chunk_id.clone(), c)).collect(),
        }
    }

    pub fn chunk(&self, chunk_id: &str) -> Option<&Chunk> {
        self.chunks.get(chunk_id)
    }

    pub fn record(&self, persistent_id: &str) -> Option<&SourceRecord> {
        self.records.get(persistent_id)
    }
}
