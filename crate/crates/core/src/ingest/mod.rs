//! Ingestion: harvesting raw metadata, parsing it into [`SourceRecord`]s,
//! linking field values to vocabulary concepts and chunking text.

mod chunk;
mod croissant;
mod fetch;
mod native;
mod record;
mod vocab;

use serde_json::Value;
use thiserror::Error;

pub use chunk::{chunk_record, chunk_text, reassemble, Chunk, ChunkConfig};
pub use croissant::{parse_croissant, to_croissant};
pub use fetch::{fetch_collection, Endpoint, RawDocument, RepositoryClient};
pub use native::parse_native_json;
pub use record::{
    FieldSpec, FileEntry, SchemaRegistry, SourceRecord, FIELD_ART_FORM, FIELD_INTERACTION_MODES,
    FIELD_MODALITIES, FIELD_TOPIC_NAME, FIELD_TOPIC_TYPE,
};
pub use vocab::{link_concepts, Concept, ConceptLink, MatchKind, Vocabulary, ALT_LABEL_SCORE};

use crate::store::{IngestReport, Store, StoreError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("repository unavailable: {0}")]
    RepoUnavailable(String),
    #[error("collection not found: {0}")]
    CollectionNotFound(String),
    #[error("malformed page: {0}")]
    MalformedPage(String),
    #[error("missing field: {0}")]
    MissingField(String),
    #[error("not a Croissant dataset: {0}")]
    NotCroissant(String),
    #[error("unknown schema version: {0}")]
    UnknownSchemaVersion(String),
    #[error("bad chunk config: {0}")]
    BadConfig(String),
    #[error("invalid vocabulary: {0}")]
    VocabularyInvalid(String),
    #[error("store unavailable: {0}")]
    StoreUnavailable(String),
}

impl From<StoreError> for IngestError {
    fn from(e: StoreError) -> Self {
        IngestError::StoreUnavailable(e.to_string())
    }
}

/// Croissant when the document carries a JSON-LD `@context`, native export
/// otherwise.
pub fn parse_document(doc: &Value, registry: &SchemaRegistry) -> Result<SourceRecord, IngestError> {
    if doc.get("@context").is_some() {
        parse_croissant(doc, registry)
    } else {
        parse_native_json(doc, registry)
    }
}

/// Parses raw bytes; anything that is not JSON is a malformed page.
pub fn parse_document_bytes(bytes: &[u8], registry: &SchemaRegistry) -> Result<SourceRecord, IngestError> {
    let doc: Value = serde_json::from_slice(bytes).map_err(|e| IngestError::MalformedPage(e.to_string()))?;
    parse_document(&doc, registry)
}

pub fn load_vocabulary(path: &std::path::Path) -> Result<Vocabulary, IngestError> {
    let bytes = std::fs::read(path).map_err(|e| IngestError::VocabularyInvalid(format!("{}: {e}", path.display())))?;
    let doc: Value = serde_json::from_slice(&bytes)
        .map_err(|e| IngestError::VocabularyInvalid(format!("{}: {e}", path.display())))?;
    Vocabulary::from_json_ld(&doc)
}

pub fn upsert_source(store: &Store, record: &SourceRecord, chunks: &[Chunk]) -> Result<IngestReport, IngestError> {
    record.validate()?;
    Ok(store.upsert_source(record, chunks)?)
}

/// Summary of one ingest run.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct IngestSummary {
    pub collection_id: String,
    pub records: usize,
    pub inserted: usize,
    pub updated: usize,
    pub chunks: usize,
    /// `persistent_id: field` for custom fields outside the schema registry.
    pub unknown_fields: Vec<String>,
}

/// Fetches, parses, chunks and stores a whole collection. Records are
/// assigned to `collection_id` regardless of what the source document says.
pub fn ingest_collection(
    store: &Store,
    endpoint: &Endpoint,
    collection_id: &str,
    registry: &SchemaRegistry,
    chunking: ChunkConfig,
) -> Result<IngestSummary, IngestError> {
    chunking.validate()?;
    let docs = fetch_collection(endpoint, collection_id)?;
    let mut summary = IngestSummary { collection_id: collection_id.to_string(), ..Default::default() };
    for doc in docs {
        let mut record = parse_document(&doc.body, registry)?;
        record.collection_id = collection_id.to_string();
        let chunks = chunk_record(&record, chunking)?;
        for field in registry.unknown_fields(&record) {
            summary.unknown_fields.push(format!("{}: {field}", record.persistent_id));
        }
        let report = upsert_source(store, &record, &chunks)?;
        summary.records += 1;
        summary.chunks += report.chunk_count;
        match report.status {
            crate::store::UpsertKind::Inserted => summary.inserted += 1,
            crate::store::UpsertKind::Updated => summary.updated += 1,
        }
    }
    Ok(summary)
}
