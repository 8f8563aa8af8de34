use serde::{Deserialize, Serialize};

use super::record::SourceRecord;
use super::IngestError;

/// Indexable window of a record's text. Offsets count Unicode scalar values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub chunk_id: String,
    pub source_id: String,
    pub text: String,
    pub char_start: usize,
    pub char_end: usize,
}

impl Chunk {
    pub fn make_id(source_id: &str, ordinal: usize) -> String {
        format!("{source_id}#{ordinal}")
    }

    pub fn ordinal(&self) -> Option<usize> {
        self.chunk_id.rsplit_once('#').and_then(|(_, n)| n.parse().ok())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkConfig {
    pub chunk_chars: usize,
    pub overlap_chars: usize,
}

impl Default for ChunkConfig {
    fn default() -> Self {
        ChunkConfig { chunk_chars: 800, overlap_chars: 200 }
    }
}

impl ChunkConfig {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.chunk_chars == 0 || self.overlap_chars >= self.chunk_chars {
            return Err(IngestError::BadConfig(format!(
                "need 0 <= overlap_chars < chunk_chars, got overlap {} chunk {}",
                self.overlap_chars, self.chunk_chars
            )));
        }
        Ok(())
    }

    pub fn stride(&self) -> usize {
        self.chunk_chars - self.overlap_chars
    }
}

/// Splits `text` into fixed-stride windows: one starting at every multiple
/// of the stride below the text length.
pub fn chunk_text(source_id: &str, text: &str, cfg: ChunkConfig) -> Result<Vec<Chunk>, IngestError> {
    cfg.validate()?;
    let chars: Vec<char> = text.chars().collect();
    let mut chunks = Vec::new();
    let mut start = 0;
    while start < chars.len() {
        let end = (start + cfg.chunk_chars).min(chars.len());
        chunks.push(Chunk {
            chunk_id: Chunk::make_id(source_id, chunks.len()),
            source_id: source_id.to_string(),
            text: chars[start..end].iter().collect(),
            char_start: start,
            char_end: end,
        });
        start += cfg.stride();
    }
    Ok(chunks)
}

pub fn chunk_record(record: &SourceRecord, cfg: ChunkConfig) -> Result<Vec<Chunk>, IngestError> {
    chunk_text(&record.persistent_id, &record.indexable_text(), cfg)
}

/// Inverse of chunking: concatenates chunks in ordinal order with the
/// overlapping prefix of each removed.
pub fn reassemble(chunks: &[Chunk]) -> String {
    let mut ordered: Vec<&Chunk> = chunks.iter().collect();
    ordered.sort_by_key(|c| c.ordinal().unwrap_or(usize::MAX));
    let mut out = String::new();
    let mut covered = 0;
    for c in ordered {
        if c.char_end <= covered {
            continue;
        }
        let skip = covered.saturating_sub(c.char_start);
        out.extend(c.text.chars().skip(skip));
        covered = c.char_end;
    }
    out
}
