//! Embedding and exact cosine nearest-neighbour search.

mod embed;
mod index;
mod persist;
mod vector;

use thiserror::Error;

pub use embed::{build_index, embed_texts, Embedder, HashEmbedder, HttpEmbedder};
pub use index::VectorIndex;
pub use persist::{decode_index, encode_index, load_index, persist_index};
pub use vector::{cosine, dot, normalize, EmbeddingVector, NORM_TOLERANCE};

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("cannot normalize a zero vector")]
    ZeroVector,
    #[error("vector contains NaN or infinity")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("embedding model mismatch: index built with {index}, embedder is {embedder}")]
    ModelMismatch { index: String, embedder: String },
    #[error("embedding endpoint timed out: {0}")]
    ModelTimeout(String),
    #[error("embedding endpoint error: {0}")]
    EndpointError(String),
    #[error("index file corrupt: {0}")]
    IndexCorrupt(String),
    #[error("index i/o: {0}")]
    Io(String),
}
