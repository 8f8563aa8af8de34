//! Retrieval-augmented question answering over archived dataset
//! collections.
//!
//! Records are harvested from a repository (or fixture directory), linked
//! to controlled vocabularies, and indexed twice: as an exact cosine vector
//! index over text chunks and as a knowledge graph with summarized
//! communities. Questions are answered by pluggable RAG strategies that
//! return generated text, citations back to source records, and a full
//! trace of every retrieval and model call.

pub mod config;
pub mod evalkit;
pub mod ingest;
pub mod kgraph;
pub mod modelgw;
pub mod pipeline;
pub mod retrieval;
pub mod scalar;
pub mod store;
pub mod strategies;
pub mod text;
pub mod trace;
pub mod vindex;

pub use scalar::Scalar;

/// Single-precision index, the on-disk default.
pub type VectorIndex32 = vindex::VectorIndex<f32>;
pub type VectorIndex64 = vindex::VectorIndex<f64>;
pub type EmbeddingVector32 = vindex::EmbeddingVector<f32>;
pub type EmbeddingVector64 = vindex::EmbeddingVector<f64>;
