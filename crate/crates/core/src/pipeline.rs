//! Whole-collection index builds and loading of built collections.

use serde::Serialize;
use thiserror::Error;

use crate::ingest::{link_concepts, SchemaRegistry, Vocabulary};
use crate::kgraph::{build_graph, detect_communities, summarize_all, GraphBundle, GraphError};
use crate::modelgw::Gateway;
use crate::scalar::Scalar;
use crate::store::{Corpus, Store, StoreError};
use crate::trace::Trace;
use crate::vindex::{embed_texts, load_index, persist_index, Embedder, IndexError, VectorIndex};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("collection {0} has no records; ingest it first")]
    UnknownCollection(String),
    #[error("collection {collection} is not indexed: missing index file {path}; run `index build` first")]
    NotIndexed { collection: String, path: String },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BuildReport {
    pub collection_id: String,
    pub records: usize,
    pub chunks: usize,
    pub concept_links: usize,
    pub nodes: usize,
    pub edges: usize,
    pub communities: usize,
    pub summaries: usize,
    pub model_tag: String,
    pub dim: usize,
}

/// Everything a strategy run needs for one collection.
pub struct Collection<S: Scalar = f32> {
    pub collection_id: String,
    pub corpus: Corpus,
    pub index: VectorIndex<S>,
    pub graph: Option<GraphBundle>,
}

/// Embeds all chunks of the corpus. An empty corpus is probed once so the
/// index still knows the embedder's dimension.
pub fn embed_corpus<S: Scalar>(corpus: &Corpus, embedder: &dyn Embedder<S>) -> Result<VectorIndex<S>, IndexError> {
    let texts: Vec<String> = corpus.chunks.values().map(|c| c.text.clone()).collect();
    let probe = if texts.is_empty() { vec!["probe".to_string()] } else { texts };
    let vectors = embed_texts(embedder, &probe, None)?;
    let dim = vectors.first().map(|v| v.dim()).unwrap_or(0);
    let mut index = VectorIndex::new(dim, embedder.model_tag());
    if !corpus.chunks.is_empty() {
        for (id, v) in corpus.chunks.keys().zip(vectors) {
            index.insert(id.clone(), v)?;
        }
    }
    Ok(index)
}

/// Links vocabulary concepts, builds the graph and its communities,
/// optionally summarizes them, embeds every chunk, and writes the index and
/// graph files into the store.
pub fn build_collection<S: Scalar>(
    store: &Store,
    collection_id: &str,
    embedder: &dyn Embedder<S>,
    vocabulary: Option<&Vocabulary>,
    registry: &SchemaRegistry,
    summarizer: Option<&Gateway>,
    trace: &mut Trace,
) -> Result<BuildReport, PipelineError> {
    let corpus = store.load_corpus(collection_id)?;
    if corpus.records.is_empty() {
        return Err(PipelineError::UnknownCollection(collection_id.to_string()));
    }
    let records: Vec<_> = corpus.records.values().cloned().collect();
    let links: Vec<_> = match vocabulary {
        Some(v) => records.iter().flat_map(|r| link_concepts(r, v, registry)).collect(),
        None => vec![],
    };
    let graph = build_graph(&records, &links)?;
    let mut assignment = detect_communities(&graph);
    if let Some(gw) = summarizer {
        summarize_all(&mut assignment, &graph, gw, trace)?;
    }
    let index = embed_corpus(&corpus, embedder)?;
    persist_index(&index, &store.index_path(collection_id))?;
    let bundle = GraphBundle { collection_id: collection_id.to_string(), graph, assignment };
    bundle.save(&store.graph_path(collection_id))?;
    Ok(BuildReport {
        collection_id: collection_id.to_string(),
        records: corpus.records.len(),
        chunks: corpus.chunks.len(),
        concept_links: links.len(),
        nodes: bundle.graph.node_count(),
        edges: bundle.graph.edge_count(),
        communities: bundle.assignment.communities.len(),
        summaries: bundle.assignment.communities.values().filter(|c| c.summary.is_some()).count(),
        model_tag: index.model_tag().to_string(),
        dim: index.dim(),
    })
}

/// Whether the index file of a collection exists.
pub fn is_indexed(store: &Store, collection_id: &str) -> bool {
    store.index_path(collection_id).exists()
}

/// Loads the corpus, index and (if present) graph of a built collection.
pub fn load_collection<S: Scalar>(store: &Store, collection_id: &str) -> Result<Collection<S>, PipelineError> {
    let index_path = store.index_path(collection_id);
    if !index_path.exists() {
        return Err(PipelineError::NotIndexed {
            collection: collection_id.to_string(),
            path: index_path.display().to_string(),
        });
    }
    let index = load_index(&index_path)?;
    let corpus = store.load_corpus(collection_id)?;
    let graph_path = store.graph_path(collection_id);
    let graph = if graph_path.exists() { Some(GraphBundle::load(&graph_path)?) } else { None };
    Ok(Collection { collection_id: collection_id.to_string(), corpus, index, graph })
}
