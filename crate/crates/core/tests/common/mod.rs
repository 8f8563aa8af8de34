#![allow(dead_code)]

pub mod http;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use ghostwriter_core::ingest::{chunk_record, ChunkConfig, SourceRecord};
use ghostwriter_core::kgraph::{build_graph, detect_communities, GraphBundle};
use ghostwriter_core::modelgw::{Gateway, JudgeThresholds, LatencyClock, ScriptItem, ScriptedMock};
use ghostwriter_core::pipeline::embed_corpus;
use ghostwriter_core::store::Corpus;
use ghostwriter_core::strategies::RagContext;
use ghostwriter_core::vindex::{HashEmbedder, VectorIndex};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn record(id: &str, title: &str, description: &str, fields: &[(&str, &[&str])]) -> SourceRecord {
    SourceRecord {
        persistent_id: id.into(),
        title: title.into(),
        description: description.into(),
        custom_fields: fields
            .iter()
            .map(|(k, v)| (k.to_string(), v.iter().map(|s| s.to_string()).collect()))
            .collect::<BTreeMap<_, _>>(),
        file_manifest: vec![],
        collection_id: "demo".into(),
    }
}

/// Three small records: two share the topic "Inclusion", one is about
/// education.
pub fn demo_records() -> Vec<SourceRecord> {
    vec![
        record(
            "doi:1",
            "Haptic concert series",
            "Concerts felt through vibrating floors ZEBRA-7",
            &[("topic_name", &["Inclusion"]), ("modalities", &["haptic"])],
        ),
        record(
            "doi:2",
            "Sonification workshop",
            "Turning data into sound with code",
            &[("topic_name", &["Education"]), ("modalities", &["sound"])],
        ),
        record(
            "doi:3",
            "Inclusive dance recital",
            "Dance with audio description and sign language",
            &[("topic_name", &["Inclusion"]), ("modalities", &["visual"])],
        ),
    ]
}

pub struct Fixture {
    pub corpus: Corpus,
    pub index: VectorIndex<f32>,
    pub embedder: HashEmbedder,
    pub graph: GraphBundle,
}

pub fn fixture_from(records: Vec<SourceRecord>) -> Fixture {
    let chunks = records.iter().flat_map(|r| chunk_record(r, ChunkConfig::default()).unwrap()).collect();
    let graph = build_graph(&records, &[]).unwrap();
    let assignment = detect_communities(&graph);
    let corpus = Corpus::from_parts(records, chunks);
    let embedder = HashEmbedder::new(64);
    let index = embed_corpus(&corpus, &embedder).unwrap();
    Fixture { corpus, index, embedder, graph: GraphBundle { collection_id: "demo".into(), graph, assignment } }
}

pub fn demo() -> Fixture {
    fixture_from(demo_records())
}

pub fn scripted(items: Vec<ScriptItem>) -> (Arc<ScriptedMock>, Gateway) {
    let mock = Arc::new(ScriptedMock::new(items).unwrap());
    let gw = Gateway::new(mock.clone()).with_clock(LatencyClock::Frozen);
    (mock, gw)
}

pub fn replies(items: &[&str]) -> (Arc<ScriptedMock>, Gateway) {
    scripted(items.iter().map(|s| ScriptItem::reply(*s)).collect())
}

impl Fixture {
    pub fn ctx<'a>(&'a self, gw: &'a Gateway) -> RagContext<'a, f32> {
        RagContext {
            corpus: &self.corpus,
            index: &self.index,
            embedder: &self.embedder,
            generator: gw,
            judge: gw,
            graph: Some(&self.graph),
            thresholds: JudgeThresholds::default(),
        }
    }
}
