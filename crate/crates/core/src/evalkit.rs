//! Retrieval metrics over labeled suites, answer groundedness, and a
//! generator for synthetic marker corpora.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::store::Corpus;
use crate::strategies::{cited_tag_numbers, Answer};
use crate::vindex::{embed_texts, Embedder, IndexError, VectorIndex};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("evaluation suite has no cases")]
    EmptySuite,
    #[error("bad suite: {0}")]
    BadSuite(String),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("eval i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCase {
    pub question: String,
    #[serde(rename = "relevant")]
    pub relevant_source_ids: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EvalSuite {
    pub cases: Vec<EvalCase>,
}

impl EvalSuite {
    pub fn from_json(text: &str) -> Result<Self, EvalError> {
        serde_json::from_str(text).map_err(|e| EvalError::BadSuite(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let text = std::fs::read_to_string(path).map_err(|e| EvalError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite serializes")
    }
}

/// Something that ranks source records for a question.
pub trait RetrievalSystem {
    /// Source ids of the top-`k` retrieved chunks, in rank order. Repeats
    /// are allowed; the suite runner keeps the first occurrence.
    fn top_sources(&self, question: &str, k: usize) -> Result<Vec<String>, EvalError>;
}

/// Vector retrieval over a corpus, as used by the vanilla strategy.
pub struct VectorSystem<'a, S: Scalar = f32> {
    pub corpus: &'a Corpus,
    pub index: &'a VectorIndex<S>,
    pub embedder: &'a dyn Embedder<S>,
}

impl<S: Scalar> RetrievalSystem for VectorSystem<'_, S> {
    fn top_sources(&self, question: &str, k: usize) -> Result<Vec<String>, EvalError> {
        let tag = self.embedder.model_tag();
        if tag != self.index.model_tag() {
            return Err(IndexError::ModelMismatch { index: self.index.model_tag().into(), embedder: tag }.into());
        }
        if k == 0 || self.index.is_empty() {
            return Ok(vec![]);
        }
        let q = embed_texts(self.embedder, &[question.to_string()], Some(self.index.dim()))?.remove(0);
        let result = self.index.knn(&q, k)?;
        Ok(result
            .items
            .iter()
            .map(|i| self.corpus.chunk(&i.chunk_id).map(|c| c.source_id.clone()).unwrap_or_else(|| i.chunk_id.clone()))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub question: String,
    /// 1-based rank of the first relevant source, if any was retrieved.
    pub first_relevant_rank: Option<usize>,
    pub retrieved: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalMetrics {
    pub k: usize,
    pub hit_at_k: f64,
    pub mrr: f64,
    pub per_case: Vec<CaseResult>,
}

/// Mean of `1/rank`, counting absent ranks as 0.
pub fn mean_reciprocal_rank(ranks: &[Option<usize>]) -> f64 {
    if ranks.is_empty() {
        return 0.0;
    }
    ranks.iter().map(|r| r.map_or(0.0, |r| 1.0 / r as f64)).sum::<f64>() / ranks.len() as f64
}

/// hit@k and MRR over the suite. Ranks are positions in the deduplicated
/// list of sources behind the top-`k` chunks.
pub fn run_retrieval_suite(
    suite: &EvalSuite,
    system: &dyn RetrievalSystem,
    k: usize,
) -> Result<RetrievalMetrics, EvalError> {
    if suite.cases.is_empty() {
        return Err(EvalError::EmptySuite);
    }
    let mut per_case = Vec::with_capacity(suite.cases.len());
    for case in &suite.cases {
        let mut sources: Vec<String> = vec![];
        for s in system.top_sources(&case.question, k)? {
            if !sources.contains(&s) {
                sources.push(s);
            }
        }
        let first = sources.iter().position(|s| case.relevant_source_ids.contains(s)).map(|p| p + 1);
        per_case.push(CaseResult { question: case.question.clone(), first_relevant_rank: first, retrieved: sources });
    }
    let ranks: Vec<Option<usize>> = per_case.iter().map(|c| c.first_relevant_rank).collect();
    let hits = ranks.iter().filter(|r| r.is_some()).count();
    Ok(RetrievalMetrics {
        k,
        hit_at_k: hits as f64 / ranks.len() as f64,
        mrr: mean_reciprocal_rank(&ranks),
        per_case,
    })
}

/// Fraction of sentences in `text` that carry a tag from `valid_tags`.
/// Sentences end at `.`, `!` or `?`; blank pieces are not sentences.
pub fn groundedness_of(text: &str, valid_tags: &[&str]) -> f64 {
    let sentences: Vec<&str> =
        text.split(['.', '!', '?']).map(str::trim).filter(|s| !s.is_empty()).collect();
    if sentences.is_empty() {
        return 0.0;
    }
    let grounded = sentences
        .iter()
        .filter(|s| cited_tag_numbers(s).iter().any(|n| valid_tags.contains(&format!("S{n}").as_str())))
        .count();
    grounded as f64 / sentences.len() as f64
}

/// Groundedness of an answer against the blocks it was generated from.
pub fn groundedness(answer: &Answer) -> f64 {
    if answer.uncited {
        return 0.0;
    }
    groundedness_of(&answer.text, &answer.context_tags())
}

const SYLLABLES: [&str; 16] =
    ["zor", "blat", "quim", "vex", "dra", "mok", "pli", "thu", "gar", "nex", "sou", "kib", "fla", "wen", "tro", "jup"];

/// A pronounceable nonsense token such as `zorquimvex-4821`.
pub fn nonsense_marker(rng: &mut impl Rng) -> String {
    let word: String = (0..3).map(|_| *SYLLABLES.choose(rng).unwrap()).collect();
    format!("{word}-{:04}", rng.random_range(0..10_000))
}

/// Writes `count` Croissant records to `dir/records`, each carrying one
/// unique marker, plus `dir/suite.json` asking for every marker. Returns the
/// suite.
pub fn generate_marker_corpus(dir: &Path, count: usize, seed: u64) -> Result<EvalSuite, EvalError> {
    let io = |e: std::io::Error| EvalError::Io(format!("{}: {e}", dir.display()));
    let records = dir.join("records");
    std::fs::create_dir_all(&records).map_err(io)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut markers = BTreeSet::new();
    let mut suite = EvalSuite::default();
    for i in 0..count {
        let marker = loop {
            let m = nonsense_marker(&mut rng);
            if markers.insert(m.clone()) {
                break m;
            }
        };
        let id = format!("marker:{i:03}");
        let doc = json!({
            "@context": {"@vocab": "https://schema.org/", "cr": "http://mlcommons.org/croissant/"},
            "@type": "sc:Dataset",
            "conformsTo": "http://mlcommons.org/croissant/1.0",
            "identifier": id,
            "name": format!("Archive record {i}"),
            "description": format!("Recordings and notes filed under the code {marker}."),
        });
        let path = records.join(format!("record-{i:03}.json"));
        std::fs::write(&path, serde_json::to_vec_pretty(&doc).unwrap()).map_err(io)?;
        suite.cases.push(EvalCase { question: format!("what is {marker}?"), relevant_source_ids: [id].into() });
    }
    std::fs::write(dir.join("suite.json"), suite.to_json()).map_err(io)?;
    Ok(suite)
}
