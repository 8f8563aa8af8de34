//! RAG control loops behind one entry point, [`run_strategy`].
//!
//! Every run owns its [`Trace`]; the index, graph and corpus are shared
//! read-only.

mod answer;
mod expand;
mod loops;
mod prompt;
mod rerank;
mod retrieve;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::kgraph::GraphBundle;
use crate::modelgw::{Gateway, JudgeThresholds, ModelError};
use crate::scalar::Scalar;
use crate::store::Corpus;
use crate::trace::{StepKind, Trace};
use crate::vindex::{Embedder, IndexError, VectorIndex};

pub use answer::{assemble_answer, cited_tag_numbers, strip_tags, Answer, ContextRef};
pub use expand::{expand_query, parse_terms, Expansion};
use loops::{answer_notebook, answer_self_reflective};
pub use loops::{parse_facts, Notebook, NotebookEntry, NotebookStatus};
pub use prompt::{build_prompt, build_prompt_with, AugmentedPrompt, ContextBlock, Turn, DEFAULT_PREAMBLE};
pub use rerank::{parse_permutation, rerank_cot};
pub use retrieve::{retrieve_corrective, retrieve_graph, retrieve_vanilla};

/// Prefix of graph retrieval item ids.
pub const COMMUNITY_PREFIX: &str = "community:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Vanilla,
    Corrective,
    SelfReflective,
    Notebook,
    Graph,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Vanilla,
        StrategyKind::Corrective,
        StrategyKind::SelfReflective,
        StrategyKind::Notebook,
        StrategyKind::Graph,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StrategyKind::Vanilla => "vanilla",
            StrategyKind::Corrective => "corrective",
            StrategyKind::SelfReflective => "self_reflective",
            StrategyKind::Notebook => "notebook",
            StrategyKind::Graph => "graph",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| StrategyError::UnknownStrategy(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub strategy: StrategyKind,
    pub k: usize,
    pub tau: f64,
    pub max_iterations: usize,
    pub rerank: bool,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig { strategy: StrategyKind::Vanilla, k: 5, tau: 0.5, max_iterations: 3, rerank: false }
    }
}

impl StrategyConfig {
    pub fn validate(&self) -> Result<(), StrategyError> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(StrategyError::BadConfig(format!("tau must be in [0, 1], got {}", self.tau)));
        }
        if self.max_iterations == 0 {
            return Err(StrategyError::BadConfig("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("bare question of {len} chars exceeds the {budget}-char prompt budget")]
    BudgetImpossible { len: usize, budget: usize },
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("bad strategy config: {0}")]
    BadConfig(String),
    #[error("question is empty")]
    EmptyQuestion,
}

/// A failed run with everything it recorded before failing.
#[derive(Debug)]
pub struct RunFailure {
    pub error: StrategyError,
    pub trace: Trace,
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for RunFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Resolves a retrieval item id to `(source_id, text)`.
pub trait ContextLookup {
    fn resolve(&self, item_id: &str) -> Option<(String, String)>;
}

impl ContextLookup for Corpus {
    fn resolve(&self, item_id: &str) -> Option<(String, String)> {
        self.chunk(item_id).map(|c| (c.source_id.clone(), c.text.clone()))
    }
}

/// Everything a strategy run reads.
pub struct RagContext<'a, S: Scalar = f32> {
    pub corpus: &'a Corpus,
    pub index: &'a VectorIndex<S>,
    pub embedder: &'a dyn Embedder<S>,
    pub generator: &'a Gateway,
    /// Relevance and sufficiency judge; may be the generator itself.
    pub judge: &'a Gateway,
    pub graph: Option<&'a GraphBundle>,
    pub thresholds: JudgeThresholds,
}

impl<S: Scalar> ContextLookup for RagContext<'_, S> {
    fn resolve(&self, item_id: &str) -> Option<(String, String)> {
        match item_id.strip_prefix(COMMUNITY_PREFIX) {
            Some(cid) => self.graph?.community_text(cid).map(|t| (item_id.to_string(), t)),
            None => self.corpus.resolve(item_id),
        }
    }
}

/// Mutable state of one run.
#[derive(Debug, Default)]
pub(crate) struct Run {
    pub trace: Trace,
    pub flags: Vec<String>,
}

impl Run {
    pub fn flag(&mut self, flag: &str) {
        if !self.flags.iter().any(|f| f == flag) {
            self.flags.push(flag.to_string());
        }
    }

    pub fn flags_from(&mut self, flags: &[String]) {
        for f in flags {
            self.flag(f);
        }
    }

    /// Moves the run's trace and flags into `answer`.
    pub fn finish(self, mut answer: Answer) -> Answer {
        let mut flags = self.flags;
        for f in answer.flags.drain(..) {
            if !flags.contains(&f) {
                flags.push(f);
            }
        }
        answer.flags = flags;
        answer.retrieved = retrieved_ids(&self.trace);
        answer.trace = self.trace;
        answer
    }
}

/// Retrieval rounds in a trace: retrieve steps other than corrective
/// retries.
pub fn retrieval_rounds(trace: &Trace) -> usize {
    trace
        .steps()
        .iter()
        .filter(|s| s.kind == StepKind::Retrieve && s.detail["purpose"] != "retry")
        .count()
}

/// Ids of every item retrieved in a trace, first retrieval first.
pub fn retrieved_ids(trace: &Trace) -> Vec<String> {
    let mut out: Vec<String> = vec![];
    for step in trace.steps() {
        if !matches!(step.kind, StepKind::Retrieve | StepKind::GraphMatch) {
            continue;
        }
        if let Some(Value::Array(items)) = step.detail.get("items") {
            for id in items.iter().filter_map(|i| i["chunk_id"].as_str()) {
                if !out.iter().any(|o| o == id) {
                    out.push(id.to_string());
                }
            }
        }
    }
    out
}

/// Runs the configured strategy for `question` with prior `history`.
pub fn run_strategy<S: Scalar>(
    question: &str,
    history: &[Turn],
    cfg: &StrategyConfig,
    ctx: &RagContext<'_, S>,
) -> Result<Answer, RunFailure> {
    let mut run = Run::default();
    let outcome = (|| {
        cfg.validate()?;
        if question.trim().is_empty() {
            return Err(StrategyError::EmptyQuestion);
        }
        match cfg.strategy {
            StrategyKind::Vanilla => {
                let result = retrieve_vanilla(question, cfg.k, "initial", ctx, &mut run.trace)?;
                loops::answer_from(question, result, history, cfg, ctx, &mut run, "answer")
            }
            StrategyKind::Corrective => {
                let result = retrieve_corrective(question, cfg, ctx, &mut run.trace)?;
                loops::answer_from(question, result, history, cfg, ctx, &mut run, "answer")
            }
            StrategyKind::Graph => {
                let mut result = retrieve_graph(question, cfg, ctx, &mut run.trace)?;
                if !result.has_flag("graph_fallback") {
                    let vector = retrieve_vanilla(question, cfg.k, "initial", ctx, &mut run.trace)?;
                    result.items.extend(vector.items);
                }
                loops::answer_from(question, result, history, cfg, ctx, &mut run, "answer")
            }
            StrategyKind::SelfReflective => answer_self_reflective(question, history, cfg, ctx, &mut run),
            StrategyKind::Notebook => answer_notebook(question, history, cfg, ctx, &mut run),
        }
    })();
    match outcome {
        Ok(answer) => Ok(run.finish(answer)),
        Err(error) => Err(RunFailure { error, trace: run.trace }),
    }
}
