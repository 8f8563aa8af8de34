//! Gateway to text-generation endpoints.
//!
//! Every call goes through [`Gateway`], which enforces the prompt budget
//! and appends exactly one step to the caller's [`Trace`].

mod http;
mod judge;
mod mock;

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::trace::{StepKind, Trace};

pub use http::HttpChatGenerator;
pub use judge::{
    judge_relevance, judge_sufficiency, parse_score, parse_yes_no, JudgeThresholds, RelevanceJudgment, Verdict,
    PARSE_FALLBACK_SCORE,
};
pub use mock::{FailKind, ScriptItem, ScriptedMock};

/// Default prompt budget, in characters.
pub const DEFAULT_CONTEXT_BUDGET: usize = 12_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("model timed out: {0}")]
    ModelTimeout(String),
    #[error("model endpoint error: {0}")]
    EndpointError(String),
    #[error("model endpoint unreachable: {0}")]
    Unreachable(String),
    #[error("prompt of {len} chars exceeds the {budget}-char budget")]
    PromptTooLarge { len: usize, budget: usize },
    #[error("scripted mock exhausted")]
    ScriptExhausted,
    #[error("invalid mock script: {0}")]
    InvalidScript(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub prompt: String,
    pub max_tokens: u32,
    pub temperature: f64,
    pub endpoint_tag: String,
}

/// A text-generation backend.
pub trait Generator: Send + Sync {
    fn endpoint_tag(&self) -> String;

    fn generate(&self, req: &GenerationRequest) -> Result<String, ModelError>;

    /// Cheap liveness probe for health reporting.
    fn reachable(&self) -> bool {
        true
    }
}

/// How call latency is recorded in traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LatencyClock {
    #[default]
    Wall,
    /// Always records 0 ms, for byte-identical traces.
    Frozen,
}

/// Shared handle wrapping a generator with budget and trace bookkeeping.
#[derive(Clone)]
pub struct Gateway {
    generator: Arc<dyn Generator>,
    pub context_budget: usize,
    pub max_tokens: u32,
    pub temperature: f64,
    pub clock: LatencyClock,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("endpoint", &self.generator.endpoint_tag())
            .field("context_budget", &self.context_budget)
            .finish()
    }
}

pub fn prompt_hash(prompt: &str) -> String {
    let digest = Sha256::digest(prompt.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

impl Gateway {
    pub fn new(generator: Arc<dyn Generator>) -> Self {
        Gateway {
            generator,
            context_budget: DEFAULT_CONTEXT_BUDGET,
            max_tokens: 1024,
            temperature: 0.0,
            clock: LatencyClock::Wall,
        }
    }

    pub fn with_budget(mut self, chars: usize) -> Self {
        self.context_budget = chars;
        self
    }

    pub fn with_clock(mut self, clock: LatencyClock) -> Self {
        self.clock = clock;
        self
    }

    pub fn endpoint_tag(&self) -> String {
        self.generator.endpoint_tag()
    }

    pub fn reachable(&self) -> bool {
        self.generator.reachable()
    }

    /// Sends `prompt` to the generator and records one trace step of `kind`.
    /// `extra` is merged into the step detail.
    pub fn complete(
        &self,
        trace: &mut Trace,
        kind: StepKind,
        purpose: &str,
        prompt: &str,
        extra: Value,
    ) -> Result<String, ModelError> {
        let endpoint_tag = self.endpoint_tag();
        let mut detail = json!({
            "purpose": purpose,
            "endpoint_tag": endpoint_tag,
            "prompt_sha256": prompt_hash(prompt),
            "prompt_chars": prompt.chars().count(),
        });
        if let (Some(d), Value::Object(extra)) = (detail.as_object_mut(), extra) {
            d.extend(extra);
        }

        let len = prompt.chars().count();
        if len > self.context_budget {
            let err = ModelError::PromptTooLarge { len, budget: self.context_budget };
            detail["error"] = json!(err.to_string());
            detail["latency_ms"] = json!(0);
            trace.push(kind, detail);
            return Err(err);
        }

        let req = GenerationRequest {
            prompt: prompt.to_string(),
            max_tokens: self.max_tokens,
            temperature: self.temperature,
            endpoint_tag,
        };
        let started = Instant::now();
        let result = self.generator.generate(&req);
        detail["latency_ms"] = match self.clock {
            LatencyClock::Wall => json!(started.elapsed().as_millis() as u64),
            LatencyClock::Frozen => json!(0),
        };
        match &result {
            Ok(reply) => detail["reply"] = json!(reply),
            Err(e) => detail["error"] = json!(e.to_string()),
        }
        trace.push(kind, detail);
        result
    }
}
