use serde::{Deserialize, Serialize};

use super::{ContextLookup, StrategyError};
use crate::retrieval::RetrievalResult;

pub const DEFAULT_PREAMBLE: &str = "You answer questions about an archived collection using only the numbered sources below.\n\
Cite the source of every statement with its tag in square brackets, for example [S1].\n\
If the sources do not contain the answer, say so.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub question: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextBlock {
    /// `S1`, `S2`, ... in prompt order.
    pub tag: String,
    pub source_id: String,
    pub chunk_id: String,
    pub text: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedPrompt {
    pub preamble: String,
    pub context_blocks: Vec<ContextBlock>,
    /// Oldest first.
    pub history: Vec<Turn>,
    pub question: String,
    pub flags: Vec<String>,
}

impl AugmentedPrompt {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.preamble);
        out.push_str("\n\nSources:\n");
        if self.context_blocks.is_empty() {
            out.push_str("(none)\n");
        }
        for b in &self.context_blocks {
            out.push_str(&format!("[{}] ({})\n{}\n\n", b.tag, b.source_id, b.text));
        }
        if !self.history.is_empty() {
            out.push_str("\nConversation so far:\n");
            for t in &self.history {
                out.push_str(&format!("Q: {}\nA: {}\n", t.question, t.answer));
            }
        }
        out.push_str("\nQuestion: ");
        out.push_str(&self.question);
        out
    }

    pub fn rendered_len(&self) -> usize {
        self.render().chars().count()
    }

    fn retag(&mut self) {
        for (i, b) in self.context_blocks.iter_mut().enumerate() {
            b.tag = format!("S{}", i + 1);
        }
    }

    fn flag(&mut self, flag: &str) {
        if !self.flags.iter().any(|f| f == flag) {
            self.flags.push(flag.to_string());
        }
    }

    /// Shrinks the prompt to `budget` characters: lowest-scored blocks go
    /// first (later block on ties), then the oldest history turns. Tags are
    /// renumbered after every drop.
    pub fn fit_to_budget(&mut self, budget: usize) -> Result<(), StrategyError> {
        while self.rendered_len() > budget {
            if !self.context_blocks.is_empty() {
                let victim = self
                    .context_blocks
                    .iter()
                    .enumerate()
                    .min_by(|(i, a), (j, b)| a.score.total_cmp(&b.score).then(j.cmp(i)))
                    .map(|(i, _)| i)
                    .unwrap();
                self.context_blocks.remove(victim);
                self.retag();
                self.flag("context_truncated");
            } else if !self.history.is_empty() {
                self.history.remove(0);
                self.flag("history_truncated");
            } else {
                return Err(StrategyError::BudgetImpossible { len: self.rendered_len(), budget });
            }
        }
        Ok(())
    }
}

/// Builds a prompt from retrieval results with the default preamble.
pub fn build_prompt(
    question: &str,
    result: &RetrievalResult,
    history: &[Turn],
    lookup: &dyn ContextLookup,
    budget: usize,
) -> Result<AugmentedPrompt, StrategyError> {
    build_prompt_with(DEFAULT_PREAMBLE, question, result, history, lookup, budget)
}

pub fn build_prompt_with(
    preamble: &str,
    question: &str,
    result: &RetrievalResult,
    history: &[Turn],
    lookup: &dyn ContextLookup,
    budget: usize,
) -> Result<AugmentedPrompt, StrategyError> {
    let mut prompt = AugmentedPrompt {
        preamble: preamble.to_string(),
        context_blocks: vec![],
        history: history.to_vec(),
        question: question.to_string(),
        flags: vec![],
    };
    for item in &result.items {
        match lookup.resolve(&item.chunk_id) {
            Some((source_id, text)) => prompt.context_blocks.push(ContextBlock {
                tag: String::new(),
                source_id,
                chunk_id: item.chunk_id.clone(),
                text,
                score: item.score,
            }),
            None => prompt.flag("unresolved_item"),
        }
    }
    prompt.retag();
    prompt.fit_to_budget(budget)?;
    Ok(prompt)
}
