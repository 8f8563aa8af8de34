use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::prompt::AugmentedPrompt;
use crate::trace::Trace;

fn tag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\[\s*S\d+(?:\s*[,;]\s*S\d+)*\s*\]").unwrap())
}

fn number_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"S(\d+)").unwrap())
}

/// Tag numbers cited in `text`, in order of appearance. Accepts `[S2]` and
/// grouped forms like `[S1, S3]`.
pub fn cited_tag_numbers(text: &str) -> Vec<usize> {
    tag_re()
        .find_iter(text)
        .flat_map(|m| {
            number_re()
                .captures_iter(m.as_str())
                .filter_map(|c| c[1].parse().ok())
                .collect::<Vec<usize>>()
        })
        .collect()
}

fn spaced_tag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(&format!(r"\s*{}", tag_re().as_str())).unwrap())
}

/// Removes citation tags, and the whitespace before them, from `text`.
pub fn strip_tags(text: &str) -> String {
    spaced_tag_re().replace_all(text, "").trim().to_string()
}

/// One context block an answer was generated against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextRef {
    pub tag: String,
    pub source_id: String,
    pub chunk_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub text: String,
    /// Source ids of cited blocks, first mention first.
    pub citations: Vec<String>,
    pub uncited: bool,
    pub trace: Trace,
    pub flags: Vec<String>,
    /// Blocks of the prompt the final text was generated from.
    pub context: Vec<ContextRef>,
    /// Every chunk or community id retrieved during the run, first
    /// retrieval first.
    pub retrieved: Vec<String>,
}

impl Answer {
    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    pub(crate) fn flag(&mut self, flag: &str) {
        if !self.has_flag(flag) {
            self.flags.push(flag.to_string());
        }
    }

    pub fn context_tags(&self) -> Vec<&str> {
        self.context.iter().map(|c| c.tag.as_str()).collect()
    }
}

/// Extracts citations from a generation. Tags naming blocks that are not
/// in the prompt are dropped and flagged `phantom_citation`.
pub fn assemble_answer(generation: &str, prompt: &AugmentedPrompt) -> Answer {
    let mut answer = Answer {
        text: generation.trim().to_string(),
        citations: vec![],
        uncited: true,
        trace: Trace::new(),
        flags: vec![],
        context: prompt
            .context_blocks
            .iter()
            .map(|b| ContextRef { tag: b.tag.clone(), source_id: b.source_id.clone(), chunk_id: b.chunk_id.clone() })
            .collect(),
        retrieved: vec![],
    };
    for n in cited_tag_numbers(generation) {
        let tag = format!("S{n}");
        match prompt.context_blocks.iter().find(|b| b.tag == tag) {
            Some(block) => {
                if !answer.citations.contains(&block.source_id) {
                    answer.citations.push(block.source_id.clone());
                }
            }
            None => answer.flag("phantom_citation"),
        }
    }
    answer.uncited = answer.citations.is_empty();
    answer
}
