use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::answer::{assemble_answer, cited_tag_numbers, strip_tags, Answer};
use super::prompt::{build_prompt, build_prompt_with, AugmentedPrompt, Turn, DEFAULT_PREAMBLE};
use super::{rerank_cot, retrieve_corrective, retrieve_vanilla, RagContext, Run, StrategyConfig, StrategyError};
use crate::modelgw::judge_sufficiency;
use crate::retrieval::{Provenance, RetrievalItem, RetrievalResult};
use crate::scalar::Scalar;
use crate::trace::StepKind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NotebookEntry {
    pub fact: String,
    pub supporting_chunks: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotebookStatus {
    #[default]
    Insufficient,
    Sufficient,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Notebook {
    pub entries: Vec<NotebookEntry>,
    pub status: NotebookStatus,
}

impl Notebook {
    fn render(&self) -> String {
        self.entries.iter().map(|e| format!("- {}", e.fact)).collect::<Vec<_>>().join("\n")
    }

    /// Supporting chunks of all entries, first mention first.
    pub fn supporting_chunks(&self) -> Vec<String> {
        let mut out: Vec<String> = vec![];
        for c in self.entries.iter().flat_map(|e| &e.supporting_chunks) {
            if !out.contains(c) {
                out.push(c.clone());
            }
        }
        out
    }
}

fn history_json(history: &[Turn]) -> Value {
    json!(history.iter().map(|t| &t.question).collect::<Vec<_>>())
}

fn generate<S: Scalar>(
    prompt: &AugmentedPrompt,
    purpose: &str,
    ctx: &RagContext<'_, S>,
    run: &mut Run,
    extra: Value,
) -> Result<String, StrategyError> {
    run.flags_from(&prompt.flags);
    let mut detail = json!({
        "context_tags": prompt.context_blocks.iter().map(|b| &b.tag).collect::<Vec<_>>(),
        "history": history_json(&prompt.history),
    });
    if let (Some(d), Value::Object(extra)) = (detail.as_object_mut(), extra) {
        d.extend(extra);
    }
    Ok(ctx.generator.complete(&mut run.trace, StepKind::Generate, purpose, &prompt.render(), detail)?)
}

/// Optional rerank, prompt assembly, one generation and citation
/// extraction.
pub(crate) fn answer_from<S: Scalar>(
    question: &str,
    mut result: RetrievalResult,
    history: &[Turn],
    cfg: &StrategyConfig,
    ctx: &RagContext<'_, S>,
    run: &mut Run,
    purpose: &str,
) -> Result<Answer, StrategyError> {
    if cfg.rerank && !result.is_empty() {
        result = rerank_cot(question, &result, ctx, ctx.generator, &mut run.trace);
    }
    run.flags_from(&result.trace_flags);
    let prompt = build_prompt(question, &result, history, ctx, ctx.generator.context_budget)?;
    let text = generate(&prompt, purpose, ctx, run, json!({}))?;
    Ok(assemble_answer(&text, &prompt))
}

const DRAFT_PREAMBLE: &str = "Answer the question below as well as you can from what you already know.";

/// Draft, judge, then corrective retrieval and regeneration until the judge
/// is satisfied or `max_iterations` rounds have run.
pub(crate) fn answer_self_reflective<S: Scalar>(
    question: &str,
    history: &[Turn],
    cfg: &StrategyConfig,
    ctx: &RagContext<'_, S>,
    run: &mut Run,
) -> Result<Answer, StrategyError> {
    let draft_prompt =
        build_prompt_with(DRAFT_PREAMBLE, question, &RetrievalResult::default(), history, ctx, ctx.generator.context_budget)?;
    let draft = generate(&draft_prompt, "draft", ctx, run, json!({}))?;
    if judge_sufficiency(ctx.judge, &mut run.trace, question, &draft).unwrap_or(false) {
        let mut answer = assemble_answer(&strip_tags(&draft), &draft_prompt);
        answer.citations.clear();
        answer.uncited = true;
        return Ok(answer);
    }
    let mut last = None;
    for _ in 0..cfg.max_iterations {
        let result = retrieve_corrective(question, cfg, ctx, &mut run.trace)?;
        let answer = answer_from(question, result, history, cfg, ctx, run, "answer")?;
        let sufficient = judge_sufficiency(ctx.judge, &mut run.trace, question, &answer.text).unwrap_or(false);
        last = Some(answer);
        if sufficient {
            return Ok(last.unwrap());
        }
    }
    run.flag("iterations_capped");
    Ok(last.expect("max_iterations is at least 1"))
}

fn list_marker() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*(?:[-*•]|\d+[.)])\s+").unwrap())
}

/// Reads one fact per line. A fact is kept only when it cites at least one
/// block of `prompt`; its supporting chunks are the cited blocks' chunks.
/// Returns the facts and whether any non-empty line was dropped.
pub fn parse_facts(reply: &str, prompt: &AugmentedPrompt) -> (Vec<NotebookEntry>, bool) {
    let mut entries = vec![];
    let mut dropped = false;
    for line in reply.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let mut chunks: Vec<String> = vec![];
        for n in cited_tag_numbers(line) {
            let tag = format!("S{n}");
            if let Some(block) = prompt.context_blocks.iter().find(|b| b.tag == tag) {
                if !chunks.contains(&block.chunk_id) {
                    chunks.push(block.chunk_id.clone());
                }
            }
        }
        let fact = strip_tags(&list_marker().replace(line, ""));
        if chunks.is_empty() || fact.is_empty() {
            dropped = true;
            continue;
        }
        entries.push(NotebookEntry { fact, supporting_chunks: chunks });
    }
    (entries, dropped)
}

const NOTES_PREAMBLE: &str = "Write down what the question needs answered and what you already \
know about it, as short notes.";

const FACTS_PREAMBLE: &str = "Extract facts from the numbered sources below that help answer the question.\n\
Write one fact per line and end every line with the tag of its source in square brackets, for example [S1].\n\
Only write facts stated in the sources.";

/// Iterative retrieval that collects cited facts in a notebook until the
/// judge finds them sufficient, then answers from the notebook.
pub(crate) fn answer_notebook<S: Scalar>(
    question: &str,
    history: &[Turn],
    cfg: &StrategyConfig,
    ctx: &RagContext<'_, S>,
    run: &mut Run,
) -> Result<Answer, StrategyError> {
    let budget = ctx.generator.context_budget;
    let seed_prompt = build_prompt_with(NOTES_PREAMBLE, question, &RetrievalResult::default(), history, ctx, budget)?;
    let seed = generate(&seed_prompt, "notebook_seed", ctx, run, json!({}))?;
    let mut notebook = Notebook::default();
    let mut query = question.to_string();
    for round in 1..=cfg.max_iterations {
        let result = retrieve_vanilla(&query, cfg.k, "notebook", ctx, &mut run.trace)?;
        let facts_prompt = build_prompt_with(FACTS_PREAMBLE, question, &result, &[], ctx, budget)?;
        let reply = generate(&facts_prompt, "notebook_facts", ctx, run, json!({ "round": round }))?;
        let (entries, dropped) = parse_facts(&reply, &facts_prompt);
        if dropped {
            run.flag("unsupported_fact_dropped");
        }
        for entry in entries {
            if !notebook.entries.iter().any(|e| e.fact == entry.fact) {
                notebook.entries.push(entry);
            }
        }
        let material = format!("Initial notes:\n{}\n\nFacts:\n{}", seed.trim(), notebook.render());
        if judge_sufficiency(ctx.judge, &mut run.trace, question, &material).unwrap_or(false) {
            notebook.status = NotebookStatus::Sufficient;
            break;
        }
        if round < cfg.max_iterations {
            let refine = format!(
                "The facts below were collected to answer a question but are not yet enough.\n\
                 Write one search query for the missing information. Reply with the query only.\n\n\
                 Question: {question}\n\nFacts:\n{}\n\nQuery:",
                notebook.render()
            );
            let reply =
                ctx.generator.complete(&mut run.trace, StepKind::Generate, "refine_query", &refine, json!({}))?;
            if let Some(line) = reply.lines().map(str::trim).find(|l| !l.is_empty()) {
                query = line.to_string();
            }
        }
    }
    if notebook.status == NotebookStatus::Insufficient {
        run.flag("notebook_capped");
    }

    let chunks = notebook.supporting_chunks();
    let n = chunks.len();
    let support = RetrievalResult {
        items: chunks
            .into_iter()
            .enumerate()
            .map(|(i, chunk_id)| RetrievalItem {
                chunk_id,
                score: (n - i) as f64 / n as f64,
                provenance: Provenance::Vector,
            })
            .collect(),
        trace_flags: vec![],
    };
    let preamble = if notebook.entries.is_empty() {
        DEFAULT_PREAMBLE.to_string()
    } else {
        format!("{DEFAULT_PREAMBLE}\n\nNotes:\n{}", notebook.render())
    };
    let prompt = build_prompt_with(&preamble, question, &support, history, ctx, budget)?;
    let text = generate(&prompt, "answer", ctx, run, json!({ "notebook": notebook }))?;
    Ok(assemble_answer(&text, &prompt))
}
