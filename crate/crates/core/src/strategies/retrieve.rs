use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::{expand_query, RagContext, StrategyConfig, StrategyError, COMMUNITY_PREFIX};
use crate::kgraph::match_query_nodes;
use crate::modelgw::{judge_relevance, PARSE_FALLBACK_SCORE};
use crate::retrieval::{Provenance, RetrievalItem, RetrievalResult};
use crate::scalar::Scalar;
use crate::trace::{StepKind, Trace};
use crate::vindex::{embed_texts, IndexError};

fn items_json(result: &RetrievalResult) -> Value {
    json!(result.items)
}

/// Embeds `query` and returns its `k` nearest chunks. `purpose` is recorded
/// in the retrieve step; `"retry"` marks a corrective retry, which does not
/// count as a retrieval round.
pub fn retrieve_vanilla<S: Scalar>(
    query: &str,
    k: usize,
    purpose: &str,
    ctx: &RagContext<'_, S>,
    trace: &mut Trace,
) -> Result<RetrievalResult, StrategyError> {
    let tag = ctx.embedder.model_tag();
    if tag != ctx.index.model_tag() {
        return Err(IndexError::ModelMismatch { index: ctx.index.model_tag().to_string(), embedder: tag }.into());
    }
    let result = if ctx.index.is_empty() || k == 0 {
        RetrievalResult::default()
    } else {
        let vector = embed_texts(ctx.embedder, &[query.to_string()], Some(ctx.index.dim()))?
            .pop()
            .expect("one text embedded");
        ctx.index.knn(&vector, k)?
    };
    trace.push(
        StepKind::Retrieve,
        json!({ "purpose": purpose, "query": query, "k": k, "items": items_json(&result) }),
    );
    Ok(result)
}

/// Judges every item and keeps those scoring at least `tau`, in order.
/// Judge failures score 0.5.
fn judge_and_filter<S: Scalar>(
    question: &str,
    result: &RetrievalResult,
    cfg: &StrategyConfig,
    ctx: &RagContext<'_, S>,
    trace: &mut Trace,
) -> RetrievalResult {
    let mut kept = RetrievalResult { items: vec![], trace_flags: result.trace_flags.clone() };
    for item in &result.items {
        let score = match ctx.corpus.chunk(&item.chunk_id) {
            Some(chunk) => judge_relevance(ctx.judge, trace, question, chunk, &ctx.thresholds)
                .map(|j| j.score)
                .unwrap_or(PARSE_FALLBACK_SCORE),
            None => PARSE_FALLBACK_SCORE,
        };
        if score >= cfg.tau {
            kept.items.push(item.clone());
        }
    }
    kept
}

/// Vanilla retrieval followed by a relevance filter. When nothing survives,
/// retries once with the expanded term family as the query; if that also
/// comes back empty the result is flagged `fallback_exhausted`.
pub fn retrieve_corrective<S: Scalar>(
    question: &str,
    cfg: &StrategyConfig,
    ctx: &RagContext<'_, S>,
    trace: &mut Trace,
) -> Result<RetrievalResult, StrategyError> {
    let first = retrieve_vanilla(question, cfg.k, "initial", ctx, trace)?;
    let kept = judge_and_filter(question, &first, cfg, ctx, trace);
    if !kept.is_empty() {
        return Ok(kept);
    }
    let expansion = expand_query(question, ctx.generator, trace);
    let retry = retrieve_vanilla(&expansion.terms.join(" "), cfg.k, "retry", ctx, trace)?;
    let mut kept = judge_and_filter(question, &retry, cfg, ctx, trace);
    if expansion.failed {
        kept.flag("expansion_failed");
    }
    if kept.is_empty() {
        kept.flag("fallback_exhausted");
    }
    Ok(kept)
}

/// Community retrieval. Matched communities are ordered by matched-node
/// count (descending) then id, scored by count over the largest count, and
/// capped at `k`. Without any matched node this falls back to vanilla
/// retrieval, flagged `graph_fallback`.
pub fn retrieve_graph<S: Scalar>(
    question: &str,
    cfg: &StrategyConfig,
    ctx: &RagContext<'_, S>,
    trace: &mut Trace,
) -> Result<RetrievalResult, StrategyError> {
    let expansion = expand_query(question, ctx.generator, trace);
    let matched = ctx.graph.map(|g| match_query_nodes(&g.graph, &expansion.terms)).unwrap_or_default();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    if let Some(bundle) = ctx.graph {
        for node in &matched {
            if let Some(cid) = bundle.assignment.community_of(node) {
                *counts.entry(cid).or_default() += 1;
            }
        }
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    ranked.truncate(cfg.k);
    let max = ranked.first().map(|r| r.1).unwrap_or(1) as f64;
    let mut result = RetrievalResult {
        items: ranked
            .iter()
            .map(|(cid, n)| RetrievalItem {
                chunk_id: format!("{COMMUNITY_PREFIX}{cid}"),
                score: *n as f64 / max,
                provenance: Provenance::Graph,
            })
            .collect(),
        trace_flags: vec![],
    };
    trace.push(
        StepKind::GraphMatch,
        json!({
            "graph_loaded": ctx.graph.is_some(),
            "matched_nodes": matched,
            "items": items_json(&result),
        }),
    );
    if expansion.failed {
        result.flag("expansion_failed");
    }
    if result.is_empty() {
        let mut fallback = retrieve_vanilla(question, cfg.k, "initial", ctx, trace)?;
        fallback.trace_flags.extend(result.trace_flags);
        fallback.flag("graph_fallback");
        return Ok(fallback);
    }
    Ok(result)
}
