use std::sync::OnceLock;

use regex::Regex;
use serde_json::json;

use super::ContextLookup;
use crate::modelgw::Gateway;
use crate::retrieval::RetrievalResult;
use crate::trace::{StepKind, Trace};

fn int_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\d+").unwrap())
}

/// Reads a 1-based permutation of `n` items from the text after the last
/// `order:` marker, or from the last non-empty line when there is no
/// marker.
pub fn parse_permutation(reply: &str, n: usize) -> Option<Vec<usize>> {
    let lower = reply.to_lowercase();
    let tail = match lower.rfind("order:") {
        Some(pos) => reply[pos + "order:".len()..].lines().next().unwrap_or(""),
        None => reply.lines().rev().find(|l| !l.trim().is_empty())?,
    };
    let picks: Vec<usize> = int_re().find_iter(tail).filter_map(|m| m.as_str().parse().ok()).collect();
    if picks.len() != n {
        return None;
    }
    let mut seen = vec![false; n];
    for &p in &picks {
        if p == 0 || p > n || seen[p - 1] {
            return None;
        }
        seen[p - 1] = true;
    }
    Some(picks.into_iter().map(|p| p - 1).collect())
}

/// Asks the generator to reason about the items and emit a new order.
///
/// A valid permutation reorders the items and replaces their scores with
/// rank scores `(n - position) / n`, flagged `reranked`. Anything else
/// (including a failed call) keeps the original order, flagged
/// `rerank_failed`. Fewer than two items are returned untouched.
pub fn rerank_cot(
    question: &str,
    result: &RetrievalResult,
    lookup: &dyn ContextLookup,
    gateway: &Gateway,
    trace: &mut Trace,
) -> RetrievalResult {
    let n = result.items.len();
    if n < 2 {
        return result.clone();
    }
    let mut prompt = format!(
        "Rank the passages below by how useful they are for answering the question.\n\
         Think step by step about each passage, then finish with a final line of the form\n\
         order: <passage numbers, most useful first, comma separated>\n\nQuestion: {question}\n\n"
    );
    for (i, item) in result.items.iter().enumerate() {
        let text = lookup.resolve(&item.chunk_id).map(|(_, t)| t).unwrap_or_default();
        prompt.push_str(&format!("Passage {}:\n{}\n\n", i + 1, text));
    }
    let reply = gateway.complete(trace, StepKind::Generate, "rerank", &prompt, json!({ "items": n }));
    let mut out = result.clone();
    match reply.ok().and_then(|r| parse_permutation(&r, n)) {
        Some(order) => {
            out.items = order
                .iter()
                .enumerate()
                .map(|(pos, &src)| {
                    let mut item = result.items[src].clone();
                    item.score = (n - pos) as f64 / n as f64;
                    item
                })
                .collect();
            out.flag("reranked");
        }
        None => out.flag("rerank_failed"),
    }
    out
}
