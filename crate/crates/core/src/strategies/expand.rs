use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::modelgw::Gateway;
use crate::text::content_words;
use crate::trace::{StepKind, Trace};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expansion {
    /// Question content words first, then generated terms in reply order.
    pub terms: Vec<String>,
    pub failed: bool,
}

fn list_marker() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*(?:[-*•]|\d+[.)])\s+").unwrap())
}

fn clean_term(raw: &str) -> String {
    list_marker()
        .replace(raw, "")
        .trim()
        .trim_matches(|c: char| c == '"' || c == '\'' || c == '.' || c == ',')
        .trim()
        .to_lowercase()
}

/// Splits a reply on `;` and newlines into lowercased terms.
pub fn parse_terms(reply: &str) -> Vec<String> {
    reply
        .split([';', '\n'])
        .map(clean_term)
        .filter(|t| !t.is_empty())
        .collect()
}

/// Asks the generator for a family of terms around `question`. On failure
/// the family is just the question's content words.
pub fn expand_query(question: &str, gateway: &Gateway, trace: &mut Trace) -> Expansion {
    let mut terms = content_words(question);
    let prompt = format!(
        "List words and short phrases related to the question below that could appear in the \
         metadata of an archived collection (topics, art forms, modalities, ways of interaction).\n\
         Separate them with semicolons and reply with the list only.\n\nQuestion: {question}\n\nTerms:"
    );
    let reply = gateway.complete(trace, StepKind::Expand, "expand_query", &prompt, json!({}));
    let failed = reply.is_err();
    if let Ok(reply) = reply {
        for term in parse_terms(&reply) {
            if !terms.contains(&term) {
                terms.push(term);
            }
        }
    }
    trace.push(StepKind::Expand, json!({ "family": terms, "expansion_failed": failed }));
    Expansion { terms, failed }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::modelgw::{FailKind, ScriptItem, ScriptedMock};

    fn run(question: &str, script: Vec<ScriptItem>) -> Expansion {
        let gw = Gateway::new(Arc::new(ScriptedMock::new(script).unwrap()));
        expand_query(question, &gw, &mut Trace::new())
    }

    #[test]
    fn reply_terms_appended_after_question_words() {
        let e = run("live events", vec![ScriptItem::reply("concert; recital; show")]);
        assert_eq!(e.terms, ["live", "events", "concert", "recital", "show"]);
        assert!(!e.failed);
    }

    #[test]
    fn duplicates_collapse() {
        let e = run("events", vec![ScriptItem::reply("concert; Concert\nconcert")]);
        assert_eq!(e.terms.iter().filter(|t| *t == "concert").count(), 1);
    }

    #[test]
    fn question_content_word_always_present() {
        let e = run("which performances does the collection contain?", vec![ScriptItem::reply("concert")]);
        assert!(e.terms.contains(&"performances".to_string()));
    }

    #[test]
    fn failure_keeps_original_terms() {
        let e = run("haptic concerts", vec![ScriptItem::Fail(FailKind::ModelTimeout)]);
        assert!(e.failed);
        assert_eq!(e.terms, ["haptic", "concerts"]);
    }

    #[test]
    fn list_markup_stripped() {
        assert_eq!(parse_terms("1. Dance\n- \"sound art\";  ;3d audio"), ["dance", "sound art", "3d audio"]);
    }
}
