use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Gateway, ModelError};
use crate::ingest::Chunk;
use crate::trace::{StepKind, Trace};

/// Score used when the judge reply contains no number.
pub const PARSE_FALLBACK_SCORE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Correct,
    Ambiguous,
    Incorrect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JudgeThresholds {
    /// Scores at or above are `correct`.
    pub correct: f64,
    /// Scores at or below are `incorrect`.
    pub incorrect: f64,
}

impl Default for JudgeThresholds {
    fn default() -> Self {
        JudgeThresholds { correct: 0.7, incorrect: 0.3 }
    }
}

impl JudgeThresholds {
    pub fn verdict(&self, score: f64) -> Verdict {
        if score >= self.correct {
            Verdict::Correct
        } else if score <= self.incorrect {
            Verdict::Incorrect
        } else {
            Verdict::Ambiguous
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceJudgment {
    pub score: f64,
    pub verdict: Verdict,
    pub raw_reply: String,
}

fn number_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?").unwrap())
}

/// First real number in `reply`, clamped to `[0, 1]`.
pub fn parse_score(reply: &str) -> Option<f64> {
    number_re()
        .find_iter(reply)
        .filter_map(|m| m.as_str().parse::<f64>().ok())
        .find(|v| v.is_finite())
        .map(|v| v.clamp(0.0, 1.0))
}

/// Reads a yes/no verdict from the first word of `reply`.
pub fn parse_yes_no(reply: &str) -> Option<bool> {
    let word = reply
        .split(|c: char| !c.is_alphabetic())
        .find(|w| !w.is_empty())?
        .to_lowercase();
    match word.as_str() {
        "yes" | "sufficient" | "true" | "enough" => Some(true),
        "no" | "insufficient" | "false" | "not" => Some(false),
        _ => None,
    }
}

fn relevance_prompt(question: &str, chunk: &Chunk) -> String {
    format!(
        "You grade search results.\n\
         Rate how relevant the passage is to the question on a scale from 0 to 1, \
         where 0 means unrelated and 1 means it directly answers the question.\n\
         Reply with a single number.\n\n\
         Question: {question}\n\n\
         Passage ({id}):\n{text}\n\nScore:",
        id = chunk.chunk_id,
        text = chunk.text
    )
}

/// Asks the judge endpoint for a relevance score of `chunk`. Unparseable
/// replies score 0.5.
pub fn judge_relevance(
    gateway: &Gateway,
    trace: &mut Trace,
    question: &str,
    chunk: &Chunk,
    thresholds: &JudgeThresholds,
) -> Result<RelevanceJudgment, ModelError> {
    let reply = gateway.complete(
        trace,
        StepKind::Judge,
        "relevance",
        &relevance_prompt(question, chunk),
        json!({ "chunk_id": chunk.chunk_id }),
    )?;
    let score = parse_score(&reply).unwrap_or(PARSE_FALLBACK_SCORE);
    Ok(RelevanceJudgment { score, verdict: thresholds.verdict(score), raw_reply: reply })
}

/// Asks whether `material` is enough to answer `question`. Anything other
/// than a clear yes counts as insufficient.
pub fn judge_sufficiency(
    gateway: &Gateway,
    trace: &mut Trace,
    question: &str,
    material: &str,
) -> Result<bool, ModelError> {
    let prompt = format!(
        "Decide whether the text below fully answers the question.\n\
         Reply \"yes\" if it is sufficient or \"no\" if more information is needed.\n\n\
         Question: {question}\n\nText:\n{material}\n\nSufficient?"
    );
    let reply = gateway.complete(trace, StepKind::Judge, "sufficiency", &prompt, json!({}))?;
    Ok(parse_yes_no(&reply).unwrap_or(false))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::modelgw::ScriptedMock;

    fn chunk() -> Chunk {
        Chunk { chunk_id: "d#0".into(), source_id: "d".into(), text: "passage".into(), char_start: 0, char_end: 7 }
    }

    fn judge(reply: &str) -> RelevanceJudgment {
        let gw = Gateway::new(Arc::new(ScriptedMock::replies([reply]).unwrap()));
        judge_relevance(&gw, &mut Trace::new(), "q", &chunk(), &JudgeThresholds::default()).unwrap()
    }

    #[test]
    fn threshold_mapping() {
        let j = judge("0.9");
        assert_eq!((j.score, j.verdict), (0.9, Verdict::Correct));
        assert_eq!(judge("0.2").verdict, Verdict::Incorrect);
        assert_eq!(judge("Score: 0.5 because").verdict, Verdict::Ambiguous);
    }

    #[test]
    fn unparseable_reply_is_ambiguous() {
        let j = judge("no idea");
        assert_eq!(j.score, 0.5);
        assert_eq!(j.verdict, Verdict::Ambiguous);
        assert_eq!(j.raw_reply, "no idea");
    }

    #[test]
    fn scores_are_clamped() {
        assert_eq!(parse_score("7"), Some(1.0));
        assert_eq!(parse_score("-0.4"), Some(0.0));
        assert_eq!(parse_score(".25"), Some(0.25));
    }

    #[test]
    fn verdict_boundaries() {
        let t = JudgeThresholds::default();
        assert_eq!(t.verdict(0.7), Verdict::Correct);
        assert_eq!(t.verdict(0.3), Verdict::Incorrect);
        assert_eq!(t.verdict(0.69), Verdict::Ambiguous);
    }

    #[test]
    fn yes_no_parsing() {
        assert_eq!(parse_yes_no("Yes, it does."), Some(true));
        assert_eq!(parse_yes_no("sufficient"), Some(true));
        assert_eq!(parse_yes_no("insufficient"), Some(false));
        assert_eq!(parse_yes_no("  No."), Some(false));
        assert_eq!(parse_yes_no("maybe"), None);
        assert_eq!(parse_yes_no(""), None);
    }
}
