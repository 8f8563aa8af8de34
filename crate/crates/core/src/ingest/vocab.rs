//! SKOS-flavoured controlled vocabularies and concept linking.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::croissant::scalar_text;
use super::record::{SchemaRegistry, SourceRecord};
use super::IngestError;

pub const ALT_LABEL_SCORE: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Concept {
    pub uri: String,
    pub pref_label: String,
    #[serde(default)]
    pub alt_labels: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub concepts: Vec<Concept>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    ExactPref,
    AltLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptLink {
    pub record_id: String,
    pub field_name: String,
    pub raw_value: String,
    pub concept_uri: String,
    pub match_kind: MatchKind,
    pub score: f64,
}

const PREF_KEYS: &[&str] = &[
    "skos:prefLabel",
    "prefLabel",
    "http://www.w3.org/2004/02/skos/core#prefLabel",
];
const ALT_KEYS: &[&str] = &[
    "skos:altLabel",
    "altLabel",
    "http://www.w3.org/2004/02/skos/core#altLabel",
];

/// Picks one label from a possibly multilingual value, preferring English
/// or untagged literals.
fn pick_label(v: &Value) -> Option<String> {
    match v {
        Value::Array(items) => {
            let preferred = items.iter().find(|item| {
                matches!(item.get("@language").and_then(Value::as_str), None | Some("en"))
            });
            preferred.or(items.first()).and_then(scalar_text)
        }
        other => scalar_text(other),
    }
}

fn all_labels(v: &Value) -> Vec<String> {
    match v {
        Value::Array(items) => items.iter().filter_map(scalar_text).collect(),
        other => scalar_text(other).into_iter().collect(),
    }
}

fn is_concept(node: &Value) -> bool {
    let has_label = PREF_KEYS.iter().any(|k| node.get(*k).is_some());
    let typed = match node.get("@type") {
        Some(Value::String(t)) => t.ends_with("Concept"),
        Some(Value::Array(ts)) => ts.iter().any(|t| t.as_str().is_some_and(|t| t.ends_with("Concept"))),
        _ => false,
    };
    has_label || typed
}

impl Vocabulary {
    /// Reduces a SKOS JSON-LD document (`@graph` array, bare array, or a
    /// single concept) to `{uri, prefLabel, altLabel}` triples and validates
    /// the result.
    pub fn from_json_ld(doc: &Value) -> Result<Self, IngestError> {
        let nodes: Vec<&Value> = match doc {
            Value::Array(items) => items.iter().collect(),
            Value::Object(map) => match map.get("@graph") {
                Some(Value::Array(items)) => items.iter().collect(),
                _ => vec![doc],
            },
            _ => return Err(IngestError::VocabularyInvalid("expected an object or array".into())),
        };
        let mut concepts = Vec::new();
        for node in nodes.into_iter().filter(|n| is_concept(n)) {
            let uri = node
                .get("@id")
                .and_then(Value::as_str)
                .ok_or_else(|| IngestError::VocabularyInvalid("concept without @id".into()))?;
            let pref_label = PREF_KEYS
                .iter()
                .find_map(|k| node.get(*k))
                .and_then(pick_label)
                .unwrap_or_default();
            let alt_labels = ALT_KEYS
                .iter()
                .find_map(|k| node.get(*k))
                .map(all_labels)
                .unwrap_or_default();
            concepts.push(Concept { uri: uri.to_string(), pref_label, alt_labels });
        }
        let vocab = Vocabulary { concepts };
        vocab.validate()?;
        Ok(vocab)
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        let mut seen = HashSet::new();
        for c in &self.concepts {
            if !seen.insert(c.uri.as_str()) {
                return Err(IngestError::VocabularyInvalid(format!("duplicate concept uri {}", c.uri)));
            }
            if c.pref_label.trim().is_empty() {
                return Err(IngestError::VocabularyInvalid(format!("concept {} has no prefLabel", c.uri)));
            }
        }
        Ok(())
    }

    pub fn contains_uri(&self, uri: &str) -> bool {
        self.concepts.iter().any(|c| c.uri == uri)
    }

    pub fn concept(&self, uri: &str) -> Option<&Concept> {
        self.concepts.iter().find(|c| c.uri == uri)
    }

    /// Case-insensitive lookup: preferred labels win over alternative
    /// labels; among equal matches the smallest uri wins.
    pub fn lookup(&self, value: &str) -> Option<(&Concept, MatchKind)> {
        let needle = value.trim().to_lowercase();
        if needle.is_empty() {
            return None;
        }
        let by_uri = |a: &&Concept, b: &&Concept| a.uri.cmp(&b.uri);
        if let Some(c) = self
            .concepts
            .iter()
            .filter(|c| c.pref_label.to_lowercase() == needle)
            .min_by(by_uri)
        {
            return Some((c, MatchKind::ExactPref));
        }
        self.concepts
            .iter()
            .filter(|c| c.alt_labels.iter().any(|a| a.to_lowercase() == needle))
            .min_by(by_uri)
            .map(|c| (c, MatchKind::AltLabel))
    }
}

/// Links every value of the registry's linkable fields to a vocabulary
/// concept. Values without a match produce no link. Sorted by
/// `(field_name, raw_value)`; repeated values link once.
pub fn link_concepts(record: &SourceRecord, vocab: &Vocabulary, registry: &SchemaRegistry) -> Vec<ConceptLink> {
    let mut links: BTreeMap<(String, String), ConceptLink> = BTreeMap::new();
    let linkable: BTreeSet<&str> = registry.linkable_fields().collect();
    for (field, values) in &record.custom_fields {
        if !linkable.contains(field.as_str()) {
            continue;
        }
        for value in values {
            let key = (field.clone(), value.clone());
            if links.contains_key(&key) {
                continue;
            }
            if let Some((concept, kind)) = vocab.lookup(value) {
                let score = match kind {
                    MatchKind::ExactPref => 1.0,
                    MatchKind::AltLabel => ALT_LABEL_SCORE,
                };
                links.insert(
                    key,
                    ConceptLink {
                        record_id: record.persistent_id.clone(),
                        field_name: field.clone(),
                        raw_value: value.clone(),
                        concept_uri: concept.uri.clone(),
                        match_kind: kind,
                        score,
                    },
                );
            }
        }
    }
    links.into_values().collect()
}
