use serde::{Deserialize, Serialize};

/// Which retriever produced an item. Scores are only comparable within one
/// provenance class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Vector,
    Graph,
    Lexical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalItem {
    /// Chunk id for vector items, `community:<id>` for graph items.
    pub chunk_id: String,
    pub score: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RetrievalResult {
    pub items: Vec<RetrievalItem>,
    pub trace_flags: Vec<String>,
}

impl RetrievalResult {
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn chunk_ids(&self) -> Vec<&str> {
        self.items.iter().map(|i| i.chunk_id.as_str()).collect()
    }

    pub fn flag(&mut self, flag: &str) {
        if !self.has_flag(flag) {
            self.trace_flags.push(flag.to_string());
        }
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.trace_flags.iter().any(|f| f == flag)
    }

    /// Chunk ids unique, scores non-increasing within each provenance.
    pub fn is_well_formed(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        if !self.items.iter().all(|i| seen.insert(i.chunk_id.as_str())) {
            return false;
        }
        let mut last: std::collections::HashMap<Provenance, f64> = Default::default();
        for item in &self.items {
            if let Some(prev) = last.insert(item.provenance, item.score) {
                if item.score > prev {
                    return false;
                }
            }
        }
        true
    }
}
