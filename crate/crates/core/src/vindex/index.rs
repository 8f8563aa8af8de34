use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::vector::{dot, EmbeddingVector};
use super::IndexError;
use crate::retrieval::{Provenance, RetrievalItem, RetrievalResult};
use crate::scalar::Scalar;

/// Exact cosine k-nearest-neighbour index over normalized vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorIndex<S = f32> {
    dim: usize,
    model_tag: String,
    entries: BTreeMap<String, EmbeddingVector<S>>,
}

impl<S: Scalar> VectorIndex<S> {
    pub fn new(dim: usize, model_tag: impl Into<String>) -> Self {
        VectorIndex { dim, model_tag: model_tag.into(), entries: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn model_tag(&self) -> &str {
        &self.model_tag
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, chunk_id: &str) -> Option<&EmbeddingVector<S>> {
        self.entries.get(chunk_id)
    }

    /// Entries in ascending chunk id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &EmbeddingVector<S>)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Inserts (or replaces) a vector, normalizing it first if needed.
    pub fn insert(&mut self, chunk_id: impl Into<String>, vector: EmbeddingVector<S>) -> Result<(), IndexError> {
        if vector.dim() != self.dim {
            return Err(IndexError::DimensionMismatch { expected: self.dim, got: vector.dim() });
        }
        self.entries.insert(chunk_id.into(), vector.into_normalized()?);
        Ok(())
    }

    /// Top-`k` entries by cosine similarity, best first; equal scores are
    /// ordered by ascending chunk id.
    pub fn knn(&self, query: &EmbeddingVector<S>, k: usize) -> Result<RetrievalResult, IndexError> {
        if query.dim() != self.dim {
            return Err(IndexError::DimensionMismatch { expected: self.dim, got: query.dim() });
        }
        if k == 0 || self.entries.is_empty() {
            return Ok(RetrievalResult::default());
        }
        let query = query.clone().into_normalized()?;
        let mut scored: Vec<(&str, f64)> = self
            .entries
            .iter()
            .map(|(id, v)| (id.as_str(), dot(query.values(), v.values())))
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then_with(|| a.0.cmp(b.0)));
        scored.truncate(k);
        Ok(RetrievalResult {
            items: scored
                .into_iter()
                .map(|(id, score)| RetrievalItem {
                    chunk_id: id.to_string(),
                    score,
                    provenance: Provenance::Vector,
                })
                .collect(),
            trace_flags: vec![],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vindex::normalize;

    fn index() -> VectorIndex<f64> {
        let mut idx = VectorIndex::new(2, "test");
        idx.insert("a", EmbeddingVector::raw(vec![1.0, 0.0])).unwrap();
        idx.insert("b", EmbeddingVector::raw(vec![0.0, 2.0])).unwrap();
        idx.insert("c", EmbeddingVector::raw(vec![1.0, 1.0])).unwrap();
        idx
    }

    #[test]
    fn stored_vector_ranks_first() {
        let idx = index();
        let res = idx.knn(&normalize(&[0.0, 1.0]).unwrap(), 3).unwrap();
        assert_eq!(res.chunk_ids(), ["b", "c", "a"]);
        assert!((res.items[0].score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn k_zero_and_oversized_k() {
        let idx = index();
        let q = normalize(&[1.0, 0.0]).unwrap();
        assert!(idx.knn(&q, 0).unwrap().is_empty());
        assert_eq!(idx.knn(&q, 99).unwrap().len(), 3);
    }

    #[test]
    fn ties_break_by_chunk_id() {
        let mut idx = VectorIndex::<f32>::new(2, "t");
        for id in ["z", "m", "a"] {
            idx.insert(id, EmbeddingVector::raw(vec![1.0, 0.0])).unwrap();
        }
        let res = idx.knn(&EmbeddingVector::raw(vec![2.0, 0.0]), 2).unwrap();
        assert_eq!(res.chunk_ids(), ["a", "m"]);
    }

    #[test]
    fn wrong_dimension_rejected() {
        let mut idx = index();
        assert!(matches!(
            idx.insert("x", EmbeddingVector::raw(vec![1.0])),
            Err(IndexError::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(idx.knn(&EmbeddingVector::raw(vec![1.0, 0.0, 0.0]), 1).is_err());
    }

    #[test]
    fn empty_index_returns_nothing() {
        let idx = VectorIndex::<f32>::new(4, "t");
        assert!(idx.knn(&EmbeddingVector::raw(vec![1.0, 0.0, 0.0, 0.0]), 5).unwrap().is_empty());
    }
}
