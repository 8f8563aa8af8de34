use serde::{Deserialize, Serialize};

use super::IndexError;
use crate::scalar::Scalar;

/// Tolerance on the L2 norm of a normalized vector.
pub const NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector<S = f32> {
    values: Vec<S>,
    normalized: bool,
}

impl<S: Scalar> EmbeddingVector<S> {
    /// Wraps raw values without normalizing them.
    pub fn raw(values: Vec<S>) -> Self {
        EmbeddingVector { values, normalized: false }
    }

    pub(crate) fn assume_normalized(values: Vec<S>) -> Self {
        EmbeddingVector { values, normalized: true }
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Euclidean norm, accumulated in `f64`.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.as_f64() * v.as_f64()).sum::<f64>().sqrt()
    }

    pub fn into_normalized(self) -> Result<Self, IndexError> {
        if self.normalized {
            Ok(self)
        } else {
            normalize(&self.values)
        }
    }
}

/// Scales `raw` to unit L2 norm.
pub fn normalize<S: Scalar>(raw: &[S]) -> Result<EmbeddingVector<S>, IndexError> {
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(IndexError::NonFinite);
    }
    let norm = raw.iter().map(|v| v.as_f64() * v.as_f64()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(IndexError::ZeroVector);
    }
    let values = raw.iter().map(|v| S::from_f64_lossy(v.as_f64() / norm)).collect();
    Ok(EmbeddingVector { values, normalized: true })
}

/// Dot product accumulated in `f64`.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.as_f64() * y.as_f64()).sum()
}

/// Cosine similarity clamped to `[-1, 1]`.
///
/// Always divides by both norms, so rounding left over from storing a
/// normalized vector in a narrow scalar does not leak into the result.
pub fn cosine<S: Scalar>(a: &EmbeddingVector<S>, b: &EmbeddingVector<S>) -> Result<f64, IndexError> {
    if a.dim() != b.dim() {
        return Err(IndexError::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let denom = a.norm() * b.norm();
    if denom == 0.0 {
        return Err(IndexError::ZeroVector);
    }
    Ok((dot(&a.values, &b.values) / denom).clamp(-1.0, 1.0))
}
