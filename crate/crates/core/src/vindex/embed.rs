use std::collections::BTreeMap;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::vector::{normalize, EmbeddingVector};
use super::{IndexError, VectorIndex};
use crate::ingest::Chunk;
use crate::scalar::Scalar;
use crate::text;

/// Anything that turns texts into raw vectors.
pub trait Embedder<S: Scalar>: Send + Sync {
    /// Identifies the model and version; stored in the index so vectors from
    /// different models are never compared.
    fn model_tag(&self) -> String;

    fn max_batch(&self) -> usize {
        64
    }

    /// Raw (unnormalized) vectors, one per text, in input order.
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<S>>, IndexError>;
}

/// Embeds `texts` in batches and normalizes the results. When
/// `expected_dim` is given every vector must have that dimension.
pub fn embed_texts<S: Scalar>(
    embedder: &dyn Embedder<S>,
    texts: &[String],
    expected_dim: Option<usize>,
) -> Result<Vec<EmbeddingVector<S>>, IndexError> {
    let mut out = Vec::with_capacity(texts.len());
    let mut dim = expected_dim;
    for batch in texts.chunks(embedder.max_batch().max(1)) {
        let raw = embedder.embed_batch(batch)?;
        if raw.len() != batch.len() {
            return Err(IndexError::EndpointError(format!(
                "asked for {} embeddings, got {}",
                batch.len(),
                raw.len()
            )));
        }
        for values in raw {
            match dim {
                Some(d) if d != values.len() => {
                    return Err(IndexError::DimensionMismatch { expected: d, got: values.len() })
                }
                None => dim = Some(values.len()),
                _ => {}
            }
            out.push(normalize(&values)?);
        }
    }
    Ok(out)
}

/// Embeds every chunk and builds a fresh index.
pub fn build_index<S: Scalar>(
    embedder: &dyn Embedder<S>,
    chunks: &[Chunk],
    dim: usize,
) -> Result<VectorIndex<S>, IndexError> {
    let texts: Vec<String> = chunks.iter().map(|c| c.text.clone()).collect();
    let vectors = embed_texts(embedder, &texts, Some(dim))?;
    let mut index = VectorIndex::new(dim, embedder.model_tag());
    for (chunk, vector) in chunks.iter().zip(vectors) {
        index.insert(chunk.chunk_id.clone(), vector)?;
    }
    Ok(index)
}

/// Deterministic offline embedder.
///
/// Every token (see [`text::tokens`]) maps to a pseudo-random Gaussian
/// vector seeded by the SHA-256 of its bytes; a text's vector is the
/// log-weighted sum of its token vectors. Identical texts get identical
/// vectors, and texts sharing rare tokens point in similar directions. A
/// text without tokens is seeded by its raw bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashEmbedder {
    pub dim: usize,
}

impl HashEmbedder {
    pub fn new(dim: usize) -> Self {
        HashEmbedder { dim }
    }

    fn seeded(&self, bytes: &[u8]) -> Vec<f64> {
        let seed: [u8; 32] = Sha256::digest(bytes).into();
        let mut rng = ChaCha8Rng::from_seed(seed);
        (0..self.dim).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    pub fn embed_one<S: Scalar>(&self, text: &str) -> Vec<S> {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for token in text::tokens(text) {
            *counts.entry(token).or_default() += 1;
        }
        let mut acc = vec![0.0f64; self.dim];
        if counts.is_empty() {
            let mut bytes = b"raw:".to_vec();
            bytes.extend_from_slice(text.as_bytes());
            acc = self.seeded(&bytes);
        }
        for (token, count) in &counts {
            let weight = 1.0 + (*count as f64).ln();
            let mut bytes = b"tok:".to_vec();
            bytes.extend_from_slice(token.as_bytes());
            for (a, v) in acc.iter_mut().zip(self.seeded(&bytes)) {
                *a += weight * v;
            }
        }
        acc.into_iter().map(S::from_f64_lossy).collect()
    }
}

impl<S: Scalar> Embedder<S> for HashEmbedder {
    fn model_tag(&self) -> String {
        format!("hash-v1/{}", self.dim)
    }

    fn max_batch(&self) -> usize {
        usize::MAX
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<S>>, IndexError> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

#[derive(Serialize)]
struct EmbeddingRequest<'a> {
    model: &'a str,
    input: &'a [String],
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    embedding: Vec<f64>,
    #[serde(default)]
    index: Option<usize>,
}

/// Client for the common `POST /embeddings` wire shape:
/// `{model, input: [..]}` answered by `{data: [{embedding: [..]}]}`.
pub struct HttpEmbedder {
    url: String,
    model: String,
    api_key: Option<String>,
    max_batch: usize,
    http: reqwest::blocking::Client,
}

impl HttpEmbedder {
    pub fn new(base_url: &str, model: &str, api_key: Option<String>, timeout: Duration, max_batch: usize) -> Self {
        let base = base_url.trim_end_matches('/');
        let url = if base.ends_with("/embeddings") { base.to_string() } else { format!("{base}/embeddings") };
        let http = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .expect("reqwest client builds");
        HttpEmbedder { url, model: model.to_string(), api_key, max_batch: max_batch.max(1), http }
    }
}

impl<S: Scalar> Embedder<S> for HttpEmbedder {
    fn model_tag(&self) -> String {
        format!("{}@{}", self.model, self.url)
    }

    fn max_batch(&self) -> usize {
        self.max_batch
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<S>>, IndexError> {
        if texts.is_empty() {
            return Ok(vec![]);
        }
        let mut req = self.http.post(&self.url).json(&EmbeddingRequest { model: &self.model, input: texts });
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| {
            if e.is_timeout() {
                IndexError::ModelTimeout(self.url.clone())
            } else {
                IndexError::EndpointError(format!("{}: {e}", self.url))
            }
        })?;
        let status = resp.status();
        if !status.is_success() {
            return Err(IndexError::EndpointError(format!("{}: HTTP {status}", self.url)));
        }
        let mut body: EmbeddingResponse = resp.json().map_err(|e| {
            if e.is_timeout() {
                IndexError::ModelTimeout(self.url.clone())
            } else {
                IndexError::EndpointError(format!("{}: bad embeddings body: {e}", self.url))
            }
        })?;
        if body.data.iter().all(|d| d.index.is_some()) {
            body.data.sort_by_key(|d| d.index);
        }
        Ok(body
            .data
            .into_iter()
            .map(|d| d.embedding.into_iter().map(S::from_f64_lossy).collect())
            .collect())
    }
}
