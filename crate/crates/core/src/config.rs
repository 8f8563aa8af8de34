//! JSON configuration file shared by the CLI and the service.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::ChunkConfig;
use crate::modelgw::{Gateway, Generator, HttpChatGenerator};
use crate::strategies::StrategyConfig;
use crate::vindex::{Embedder, HashEmbedder, HttpEmbedder};

/// Environment variable holding the bearer key for model endpoints.
pub const MODEL_KEY_ENV: &str = "GHOSTWRITER_MODEL_KEY";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {reason}")]
    Unreadable { path: String, reason: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub url: String,
    #[serde(default)]
    pub model: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_timeout() -> u64 {
    60
}

impl EndpointConfig {
    pub fn new(url: impl Into<String>) -> Self {
        EndpointConfig { url: url.into(), model: String::new(), timeout_secs: default_timeout() }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs.max(1))
    }

    /// Dimension of a `hash://<dim>` endpoint.
    pub fn hash_dim(&self) -> Option<usize> {
        self.url.strip_prefix("hash://")?.trim_end_matches('/').parse().ok()
    }
}

/// An endpoint may be written as a bare URL string or as an object.
#[derive(Deserialize)]
#[serde(untagged)]
enum EndpointSpec {
    Url(String),
    Full(EndpointConfig),
}

fn endpoint<'de, D: serde::Deserializer<'de>>(d: D) -> Result<EndpointConfig, D::Error> {
    Ok(match EndpointSpec::deserialize(d)? {
        EndpointSpec::Url(url) => EndpointConfig::new(url),
        EndpointSpec::Full(cfg) => cfg,
    })
}

fn opt_endpoint<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<EndpointConfig>, D::Error> {
    Ok(Option::<EndpointSpec>::deserialize(d)?.map(|s| match s {
        EndpointSpec::Url(url) => EndpointConfig::new(url),
        EndpointSpec::Full(cfg) => cfg,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Defaults {
    pub k: usize,
    pub tau: f64,
    pub max_iterations: usize,
}

impl Default for Defaults {
    fn default() -> Self {
        let s = StrategyConfig::default();
        Defaults { k: s.k, tau: s.tau, max_iterations: s.max_iterations }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    #[serde(deserialize_with = "endpoint")]
    pub model_endpoint: EndpointConfig,
    /// Relevance and sufficiency judge; the model endpoint when absent.
    #[serde(default, deserialize_with = "opt_endpoint", skip_serializing_if = "Option::is_none")]
    pub judge_endpoint: Option<EndpointConfig>,
    #[serde(deserialize_with = "endpoint")]
    pub embed_endpoint: EndpointConfig,
    #[serde(default = "default_budget")]
    pub context_budget_chars: usize,
    #[serde(default = "default_chunk")]
    pub chunk_chars: usize,
    #[serde(default = "default_overlap")]
    pub overlap_chars: usize,
    #[serde(default)]
    pub defaults: Defaults,
    pub store_path: PathBuf,
    #[serde(default = "default_port")]
    pub port: u16,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocabulary_path: Option<PathBuf>,
    #[serde(default = "default_page_size")]
    pub page_size: usize,
    #[serde(default = "default_ttl")]
    pub session_ttl_secs: u64,
}

fn default_budget() -> usize {
    crate::modelgw::DEFAULT_CONTEXT_BUDGET
}
fn default_chunk() -> usize {
    ChunkConfig::default().chunk_chars
}
fn default_overlap() -> usize {
    ChunkConfig::default().overlap_chars
}
fn default_port() -> u16 {
    8080
}
fn default_page_size() -> usize {
    20
}
fn default_ttl() -> u64 {
    3600
}

impl Config {
    /// Parses config text; relative paths resolve against `base_dir`.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut cfg: Config = serde_json::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if cfg.store_path.is_relative() {
            cfg.store_path = base_dir.join(&cfg.store_path);
        }
        if let Some(p) = cfg.vocabulary_path.as_mut() {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Unreadable { path: path.display().to_string(), reason: e.to_string() })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, &base)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.chunking().validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.strategy_defaults().validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.context_budget_chars == 0 {
            return Err(ConfigError::Invalid("context_budget_chars must be positive".into()));
        }
        if self.page_size == 0 {
            return Err(ConfigError::Invalid("page_size must be positive".into()));
        }
        if self.embed_endpoint.url.starts_with("hash://") && self.embed_endpoint.hash_dim().filter(|d| *d > 0).is_none() {
            return Err(ConfigError::Invalid(format!("bad hash embedder url {}", self.embed_endpoint.url)));
        }
        Ok(())
    }

    pub fn chunking(&self) -> ChunkConfig {
        ChunkConfig { chunk_chars: self.chunk_chars, overlap_chars: self.overlap_chars }
    }

    /// Strategy config with the configured defaults (strategy vanilla).
    pub fn strategy_defaults(&self) -> StrategyConfig {
        StrategyConfig {
            k: self.defaults.k,
            tau: self.defaults.tau,
            max_iterations: self.defaults.max_iterations,
            ..StrategyConfig::default()
        }
    }

    fn api_key() -> Option<String> {
        std::env::var(MODEL_KEY_ENV).ok().filter(|k| !k.is_empty())
    }

    /// `hash://<dim>` selects the offline hash embedder; anything else is an
    /// embeddings endpoint.
    pub fn embedder(&self) -> Box<dyn Embedder<f32>> {
        let e = &self.embed_endpoint;
        match e.hash_dim() {
            Some(dim) => Box::new(HashEmbedder::new(dim)),
            None => Box::new(HttpEmbedder::new(&e.url, &e.model, Self::api_key(), e.timeout(), 64)),
        }
    }

    fn gateway_for(&self, e: &EndpointConfig) -> Gateway {
        let generator: Arc<dyn Generator> = Arc::new(HttpChatGenerator::new(&e.url, &e.model, Self::api_key(), e.timeout()));
        Gateway::new(generator).with_budget(self.context_budget_chars)
    }

    pub fn generator(&self) -> Gateway {
        self.gateway_for(&self.model_endpoint)
    }

    pub fn judge(&self) -> Gateway {
        self.gateway_for(self.judge_endpoint.as_ref().unwrap_or(&self.model_endpoint))
    }
}
