//! Harvesting raw dataset documents from a repository API or a fixture
//! directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::Value;

use super::record::SchemaRegistry;
use super::{parse_document, IngestError};

/// Where raw metadata comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    /// Base URL of a Dataverse-compatible repository.
    Repository(String),
    /// Directory of JSON export files.
    Fixtures(PathBuf),
}

impl Endpoint {
    pub fn parse(spec: &str) -> Self {
        if spec.starts_with("http://") || spec.starts_with("https://") {
            Endpoint::Repository(spec.trim_end_matches('/').to_string())
        } else {
            Endpoint::Fixtures(PathBuf::from(spec))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawDocument {
    /// File path or URL the document was read from.
    pub origin: String,
    pub body: Value,
}

const SEARCH_PAGE_SIZE: usize = 100;

/// Returns every dataset document of the collection, sorted by persistent
/// id (documents whose id cannot be determined sort by origin, last).
pub fn fetch_collection(endpoint: &Endpoint, collection_id: &str) -> Result<Vec<RawDocument>, IngestError> {
    let mut docs = match endpoint {
        Endpoint::Fixtures(dir) => read_fixture_dir(dir)?,
        Endpoint::Repository(base) => RepositoryClient::new(base)?.fetch_all(collection_id)?,
    };
    let registry = SchemaRegistry::default();
    let mut keyed: Vec<(Option<String>, RawDocument)> = docs
        .drain(..)
        .map(|d| (parse_document(&d.body, &registry).ok().map(|r| r.persistent_id), d))
        .collect();
    keyed.sort_by(|(ka, a), (kb, b)| match (ka, kb) {
        (Some(x), Some(y)) => x.cmp(y).then_with(|| a.origin.cmp(&b.origin)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.origin.cmp(&b.origin),
    });
    Ok(keyed.into_iter().map(|(_, d)| d).collect())
}

fn read_fixture_dir(dir: &Path) -> Result<Vec<RawDocument>, IngestError> {
    if !dir.is_dir() {
        return Err(IngestError::CollectionNotFound(format!("{} is not a directory", dir.display())));
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| IngestError::RepoUnavailable(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    paths.sort();
    let mut docs = Vec::new();
    for path in paths {
        let bytes = fs::read(&path).map_err(|e| IngestError::RepoUnavailable(format!("{}: {e}", path.display())))?;
        let body: Value = serde_json::from_slice(&bytes)
            .map_err(|e| IngestError::MalformedPage(format!("{}: {e}", path.display())))?;
        let origin = path.display().to_string();
        match body {
            Value::Array(items) => docs.extend(items.into_iter().map(|body| RawDocument { origin: origin.clone(), body })),
            body => docs.push(RawDocument { origin, body }),
        }
    }
    Ok(docs)
}

/// Read-only client for the search and export endpoints of a Dataverse
/// installation.
pub struct RepositoryClient {
    base: String,
    http: reqwest::blocking::Client,
}

impl RepositoryClient {
    pub fn new(base: &str) -> Result<Self, IngestError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .map_err(|e| IngestError::RepoUnavailable(e.to_string()))?;
        Ok(RepositoryClient { base: base.trim_end_matches('/').to_string(), http })
    }

    fn get_json(&self, url: &str, query: &[(&str, String)], what: &str) -> Result<Value, IngestError> {
        let resp = self
            .http
            .get(url)
            .query(query)
            .send()
            .map_err(|e| IngestError::RepoUnavailable(format!("{url}: {e}")))?;
        let status = resp.status();
        if status.as_u16() == 404 {
            return Err(IngestError::CollectionNotFound(what.to_string()));
        }
        if status.is_server_error() {
            return Err(IngestError::RepoUnavailable(format!("{url}: HTTP {status}")));
        }
        if !status.is_success() {
            return Err(IngestError::MalformedPage(format!("{url}: HTTP {status}")));
        }
        let bytes = resp.bytes().map_err(|e| IngestError::RepoUnavailable(format!("{url}: {e}")))?;
        serde_json::from_slice(&bytes).map_err(|e| IngestError::MalformedPage(format!("{url}: {e}")))
    }

    /// Global ids of every dataset in the collection, following pagination.
    pub fn list_dataset_ids(&self, collection_id: &str) -> Result<Vec<String>, IngestError> {
        self.get_json(
            &format!("{}/api/dataverses/{collection_id}", self.base),
            &[],
            collection_id,
        )?;
        let mut ids = Vec::new();
        let mut start = 0usize;
        loop {
            let page = self.get_json(
                &format!("{}/api/search", self.base),
                &[
                    ("q", "*".to_string()),
                    ("type", "dataset".to_string()),
                    ("subtree", collection_id.to_string()),
                    ("per_page", SEARCH_PAGE_SIZE.to_string()),
                    ("start", start.to_string()),
                ],
                collection_id,
            )?;
            let data = page
                .get("data")
                .ok_or_else(|| IngestError::MalformedPage("search response without data".into()))?;
            let items = data.get("items").and_then(Value::as_array).cloned().unwrap_or_default();
            let total = data.get("total_count").and_then(Value::as_u64).unwrap_or(0) as usize;
            if items.is_empty() {
                break;
            }
            for item in &items {
                let id = item
                    .get("global_id")
                    .and_then(Value::as_str)
                    .ok_or_else(|| IngestError::MalformedPage("search item without global_id".into()))?;
                ids.push(id.to_string());
            }
            start += items.len();
            if start >= total {
                break;
            }
        }
        Ok(ids)
    }

    pub fn export_dataset(&self, persistent_id: &str) -> Result<RawDocument, IngestError> {
        let url = format!("{}/api/datasets/export", self.base);
        let body = self.get_json(
            &url,
            &[
                ("exporter", "dataverse_json".to_string()),
                ("persistentId", persistent_id.to_string()),
            ],
            persistent_id,
        )?;
        Ok(RawDocument { origin: format!("{url}?persistentId={persistent_id}"), body })
    }

    pub fn fetch_all(&self, collection_id: &str) -> Result<Vec<RawDocument>, IngestError> {
        self.list_dataset_ids(collection_id)?
            .iter()
            .map(|id| self.export_dataset(id))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_kind_from_string() {
        assert_eq!(
            Endpoint::parse("https://demo.dataverse.org/"),
            Endpoint::Repository("https://demo.dataverse.org".into())
        );
        assert_eq!(Endpoint::parse("fixtures/demo"), Endpoint::Fixtures("fixtures/demo".into()));
    }

    #[test]
    fn missing_fixture_dir_is_not_found() {
        let err = fetch_collection(&Endpoint::Fixtures("/nonexistent/dir".into()), "c").unwrap_err();
        assert!(matches!(err, IngestError::CollectionNotFound(_)));
    }
}
