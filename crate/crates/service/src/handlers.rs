use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::response::Html;
use axum::Json;
use ghostwriter_core::ingest::{ingest_collection, Endpoint, IngestSummary};
use ghostwriter_core::pipeline::{build_collection, is_indexed, load_collection, BuildReport, Collection};
use ghostwriter_core::strategies::{
    run_strategy, Answer, RagContext, StrategyConfig, StrategyError, StrategyKind, COMMUNITY_PREFIX,
};
use ghostwriter_core::trace::Trace;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::ApiError;
use crate::state::{AppState, SessionTurn};

pub type Shared = State<Arc<AppState>>;

const INDEX_HTML: &str = include_str!("static/index.html");

/// Runs blocking core work off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::Internal(format!("worker failed: {e}")))
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload.map(|Json(v)| v).map_err(|e| ApiError::BadRequest(e.body_text()))
}

pub async fn index() -> Html<&'static str> {
    Html(INDEX_HTML)
}

#[derive(Debug, Deserialize)]
pub struct AskRequest {
    #[serde(default)]
    pub session_id: Option<String>,
    pub question: String,
    #[serde(default)]
    pub strategy: Option<String>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub rerank: Option<bool>,
    #[serde(default)]
    pub collection_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceStub {
    pub id: String,
    pub title: String,
}

#[derive(Debug, Serialize)]
pub struct AskResponse {
    pub session_id: String,
    pub collection_id: String,
    pub strategy: StrategyKind,
    pub answer: String,
    pub uncited: bool,
    pub citations: Vec<String>,
    pub sources: Vec<SourceStub>,
    pub flags: Vec<String>,
    pub trace: Trace,
}

impl AskRequest {
    fn config(&self, defaults: &StrategyConfig) -> Result<StrategyConfig, StrategyError> {
        let strategy = match &self.strategy {
            Some(s) => s.parse()?,
            None => defaults.strategy,
        };
        Ok(StrategyConfig {
            strategy,
            k: self.k.unwrap_or(defaults.k),
            tau: self.tau.unwrap_or(defaults.tau),
            max_iterations: self.max_iterations.unwrap_or(defaults.max_iterations),
            rerank: self.rerank.unwrap_or(defaults.rerank),
        })
    }
}

/// The loaded collection for an ask, or why there is none.
fn pick_collection(state: &AppState, requested: Option<&str>) -> Result<Arc<Collection<f32>>, ApiError> {
    let id = match requested {
        Some(id) => id.to_string(),
        None => {
            let loaded = state.loaded_ids();
            match loaded.as_slice() {
                [only] => only.clone(),
                [] => return Err(ApiError::Conflict("no indexed collection; run `index build` first".into())),
                _ => return Err(ApiError::BadRequest(format!("collection_id required, one of {}", loaded.join(", ")))),
            }
        }
    };
    match state.collection(&id) {
        Some(c) => Ok(c),
        None if is_indexed(&state.opts.store, &id) => Ok(Arc::new(load_collection(&state.opts.store, &id)?)),
        None if !state.opts.store.records_in(&id)?.is_empty() => {
            Err(ApiError::Conflict(format!("collection {id} is not indexed; run `index build` first")))
        }
        None => Err(ApiError::NotFound(format!("unknown collection {id}"))),
    }
}

fn stub(collection: &Collection<f32>, id: &str) -> Option<SourceStub> {
    collection.corpus.record(id).map(|r| SourceStub { id: r.persistent_id.clone(), title: r.title.clone() })
}

/// Source ids behind an answer item: the chunk's record, or the datasets of
/// a community.
fn item_sources(collection: &Collection<f32>, item: &str) -> Vec<String> {
    match item.strip_prefix(COMMUNITY_PREFIX) {
        Some(cid) => collection.graph.as_ref().map(|g| g.dataset_members(cid)).unwrap_or_default(),
        None => match collection.corpus.chunk(item) {
            Some(c) => vec![c.source_id.clone()],
            None => vec![item.to_string()],
        },
    }
}

/// Stubs for the cited sources; the top retrieved records when nothing was
/// cited.
pub fn resolve_sources(collection: &Collection<f32>, answer: &mut Answer, k: usize) -> Vec<SourceStub> {
    let mut ids: Vec<String> = vec![];
    let push = |id: String, ids: &mut Vec<String>| {
        if !ids.contains(&id) {
            ids.push(id);
        }
    };
    if !answer.citations.is_empty() {
        for c in &answer.citations {
            let members = match c.strip_prefix(COMMUNITY_PREFIX) {
                Some(_) => item_sources(collection, c),
                None => vec![c.clone()],
            };
            for m in members {
                push(m, &mut ids);
            }
        }
        return ids.iter().filter_map(|id| stub(collection, id)).collect();
    }
    for item in &answer.retrieved {
        for m in item_sources(collection, item) {
            push(m, &mut ids);
        }
    }
    let stubs: Vec<SourceStub> = ids.iter().filter_map(|id| stub(collection, id)).take(k.max(1)).collect();
    if !stubs.is_empty() && !answer.has_flag("sources_from_retrieval") {
        answer.flags.push("sources_from_retrieval".into());
    }
    stubs
}

pub async fn ask(State(state): Shared, payload: Result<Json<AskRequest>, JsonRejection>) -> Result<Json<AskResponse>, ApiError> {
    let req = body(payload)?;
    let cfg = req.config(&state.opts.defaults).map_err(ApiError::strategy)?;
    cfg.validate().map_err(ApiError::strategy)?;
    if req.question.trim().is_empty() {
        return Err(ApiError::strategy(StrategyError::EmptyQuestion));
    }

    let existing = req.session_id.as_deref().and_then(|id| state.sessions.get(id));
    let (session, collection) = match existing {
        Some(session) => {
            let bound = session.lock().await.collection_id.clone();
            if let Some(asked) = req.collection_id.as_deref().filter(|c| *c != bound) {
                return Err(ApiError::BadRequest(format!("session is bound to collection {bound}, not {asked}")));
            }
            let collection = pick_collection(&state, Some(&bound))?;
            (session, collection)
        }
        None => {
            let collection = pick_collection(&state, req.collection_id.as_deref())?;
            (state.sessions.create(&collection.collection_id), collection)
        }
    };

    // Held for the whole run so asks on one session apply in arrival order.
    let mut session = session.lock().await;
    let history = session.history();
    let run_state = state.clone();
    let run_collection = collection.clone();
    let question = req.question.clone();
    let run_cfg = cfg.clone();
    let outcome = blocking(move || {
        let opts = &run_state.opts;
        let ctx = RagContext {
            corpus: &run_collection.corpus,
            index: &run_collection.index,
            embedder: opts.embedder.as_ref(),
            generator: &opts.generator,
            judge: &opts.judge,
            graph: run_collection.graph.as_ref(),
            thresholds: Default::default(),
        };
        run_strategy(&question, &history, &run_cfg, &ctx)
    })
    .await?;
    let mut answer = outcome.map_err(|failure| ApiError::Run { failure })?;

    let sources = resolve_sources(&collection, &mut answer, cfg.k);
    session.turns.push(SessionTurn {
        question: req.question.clone(),
        answer_text: answer.text.clone(),
        citations: answer.citations.clone(),
    });
    Ok(Json(AskResponse {
        session_id: session.session_id.clone(),
        collection_id: collection.collection_id.clone(),
        strategy: cfg.strategy,
        answer: answer.text,
        uncited: answer.uncited,
        citations: answer.citations,
        sources,
        flags: answer.flags,
        trace: answer.trace,
    }))
}

#[derive(Debug, Serialize)]
pub struct CollectionInfo {
    pub id: String,
    pub records: usize,
    pub indexed: bool,
}

pub async fn collections(State(state): Shared) -> Result<Json<Vec<CollectionInfo>>, ApiError> {
    let list = blocking(move || -> Result<Vec<CollectionInfo>, ApiError> {
        let store = &state.opts.store;
        let records = store.records()?;
        let mut out: Vec<CollectionInfo> = vec![];
        for r in &records {
            match out.iter_mut().find(|c| c.id == r.collection_id) {
                Some(c) => c.records += 1,
                None => out.push(CollectionInfo { id: r.collection_id.clone(), records: 1, indexed: false }),
            }
        }
        out.sort_by(|a, b| a.id.cmp(&b.id));
        for c in &mut out {
            c.indexed = is_indexed(store, &c.id);
        }
        Ok(out)
    })
    .await??;
    Ok(Json(list))
}

#[derive(Debug, Deserialize)]
pub struct PageQuery {
    #[serde(default)]
    pub page: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct SourcePage {
    pub collection_id: String,
    pub page: usize,
    pub page_size: usize,
    pub total: usize,
    pub sources: Vec<SourceStub>,
}

pub async fn list_sources(
    State(state): Shared,
    Path(collection_id): Path<String>,
    query: Result<Query<PageQuery>, axum::extract::rejection::QueryRejection>,
) -> Result<Json<SourcePage>, ApiError> {
    let Query(query) = query.map_err(|e| ApiError::BadRequest(e.body_text()))?;
    let page = query.page.unwrap_or(1);
    if page == 0 {
        return Err(ApiError::BadRequest("page numbers start at 1".into()));
    }
    let page_size = state.opts.page_size;
    let records = {
        let state = state.clone();
        let id = collection_id.clone();
        blocking(move || state.opts.store.records_in(&id)).await??
    };
    if records.is_empty() {
        return Err(ApiError::NotFound(format!("unknown collection {collection_id}")));
    }
    let sources = records
        .iter()
        .skip((page - 1).saturating_mul(page_size))
        .take(page_size)
        .map(|r| SourceStub { id: r.persistent_id.clone(), title: r.title.clone() })
        .collect();
    Ok(Json(SourcePage { collection_id, page, page_size, total: records.len(), sources }))
}

pub async fn get_source(State(state): Shared, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let lookup = id.clone();
    let record = blocking(move || state.opts.store.get_record(&lookup)).await??;
    match record {
        Some(r) => Ok(Json(serde_json::to_value(r).map_err(|e| ApiError::Internal(e.to_string()))?)),
        None => Err(ApiError::NotFound(format!("unknown source {id}"))),
    }
}

#[derive(Debug, Deserialize)]
pub struct IngestRequest {
    pub endpoint: String,
    pub collection_id: String,
}

#[derive(Debug, Serialize)]
pub struct IngestResponse {
    pub ingest: IngestSummary,
    pub build: BuildReport,
}

pub async fn admin_ingest(
    State(state): Shared,
    payload: Result<Json<IngestRequest>, JsonRejection>,
) -> Result<Json<IngestResponse>, ApiError> {
    let req = body(payload)?;
    if req.collection_id.trim().is_empty() {
        return Err(ApiError::BadRequest("collection_id is empty".into()));
    }
    let _writer = state.writer.lock().await;
    let work = state.clone();
    let (ingest, build, collection) = blocking(move || -> Result<_, ApiError> {
        let opts = &work.opts;
        let endpoint = Endpoint::parse(&req.endpoint);
        let ingest = ingest_collection(&opts.store, &endpoint, &req.collection_id, &opts.registry, opts.chunking)?;
        let summarizer = opts.summarize.then_some(&opts.generator);
        let mut trace = Trace::new();
        let build = build_collection(
            &opts.store,
            &req.collection_id,
            opts.embedder.as_ref(),
            opts.vocabulary.as_ref(),
            &opts.registry,
            summarizer,
            &mut trace,
        )?;
        let collection = load_collection(&opts.store, &req.collection_id)?;
        Ok((ingest, build, collection))
    })
    .await??;
    state.install(collection);
    Ok(Json(IngestResponse { ingest, build }))
}

#[derive(Debug, Serialize)]
pub struct StrategiesResponse {
    pub strategies: Vec<&'static str>,
    pub defaults: StrategyConfig,
}

pub async fn strategies(State(state): Shared) -> Json<StrategiesResponse> {
    Json(StrategiesResponse {
        strategies: StrategyKind::ALL.iter().map(|k| k.as_str()).collect(),
        defaults: state.opts.defaults.clone(),
    })
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct Health {
    pub status: String,
    pub index_loaded: bool,
    pub model_endpoint_reachable: bool,
}

pub async fn health(State(state): Shared) -> Result<Json<Health>, ApiError> {
    let index_loaded = !state.loaded_ids().is_empty();
    let model_endpoint_reachable = blocking(move || state.opts.generator.reachable()).await?;
    let status = if index_loaded && model_endpoint_reachable { "ok" } else { "degraded" };
    Ok(Json(Health { status: status.into(), index_loaded, model_endpoint_reachable }))
}
