use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use ghostwriter_core::ingest::{ChunkConfig, SchemaRegistry, Vocabulary};
use ghostwriter_core::modelgw::Gateway;
use ghostwriter_core::pipeline::{is_indexed, load_collection, Collection, PipelineError};
use ghostwriter_core::store::Store;
use ghostwriter_core::strategies::{StrategyConfig, Turn};
use ghostwriter_core::vindex::Embedder;
use serde::Serialize;

/// One answered question in a session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionTurn {
    pub question: String,
    pub answer_text: String,
    pub citations: Vec<String>,
}

#[derive(Debug)]
pub struct Session {
    pub session_id: String,
    pub collection_id: String,
    pub turns: Vec<SessionTurn>,
    pub created_at: Instant,
}

impl Session {
    pub fn history(&self) -> Vec<Turn> {
        self.turns
            .iter()
            .map(|t| Turn { question: t.question.clone(), answer: t.answer_text.clone() })
            .collect()
    }
}

struct SessionSlot {
    session: Arc<tokio::sync::Mutex<Session>>,
    last_used: Instant,
}

/// In-memory session table with idle eviction.
pub struct Sessions {
    ttl: Duration,
    slots: Mutex<HashMap<String, SessionSlot>>,
}

impl Sessions {
    pub fn new(ttl: Duration) -> Self {
        Sessions { ttl, slots: Mutex::new(HashMap::new()) }
    }

    fn evict(&self, slots: &mut HashMap<String, SessionSlot>, now: Instant) {
        slots.retain(|_, s| now.duration_since(s.last_used) < self.ttl);
    }

    /// The live session with this id, touching its idle timer.
    pub fn get(&self, session_id: &str) -> Option<Arc<tokio::sync::Mutex<Session>>> {
        let now = Instant::now();
        let mut slots = self.slots.lock().unwrap();
        self.evict(&mut slots, now);
        let slot = slots.get_mut(session_id)?;
        slot.last_used = now;
        Some(slot.session.clone())
    }

    pub fn create(&self, collection_id: &str) -> Arc<tokio::sync::Mutex<Session>> {
        let now = Instant::now();
        let session_id = uuid::Uuid::new_v4().simple().to_string();
        let session = Arc::new(tokio::sync::Mutex::new(Session {
            session_id: session_id.clone(),
            collection_id: collection_id.to_string(),
            turns: vec![],
            created_at: now,
        }));
        let mut slots = self.slots.lock().unwrap();
        self.evict(&mut slots, now);
        slots.insert(session_id, SessionSlot { session: session.clone(), last_used: now });
        session
    }

    pub fn len(&self) -> usize {
        self.slots.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Everything the service is built from.
pub struct ServiceOptions {
    pub store: Store,
    pub generator: Gateway,
    pub judge: Gateway,
    pub embedder: Arc<dyn Embedder<f32>>,
    pub registry: SchemaRegistry,
    pub vocabulary: Option<Vocabulary>,
    pub chunking: ChunkConfig,
    /// Defaults for fields an ask request leaves out.
    pub defaults: StrategyConfig,
    pub page_size: usize,
    pub session_ttl: Duration,
    /// Generate community summaries when the admin endpoint rebuilds.
    pub summarize: bool,
}

/// Shared service state. Collections are immutable snapshots swapped
/// whole by the ingest endpoint.
pub struct AppState {
    pub opts: ServiceOptions,
    pub sessions: Sessions,
    collections: RwLock<BTreeMap<String, Arc<Collection<f32>>>>,
    /// Single writer for ingestion.
    pub writer: tokio::sync::Mutex<()>,
}

impl AppState {
    /// Loads every indexed collection found in the store.
    pub fn new(opts: ServiceOptions) -> Result<Self, PipelineError> {
        let mut collections = BTreeMap::new();
        for id in opts.store.collections()? {
            if is_indexed(&opts.store, &id) {
                collections.insert(id.clone(), Arc::new(load_collection(&opts.store, &id)?));
            }
        }
        Ok(AppState {
            sessions: Sessions::new(opts.session_ttl),
            opts,
            collections: RwLock::new(collections),
            writer: tokio::sync::Mutex::new(()),
        })
    }

    pub fn collection(&self, id: &str) -> Option<Arc<Collection<f32>>> {
        self.collections.read().unwrap().get(id).cloned()
    }

    pub fn loaded_ids(&self) -> Vec<String> {
        self.collections.read().unwrap().keys().cloned().collect()
    }

    pub fn install(&self, collection: Collection<f32>) {
        self.collections.write().unwrap().insert(collection.collection_id.clone(), Arc::new(collection));
    }
}
