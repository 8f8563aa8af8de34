//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use ghostwriter_core::evalkit::{generate_marker_corpus, groundedness_of};
use ghostwriter_core::ingest::{
    ingest_collection, parse_document, parse_document_bytes, to_croissant, ChunkConfig, Endpoint, IngestError,
    SchemaRegistry, SourceRecord,
};
use ghostwriter_core::kgraph::{detect_communities, EdgeKind, KnowledgeGraph, NodeKind};
use ghostwriter_core::modelgw::{Gateway, GenerationRequest, Generator, LatencyClock, ModelError, ScriptedMock};
use ghostwriter_core::pipeline::{build_collection, load_collection, Collection};
use ghostwriter_core::store::Store;
use ghostwriter_core::strategies::{
    retrieval_rounds, retrieve_corrective, retrieve_vanilla, run_strategy, RagContext, StrategyConfig, StrategyKind,
};
use ghostwriter_core::trace::{StepKind, Trace};
use ghostwriter_core::vindex::{cosine, normalize, EmbeddingVector, HashEmbedder, VectorIndex};
use ghostwriter_service::{router, AppState, ServiceOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

const DIM: usize = 384;

type Criterion = fn() -> Result<String, String>;
type ErrorCheck = fn(&IngestError) -> bool;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ghostwriter"))
}

fn write_config(dir: &Path) -> PathBuf {
    let cfg = json!({
        "model_endpoint": "http://127.0.0.1:9/v1",
        "embed_endpoint": format!("hash://{DIM}"),
        "store_path": dir.join("store"),
        "vocabulary_path": fixtures().join("vocabulary.json"),
    });
    let path = dir.join("config.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    path
}

/// Runs the CLI and returns stdout, failing on a non-zero exit.
fn cli(config: &Path, args: &[&str]) -> Vec<u8> {
    let out = bin().arg("--config").arg(config).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "ghostwriter {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn gateway(generator: Arc<dyn Generator>) -> Gateway {
    Gateway::new(generator).with_clock(LatencyClock::Frozen)
}

fn scripted(replies: &[String]) -> Gateway {
    gateway(Arc::new(ScriptedMock::replies(replies.iter().cloned()).unwrap()))
}

/// Marker corpus ingested and indexed in-process.
fn marker_collection(dir: &Path, count: usize) -> Collection<f32> {
    generate_marker_corpus(&dir.join("markers"), count, 42).unwrap();
    let store = Store::open(dir.join("store")).unwrap();
    let registry = SchemaRegistry::default();
    let endpoint = Endpoint::Fixtures(dir.join("markers/records"));
    ingest_collection(&store, &endpoint, "markers", &registry, ChunkConfig::default()).unwrap();
    build_collection::<f32>(&store, "markers", &HashEmbedder::new(DIM), None, &registry, None, &mut Trace::new())
        .unwrap();
    load_collection(&store, "markers").unwrap()
}

fn ctx<'a>(c: &'a Collection<f32>, embedder: &'a HashEmbedder, gw: &'a Gateway) -> RagContext<'a, f32> {
    RagContext {
        corpus: &c.corpus,
        index: &c.index,
        embedder,
        generator: gw,
        judge: gw,
        graph: c.graph.as_ref(),
        thresholds: Default::default(),
    }
}

fn random_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        if v.iter().any(|x| *x != 0.0) {
            return v;
        }
    }
}

fn knn_oracle() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for instance in 0..100 {
        let dim = rng.random_range(4..=64);
        let n = rng.random_range(1..=500);
        let k = rng.random_range(1..=n);
        let mut index = VectorIndex::<f64>::new(dim, "oracle");
        let mut raw: Vec<(String, Vec<f64>)> = vec![];
        for i in 0..n {
            // Every tenth vector repeats an earlier one so ties occur.
            let v = if i % 10 == 9 { raw[i - 1].1.clone() } else { random_vec(&mut rng, dim) };
            let id = format!("c{:04}", rng.random_range(0..100_000) * 1000 + i);
            index.insert(id.clone(), EmbeddingVector::raw(v.clone())).unwrap();
            raw.push((id, v));
        }
        let q = random_vec(&mut rng, dim);
        let got: Vec<String> =
            index.knn(&EmbeddingVector::raw(q.clone()), k).unwrap().items.into_iter().map(|i| i.chunk_id).collect();

        let unit = |v: &[f64]| {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| x / norm).collect::<Vec<f64>>()
        };
        let qn = unit(&q);
        let mut scan: Vec<(String, f64)> = raw
            .iter()
            .map(|(id, v)| (id.clone(), unit(v).iter().zip(&qn).map(|(a, b)| a * b).sum::<f64>()))
            .collect();
        scan.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let want: Vec<String> = scan.into_iter().take(k).map(|(id, _)| id).collect();
        if got != want {
            return Err(format!("instance {instance} (dim {dim}, n {n}, k {k}) differs from the exhaustive scan"));
        }
    }
    let took = start.elapsed();
    if took > Duration::from_secs(10) {
        return Err(format!("took {took:?}, limit 10s"));
    }
    Ok(format!("100 instances identical in {took:.2?}"))
}

fn normalization() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut index = VectorIndex::<f32>::new(32, "norm");
    let mut worst_norm: f64 = 0.0;
    let mut worst_cos: f64 = 0.0;
    for i in 0..1000 {
        let raw: Vec<f32> = random_vec(&mut rng, 32).into_iter().map(|x| (x * 1000.0) as f32).collect();
        index.insert(format!("v{i}"), EmbeddingVector::raw(raw.clone())).unwrap();
        let a = normalize(&raw).unwrap();
        worst_cos = worst_cos.max((cosine(&a, &a).unwrap() - 1.0).abs());
        let wide = normalize(&random_vec(&mut rng, 32)).unwrap();
        worst_cos = worst_cos.max((cosine(&wide, &wide).unwrap() - 1.0).abs());
    }
    for (_, v) in index.iter() {
        worst_norm = worst_norm.max((v.norm() - 1.0).abs());
    }
    if worst_norm > 1e-6 {
        return Err(format!("stored norm off by {worst_norm:e}"));
    }
    if worst_cos > 1e-9 {
        return Err(format!("cosine(a, a) off by {worst_cos:e}"));
    }
    Ok(format!("max |norm-1| = {worst_norm:.1e}, max |cos(a,a)-1| = {worst_cos:.1e}"))
}

fn marker_retrieval() -> Result<String, String> {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let markers = dir.path().join("markers");
    let markers = markers.to_str().unwrap();
    cli(&config, &["eval", "--generate-markers", markers, "--count", "10", "--seed", "42"]);
    cli(&config, &["ingest", "--source", &format!("{markers}/records"), "--collection", "markers"]);
    cli(&config, &["index", "build", "--collection", "markers", "--no-summaries"]);
    let start = Instant::now();
    let out = cli(&config, &["--json", "eval", "--suite", &format!("{markers}/suite.json"), "--collection", "markers", "--k", "1"]);
    let took = start.elapsed();
    let metrics: Value = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
    let (hit, mrr) = (metrics["hit_at_k"].as_f64().unwrap(), metrics["mrr"].as_f64().unwrap());
    if metrics["per_case"].as_array().map(Vec::len) != Some(10) {
        return Err("expected 10 cases".into());
    }
    if hit != 1.0 || mrr != 1.0 {
        return Err(format!("hit@1 {hit}, MRR {mrr}"));
    }
    if took > Duration::from_secs(5) {
        return Err(format!("eval took {took:?}, limit 5s"));
    }
    Ok(format!("hit@1 = 1.0, MRR = 1.0 in {took:.2?}"))
}

fn citation_soundness() -> Result<String, String> {
    let dir = tempfile::tempdir().unwrap();
    let collection = marker_collection(dir.path(), 10);
    let embedder = HashEmbedder::new(DIM);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut phantoms = 0;
    for run in 0..200 {
        let k = rng.random_range(0..=5);
        let sentences = rng.random_range(0..6);
        let tags: Vec<usize> = (0..sentences).map(|_| rng.random_range(0..=7)).collect();
        let text: String = tags.iter().map(|n| format!("Claim about records [S{n}]. ")).collect();
        let gw = scripted(&[text]);
        let cfg = StrategyConfig { k, ..Default::default() };
        let question = format!("archive record {}", rng.random_range(0..10));
        let answer = run_strategy(&question, &[], &cfg, &ctx(&collection, &embedder, &gw)).map_err(|e| e.to_string())?;
        let context: Vec<&str> = answer.context.iter().map(|c| c.source_id.as_str()).collect();
        if let Some(bad) = answer.citations.iter().find(|c| !context.contains(&c.as_str())) {
            return Err(format!("run {run}: citation {bad} is not in the prompt context"));
        }
        let valid: BTreeSet<&str> =
            tags.iter().filter(|n| (1..=context.len()).contains(n)).map(|n| context[n - 1]).collect();
        let cited: BTreeSet<&str> = answer.citations.iter().map(String::as_str).collect();
        if cited != valid {
            return Err(format!("run {run}: cited {cited:?}, valid tags name {valid:?}"));
        }
        let phantom = tags.iter().any(|n| !(1..=context.len()).contains(n));
        if answer.has_flag("phantom_citation") != phantom {
            return Err(format!("run {run}: phantom flag {} for tags {tags:?}", !phantom));
        }
        phantoms += phantom as usize;
    }
    Ok(format!("200 runs sound, {phantoms} with phantom tags flagged"))
}

fn corrective_filter() -> Result<String, String> {
    const SCORES: [&str; 5] = ["0", "0.2", "0.5", "0.8", "1.0"];
    let dir = tempfile::tempdir().unwrap();
    let collection = marker_collection(dir.path(), 8);
    let embedder = HashEmbedder::new(DIM);
    let question = "recordings filed under a code";
    let mut cases = 0;
    let mut retries = 0;
    for len in 0..=6usize {
        let probe = scripted(&["unused".to_string()]);
        let order = retrieve_vanilla(question, len, "initial", &ctx(&collection, &embedder, &probe), &mut Trace::new())
            .unwrap()
            .items
            .into_iter()
            .map(|i| i.chunk_id)
            .collect::<Vec<_>>();
        for combo in 0..SCORES.len().pow(len as u32) {
            let picks: Vec<usize> = (0..len).map(|i| combo / SCORES.len().pow(i as u32) % SCORES.len()).collect();
            for tau in [0.0, 0.5, 1.0] {
                let mut script: Vec<String> = picks.iter().map(|p| SCORES[*p].to_string()).collect();
                script.push("recordings; archive notes".into());
                script.extend(std::iter::repeat_n("0".to_string(), 6));
                let gw = scripted(&script);
                let cfg = StrategyConfig { strategy: StrategyKind::Corrective, k: len, tau, ..Default::default() };
                let mut trace = Trace::new();
                let kept = retrieve_corrective(question, &cfg, &ctx(&collection, &embedder, &gw), &mut trace)
                    .map_err(|e| e.to_string())?;
                let expected: Vec<&str> = order
                    .iter()
                    .zip(&picks)
                    .filter(|(_, p)| SCORES[**p].parse::<f64>().unwrap() >= tau)
                    .map(|(id, _)| id.as_str())
                    .collect();
                let retry_steps = trace.steps().iter().filter(|s| s.detail["purpose"] == "retry").count();
                let expansions = trace
                    .steps()
                    .iter()
                    .filter(|s| s.kind == StepKind::Expand && s.detail["purpose"] == "expand_query")
                    .count();
                if expected.is_empty() {
                    if retry_steps != 1 || expansions != 1 {
                        return Err(format!("{picks:?} tau {tau}: {retry_steps} retries, {expansions} expansions"));
                    }
                    retries += 1;
                } else {
                    if kept.chunk_ids() != expected {
                        return Err(format!("{picks:?} tau {tau}: kept {:?}, want {expected:?}", kept.chunk_ids()));
                    }
                    if retry_steps != 0 {
                        return Err(format!("{picks:?} tau {tau}: retried although items passed"));
                    }
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} judgment vectors, {retries} all-filtered cases retried exactly once"))
}

fn partition_of(assignment: &ghostwriter_core::kgraph::CommunityAssignment) -> BTreeSet<BTreeSet<String>> {
    assignment.communities.values().map(|c| c.members.iter().cloned().collect()).collect()
}

fn find(parent: &mut [usize], x: usize) -> usize {
    if parent[x] != x {
        let root = find(parent, parent[x]);
        parent[x] = root;
    }
    parent[x]
}

fn community_partition() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let node = |i: usize| format!("n{i:02}");
    for g in 0..50 {
        let n = rng.random_range(1..=30);
        let mut graph = KnowledgeGraph::new();
        for i in 0..n {
            graph.add_node(node(i), NodeKind::Concept, node(i)).unwrap();
        }
        let p: f64 = rng.random_range(0.0..0.3);
        for a in 0..n {
            for b in a + 1..n {
                if rng.random_bool(p) {
                    graph.add_edge(&node(a), &node(b), EdgeKind::HasConcept, 1.0).unwrap();
                }
            }
        }
        if !detect_communities(&graph).is_partition_of(&graph) {
            return Err(format!("random graph {g} is not partitioned"));
        }
    }
    for g in 0..50 {
        let n = rng.random_range(1..=30);
        let group: Vec<usize> = (0..n).map(|_| rng.random_range(0..5)).collect();
        let mut graph = KnowledgeGraph::new();
        for i in 0..n {
            graph.add_node(node(i), NodeKind::Dataset, node(i)).unwrap();
        }
        let mut parent: Vec<usize> = (0..n).collect();
        for a in 0..n {
            for b in a + 1..n {
                if group[a] == group[b] {
                    graph.add_edge(&node(a), &node(b), EdgeKind::HasTopic, 1.0).unwrap();
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra] = rb;
                }
            }
        }
        let mut components: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
        for i in 0..n {
            let root = find(&mut parent, i);
            components.entry(root).or_default().insert(node(i));
        }
        let oracle: BTreeSet<BTreeSet<String>> = components.into_values().collect();
        let assignment = detect_communities(&graph);
        if !assignment.is_partition_of(&graph) || partition_of(&assignment) != oracle {
            return Err(format!("clique graph {g}: communities differ from connected components"));
        }
    }
    Ok("50 random graphs partitioned, 50 clique graphs match union-find".into())
}

/// A model that never considers anything sufficient.
struct Never;

impl Generator for Never {
    fn endpoint_tag(&self) -> String {
        "never".into()
    }
    fn generate(&self, _: &GenerationRequest) -> Result<String, ModelError> {
        Ok("no [S1]".into())
    }
}

fn iteration_caps() -> Result<String, String> {
    let dir = tempfile::tempdir().unwrap();
    let collection = marker_collection(dir.path(), 6);
    let embedder = HashEmbedder::new(DIM);
    let mut runs = 0;
    for max_iterations in 1..=4 {
        for strategy in [StrategyKind::SelfReflective, StrategyKind::Notebook] {
            for k in [1, 3] {
                let gw = gateway(Arc::new(Never));
                let cfg = StrategyConfig { strategy, k, max_iterations, ..Default::default() };
                let answer = run_strategy("what is the code?", &[], &cfg, &ctx(&collection, &embedder, &gw))
                    .map_err(|e| e.to_string())?;
                let rounds = retrieval_rounds(&answer.trace);
                if rounds != max_iterations {
                    return Err(format!("{strategy} cap {max_iterations}: {rounds} retrieval rounds"));
                }
                if answer.text.is_empty() {
                    return Err(format!("{strategy} cap {max_iterations}: empty answer"));
                }
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} adversarial runs stopped after exactly max_iterations rounds"))
}

fn determinism() -> Result<String, String> {
    let script = fixtures().join("mock-script.json");
    let script = script.to_str().unwrap();
    let demo = fixtures().join("demo");
    let mut outputs = vec![];
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(dir.path());
        cli(&config, &["ingest", "--source", demo.to_str().unwrap(), "--collection", "demo"]);
        cli(&config, &["index", "build", "--collection", "demo", "--no-summaries"]);
        let answer = cli(
            &config,
            &["--json", "ask", "Which concerts can be felt?", "--collection", "demo", "--strategy", "vanilla", "--mock-script", script],
        );
        let index = std::fs::read(dir.path().join("store/index/demo.vec")).map_err(|e| e.to_string())?;
        outputs.push((answer, index));
    }
    if outputs[0].0 != outputs[1].0 {
        return Err("answer JSON differs between runs".into());
    }
    if outputs[0].1 != outputs[1].1 {
        return Err("index files differ between runs".into());
    }
    let answer: Value = serde_json::from_slice(&outputs[0].0).map_err(|e| e.to_string())?;
    if answer["trace"].as_array().is_none_or(Vec::is_empty) {
        return Err("answer carries no trace".into());
    }
    Ok(format!("answer JSON ({} bytes) and index byte-identical", outputs[0].0.len()))
}

fn parser_roundtrip() -> Result<String, String> {
    let registry = SchemaRegistry::default();
    let parse = |rel: &str| parse_document_bytes(&std::fs::read(fixtures().join(rel)).unwrap(), &registry);
    for name in ["haptic-concerts", "dance-recital", "sound-workshop"] {
        let record = parse(&format!("demo/{name}.json")).map_err(|e| format!("{name}: {e}"))?;
        let reparsed = SourceRecord::from_canonical_json(&record.to_canonical_json()).map_err(|e| e.to_string())?;
        if reparsed != record {
            return Err(format!("{name}: canonical round-trip differs"));
        }
        if parse_document(&to_croissant(&record), &registry).map_err(|e| e.to_string())? != record {
            return Err(format!("{name}: Croissant round-trip differs"));
        }
    }
    let checks: [(&str, ErrorCheck); 4] = [
        ("missing-name", |e| matches!(e, IngestError::MissingField(f) if f == "name")),
        ("not-croissant", |e| matches!(e, IngestError::NotCroissant(_))),
        ("unknown-schema", |e| matches!(e, IngestError::UnknownSchemaVersion(_))),
        ("truncated", |e| matches!(e, IngestError::MalformedPage(_))),
    ];
    for (name, expected) in checks {
        match parse(&format!("malformed/{name}.json")) {
            Err(e) if expected(&e) => {}
            other => return Err(format!("{name}: got {other:?}")),
        }
    }
    Ok("3 fixtures round-trip, 4 malformed fixtures raise their named errors".into())
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: Value) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = axum::body::to_bytes(res.into_body(), usize::MAX).await.unwrap();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn service_e2e() -> Result<String, String> {
    const TAGGED: &str = "A haptic concert series lets audiences feel music [S1]. A dance recital is also filed [S2].";
    let dir = tempfile::tempdir().unwrap();
    let gw = scripted(&[TAGGED.to_string(), "It used vibrating floors [S1].".to_string()]);
    let state = AppState::new(ServiceOptions {
        store: Store::open(dir.path()).unwrap(),
        judge: gw.clone(),
        generator: gw,
        embedder: Arc::new(HashEmbedder::new(DIM)),
        registry: SchemaRegistry::default(),
        vocabulary: None,
        chunking: ChunkConfig::default(),
        defaults: StrategyConfig::default(),
        page_size: 20,
        session_ttl: Duration::from_secs(3600),
        summarize: false,
    })
    .map_err(|e| e.to_string())?;
    let app = router(Arc::new(state));
    let rt = tokio::runtime::Runtime::new().unwrap();
    rt.block_on(async {
        let demo = fixtures().join("demo");
        let (status, body) =
            call(&app, "POST", "/api/admin/ingest", json!({"endpoint": demo, "collection_id": "demo"})).await;
        if status != StatusCode::OK {
            return Err(format!("ingest returned {status}: {body}"));
        }
        let (status, first) = call(&app, "POST", "/api/ask", json!({"question": "Which concerts can be felt?"})).await;
        if status != StatusCode::OK {
            return Err(format!("ask returned {status}: {first}"));
        }
        if first["sources"].as_array().is_none_or(Vec::is_empty) {
            return Err("no sources".into());
        }
        let trace = first["trace"].as_array().unwrap();
        let generate = trace.iter().rev().find(|s| s["kind"] == "generate").unwrap();
        let tags: Vec<&str> =
            generate["detail"]["context_tags"].as_array().unwrap().iter().filter_map(Value::as_str).collect();
        let grounded = groundedness_of(first["answer"].as_str().unwrap(), &tags);
        if grounded != 1.0 {
            return Err(format!("groundedness {grounded}"));
        }
        let session = first["session_id"].clone();
        let (status, second) =
            call(&app, "POST", "/api/ask", json!({"session_id": session, "question": "How was it felt?"})).await;
        if status != StatusCode::OK || second["session_id"] != session {
            return Err(format!("follow-up returned {status}: {second}"));
        }
        let generate = second["trace"].as_array().unwrap().iter().rev().find(|s| s["kind"] == "generate").unwrap();
        if generate["detail"]["history"] != json!(["Which concerts can be felt?"]) {
            return Err(format!("follow-up history {}", generate["detail"]["history"]));
        }
        Ok(format!("200 with {} sources, groundedness 1.0, turn 1 in follow-up history", first["sources"].as_array().unwrap().len()))
    })
}

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("knn-oracle-equivalence", knn_oracle),
        ("normalization", normalization),
        ("marker-corpus-retrieval", marker_retrieval),
        ("citation-soundness", citation_soundness),
        ("corrective-filter", corrective_filter),
        ("community-partition", community_partition),
        ("iteration-caps", iteration_caps),
        ("determinism", determinism),
        ("parser-round-trip", parser_roundtrip),
        ("service-end-to-end", service_e2e),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL {name}: {reason}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
