//! `ghostwriter` operator command line.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ghostwriter_core::config::Config;
use ghostwriter_core::evalkit::{generate_marker_corpus, run_retrieval_suite, EvalSuite, VectorSystem};
use ghostwriter_core::ingest::{ingest_collection, load_vocabulary, Endpoint, SchemaRegistry, Vocabulary};
use ghostwriter_core::modelgw::{Gateway, LatencyClock, ScriptedMock};
use ghostwriter_core::pipeline::{build_collection, load_collection};
use ghostwriter_core::store::Store;
use ghostwriter_core::strategies::{run_strategy, RagContext, StrategyConfig, StrategyKind};
use ghostwriter_core::trace::Trace;
use ghostwriter_service::handlers::resolve_sources;
use ghostwriter_service::{AppState, ServiceOptions};
use serde_json::json;

#[derive(Debug, Parser)]
#[command(name = "ghostwriter", version, about = "Ingest, index and question archived dataset collections")]
struct Cli {
    /// Config file (JSON).
    #[arg(long, global = true, env = "GHOSTWRITER_CONFIG")]
    config: Option<PathBuf>,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fetch a collection from a repository URL or a directory of exports.
    Ingest {
        #[arg(long)]
        source: String,
        #[arg(long)]
        collection: String,
    },
    /// Index operations.
    Index {
        #[command(subcommand)]
        command: IndexCommand,
    },
    /// Answer one question against an indexed collection.
    Ask(AskArgs),
    /// Retrieval metrics over a question suite.
    Eval(EvalArgs),
    /// Run the HTTP API.
    Serve {
        #[arg(long)]
        port: Option<u16>,
    },
}

#[derive(Debug, Subcommand)]
enum IndexCommand {
    /// Embed chunks, build the graph and its communities, summarize them.
    Build {
        #[arg(long)]
        collection: String,
        /// Scripted model replies (JSON array) used for summaries.
        #[arg(long)]
        mock_script: Option<PathBuf>,
        /// Skip community summaries.
        #[arg(long)]
        no_summaries: bool,
    },
}

#[derive(Debug, Args)]
struct AskArgs {
    question: String,
    #[arg(long)]
    collection: String,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    rerank: bool,
    /// Scripted model replies (JSON array) instead of the model endpoint.
    #[arg(long)]
    mock_script: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Suite file: a JSON array of {question, relevant}.
    #[arg(long, required_unless_present = "generate_markers", requires = "collection")]
    suite: Option<PathBuf>,
    #[arg(long)]
    collection: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    /// Write a marker corpus and its suite into this directory instead.
    #[arg(long, conflicts_with = "suite")]
    generate_markers: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    let path = path.context("no config file; pass --config <file>")?;
    Ok(Config::load(path)?)
}

fn vocabulary(cfg: &Config) -> Result<Option<Vocabulary>> {
    cfg.vocabulary_path.as_deref().map(load_vocabulary).transpose().map_err(Into::into)
}

fn mock_gateway(path: &Path, cfg: &Config) -> Result<Gateway> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let script: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{} is not JSON", path.display()))?;
    let mock = ScriptedMock::from_json(&script)?;
    Ok(Gateway::new(Arc::new(mock)).with_budget(cfg.context_budget_chars).with_clock(LatencyClock::Frozen))
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn ingest(cfg: &Config, source: &str, collection: &str, as_json: bool) -> Result<()> {
    let store = Store::open(&cfg.store_path)?;
    let summary =
        ingest_collection(&store, &Endpoint::parse(source), collection, &SchemaRegistry::default(), cfg.chunking())?;
    for field in &summary.unknown_fields {
        eprintln!("note: unknown field {field}");
    }
    if as_json {
        return print_json(&summary);
    }
    println!(
        "{} records ({} inserted, {} updated, {} chunks) into {}",
        summary.records, summary.inserted, summary.updated, summary.chunks, summary.collection_id
    );
    Ok(())
}

fn index_build(cfg: &Config, collection: &str, mock: Option<&Path>, no_summaries: bool, as_json: bool) -> Result<()> {
    let store = Store::open(&cfg.store_path)?;
    let summarizer = match (mock, no_summaries) {
        (_, true) => None,
        (Some(path), false) => Some(mock_gateway(path, cfg)?),
        (None, false) => Some(cfg.generator()),
    };
    let embedder = cfg.embedder();
    let mut trace = Trace::new();
    let report = build_collection(
        &store,
        collection,
        embedder.as_ref(),
        vocabulary(cfg)?.as_ref(),
        &SchemaRegistry::default(),
        summarizer.as_ref(),
        &mut trace,
    )?;
    if as_json {
        return print_json(&report);
    }
    println!(
        "indexed {}: {} records, {} chunks, {} nodes, {} edges, {} communities, {} summaries ({}, dim {})",
        report.collection_id,
        report.records,
        report.chunks,
        report.nodes,
        report.edges,
        report.communities,
        report.summaries,
        report.model_tag,
        report.dim
    );
    Ok(())
}

fn ask(cfg: &Config, args: &AskArgs, as_json: bool) -> Result<()> {
    let defaults = cfg.strategy_defaults();
    let strategy = match &args.strategy {
        Some(s) => s.parse::<StrategyKind>()?,
        None => defaults.strategy,
    };
    let strategy_cfg = StrategyConfig {
        strategy,
        k: args.k.unwrap_or(defaults.k),
        tau: args.tau.unwrap_or(defaults.tau),
        max_iterations: args.max_iterations.unwrap_or(defaults.max_iterations),
        rerank: args.rerank,
    };
    strategy_cfg.validate()?;
    let store = Store::open(&cfg.store_path)?;
    let collection = load_collection::<f32>(&store, &args.collection)?;
    let (generator, judge) = match &args.mock_script {
        Some(path) => {
            let gw = mock_gateway(path, cfg)?;
            (gw.clone(), gw)
        }
        None => (cfg.generator(), cfg.judge()),
    };
    let embedder = cfg.embedder();
    let ctx = RagContext {
        corpus: &collection.corpus,
        index: &collection.index,
        embedder: embedder.as_ref(),
        generator: &generator,
        judge: &judge,
        graph: collection.graph.as_ref(),
        thresholds: Default::default(),
    };
    let mut answer = run_strategy(&args.question, &[], &strategy_cfg, &ctx)?;
    let sources = resolve_sources(&collection, &mut answer, strategy_cfg.k);
    if as_json {
        return print_json(&json!({
            "collection_id": collection.collection_id,
            "strategy": strategy_cfg.strategy,
            "answer": answer.text,
            "uncited": answer.uncited,
            "citations": answer.citations,
            "sources": sources,
            "flags": answer.flags,
            "trace": answer.trace,
        }));
    }
    println!("Answer\n{}\n", answer.text);
    println!("Sources");
    let retrieved = answer.has_flag("sources_from_retrieval");
    for s in &sources {
        let note = if retrieved { " (retrieved)" } else { "" };
        println!("- {} <{}>{note}", s.title, s.id);
    }
    if sources.is_empty() {
        println!("(none)");
    }
    Ok(())
}

fn eval(cfg_path: Option<&Path>, args: &EvalArgs, as_json: bool) -> Result<()> {
    if let Some(dir) = &args.generate_markers {
        let suite = generate_marker_corpus(dir, args.count, args.seed)?;
        if as_json {
            return print_json(&suite);
        }
        println!(
            "wrote {} records to {} and the suite to {}",
            suite.cases.len(),
            dir.join("records").display(),
            dir.join("suite.json").display()
        );
        return Ok(());
    }
    let cfg = load_config(cfg_path)?;
    let (Some(suite_path), Some(collection_id)) = (&args.suite, &args.collection) else {
        bail!("eval needs --suite and --collection");
    };
    let suite = EvalSuite::load(suite_path)?;
    let store = Store::open(&cfg.store_path)?;
    let collection = load_collection::<f32>(&store, collection_id)?;
    let embedder = cfg.embedder();
    let system = VectorSystem { corpus: &collection.corpus, index: &collection.index, embedder: embedder.as_ref() };
    let metrics = run_retrieval_suite(&suite, &system, args.k.unwrap_or(cfg.defaults.k))?;
    if as_json {
        return print_json(&metrics);
    }
    print_json(&json!({"k": metrics.k, "hit_at_k": metrics.hit_at_k, "mrr": metrics.mrr, "cases": metrics.per_case.len()}))
}

fn serve(cfg: &Config, port: Option<u16>) -> Result<()> {
    // Blocking HTTP clients must be built and dropped outside the runtime.
    let state = Arc::new(AppState::new(ServiceOptions {
        store: Store::open(&cfg.store_path)?,
        generator: cfg.generator(),
        judge: cfg.judge(),
        embedder: Arc::from(cfg.embedder()),
        registry: SchemaRegistry::default(),
        vocabulary: vocabulary(cfg)?,
        chunking: cfg.chunking(),
        defaults: cfg.strategy_defaults(),
        page_size: cfg.page_size,
        session_ttl: Duration::from_secs(cfg.session_ttl_secs),
        summarize: true,
    })?);
    let loaded = state.loaded_ids();
    if loaded.is_empty() {
        eprintln!("warning: no indexed collection in {}", cfg.store_path.display());
    }
    let addr = SocketAddr::from(([127, 0, 0, 1], port.unwrap_or(cfg.port)));
    let runtime = tokio::runtime::Runtime::new()?;
    let served = state.clone();
    let result = runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("serving {} on http://{}", loaded.join(", "), listener.local_addr()?);
        axum::serve(listener, ghostwriter_service::router(served))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    });
    drop(runtime);
    drop(state);
    Ok(result?)
}

fn run(cli: Cli) -> Result<()> {
    let cfg_path = cli.config.as_deref();
    match &cli.command {
        Command::Ingest { source, collection } => ingest(&load_config(cfg_path)?, source, collection, cli.json),
        Command::Index { command: IndexCommand::Build { collection, mock_script, no_summaries } } => {
            index_build(&load_config(cfg_path)?, collection, mock_script.as_deref(), *no_summaries, cli.json)
        }
        Command::Ask(args) => ask(&load_config(cfg_path)?, args, cli.json),
        Command::Eval(args) => eval(cfg_path, args, cli.json),
        Command::Serve { port } => serve(&load_config(cfg_path)?, *port),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
