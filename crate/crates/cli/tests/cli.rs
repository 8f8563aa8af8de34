use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn config(dir: &Path) -> PathBuf {
    let path = dir.join("config.json");
    let cfg = serde_json::json!({
        "model_endpoint": "http://127.0.0.1:9/v1",
        "embed_endpoint": "hash://64",
        "store_path": "store",
        "vocabulary_path": fixtures().join("vocabulary.json"),
    });
    std::fs::write(&path, cfg.to_string()).unwrap();
    path
}

fn run(config: Option<&Path>, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ghostwriter"));
    cmd.env_remove("GHOSTWRITER_CONFIG");
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.args(args).output().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn ingest_index_ask_flow() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    let demo = fixtures().join("demo");

    let out = run(Some(&cfg), &["ingest", "--source", demo.to_str().unwrap(), "--collection", "demo"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).starts_with("3 records"));

    let out = run(Some(&cfg), &["ask", "What is felt?", "--collection", "demo"]);
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    assert!(err.contains("index") && err.contains("demo.vec"), "{err}");

    let out = run(Some(&cfg), &["index", "build", "--collection", "demo", "--no-summaries"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));

    let script = fixtures().join("mock-script.json");
    let out = run(
        Some(&cfg),
        &["ask", "Which concerts can be felt?", "--collection", "demo", "--mock-script", script.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    let answer_at = stdout.find("Answer").unwrap();
    let sources_at = stdout.find("Sources").unwrap();
    assert!(answer_at < sources_at);
    assert_eq!(stdout.matches("<doi:10.5072/FK2/").count(), 2, "{stdout}");
}

#[test]
fn summaries_use_the_mock_script() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    let demo = fixtures().join("demo");
    run(Some(&cfg), &["ingest", "--source", demo.to_str().unwrap(), "--collection", "demo"]);
    let script = dir.path().join("script.json");
    std::fs::write(&script, serde_json::json!(vec!["A community of related records."; 20]).to_string()).unwrap();
    let out = run(
        Some(&cfg),
        &["--json", "index", "build", "--collection", "demo", "--mock-script", script.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["summaries"].as_u64().unwrap() > 0);
    assert_eq!(report["summaries"], report["communities"]);
}

#[test]
fn usage_errors_exit_one() {
    let out = run(None, &["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("Usage"));

    let out = run(None, &["ask", "q", "--collection", "c", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(None, &["eval"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn runtime_errors_exit_two() {
    let out = run(None, &["ingest", "--source", "x", "--collection", "c"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("--config"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    let out = run(Some(&cfg), &["ingest", "--source", dir.path().join("nope").to_str().unwrap(), "--collection", "c"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("collection not found"));

    let out = run(Some(&cfg), &["ask", "q", "--collection", "c", "--strategy", "telepathic"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("telepathic"));
}

#[test]
fn marker_generation_writes_records_and_suite() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("m");
    let out = run(None, &["eval", "--generate-markers", target.to_str().unwrap(), "--count", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert_eq!(std::fs::read_dir(target.join("records")).unwrap().count(), 4);
    let suite: serde_json::Value = serde_json::from_slice(&std::fs::read(target.join("suite.json")).unwrap()).unwrap();
    assert_eq!(suite.as_array().unwrap().len(), 4);
}
