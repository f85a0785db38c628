//! End-to-end checks of the `mot` binary: ingest, query, benchmarks, judge,
//! and inspect, all against the scripted mock so no network is touched.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn mot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mot"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(output: &Output) -> String {
    assert!(
        output.status.success(),
        "command failed with {:?}\nstderr: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).expect("utf8 stdout")
}

fn ingest_fixture_graph(graph_dir: &Path) {
    let output = mot(&[
        "ingest",
        "--docs",
        fixture("corpus").to_str().unwrap(),
        "--out",
        graph_dir.to_str().unwrap(),
        "--mock",
        fixture("mock.json").to_str().unwrap(),
    ]);
    let text = stdout_of(&output);
    assert!(text.contains("3 entities"), "unexpected ingest summary: {text}");
}

#[test]
fn ingest_then_query_produces_a_byte_stable_answer_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let graph_dir = dir.path().join("graph");
    ingest_fixture_graph(&graph_dir);

    let trace_a = dir.path().join("trace-a.json");
    let trace_b = dir.path().join("trace-b.json");
    let mut answers = Vec::new();
    for trace in [&trace_a, &trace_b] {
        let output = mot(&[
            "query",
            "--graph",
            graph_dir.to_str().unwrap(),
            "--question",
            "Where does Alice work?",
            "--trace",
            trace.to_str().unwrap(),
            "--mock",
            fixture("mock.json").to_str().unwrap(),
        ]);
        answers.push(stdout_of(&output));
    }
    assert_eq!(answers[0], answers[1], "query output must be byte-stable");
    assert!(answers[0].contains("Alice works at Acme, which is located in Paris."));

    let bytes_a = std::fs::read(&trace_a).unwrap();
    let bytes_b = std::fs::read(&trace_b).unwrap();
    assert_eq!(bytes_a, bytes_b, "trace must be byte-stable");

    // The trace deserializes back into a full result.
    let result: mot_core::thought_matrix::MotResult =
        serde_json::from_slice(&bytes_a).expect("trace matches the result schema");
    assert_eq!(result.answer, result.summaries.last().unwrap().text);
    assert_eq!(result.nodes.len(), 12);
    assert_eq!(result.ledger.reasoning_llm_calls, 16);
    assert_eq!(result.ledger.retrieval_calls, 8);
}

#[test]
fn ingest_twice_merges_instead_of_duplicating() {
    let dir = tempfile::tempdir().unwrap();
    let graph_dir = dir.path().join("graph");
    ingest_fixture_graph(&graph_dir);
    ingest_fixture_graph(&graph_dir);

    let output = mot(&["inspect", "--graph", graph_dir.to_str().unwrap()]);
    let stats: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(stats["entities"], 3);
    assert_eq!(stats["relations"], 2);
    assert_eq!(stats["chunks"], 2);
    assert_eq!(stats["embed_dim"], 64);
}

#[test]
fn bench24_reports_the_scripted_success_rate() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let output = mot(&[
        "bench24",
        "--problems",
        fixture("problems.jsonl").to_str().unwrap(),
        "--mock",
        fixture("bench24_mock.json").to_str().unwrap(),
        "--report",
        report_path.to_str().unwrap(),
    ]);
    stdout_of(&output);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    // {1,2,3,4} solves via the scripted equation; {1,1,1,1} cannot.
    assert_eq!(report["report"]["total"], 2);
    assert_eq!(report["report"]["successes"], 1);
    assert_eq!(report["report"]["success_rate"], 0.5);
    // Two 3x4 runs: predicted 16 reasoning calls each, 32 total actual.
    assert_eq!(report["predicted_per_run"][0], 16);
    assert_eq!(report["actual_total"][0], 32);
    assert_eq!(report["actual_total"][1], 16);
}

#[test]
fn bench24_oracle_engine_scores_the_solvable_fraction() {
    let output = mot(&[
        "bench24",
        "--problems",
        fixture("problems.jsonl").to_str().unwrap(),
        "--oracle",
    ]);
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(report["report"]["successes"], 1);
    assert_eq!(report["engine"], "solver-oracle");
}

#[test]
fn benchqa_scores_the_mocked_answer() {
    let dir = tempfile::tempdir().unwrap();
    let graph_dir = dir.path().join("graph");
    ingest_fixture_graph(&graph_dir);

    let output = mot(&[
        "benchqa",
        "--items",
        fixture("qa.jsonl").to_str().unwrap(),
        "--graph",
        graph_dir.to_str().unwrap(),
        "--mock",
        fixture("mock.json").to_str().unwrap(),
    ]);
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(report["report"]["total"], 1);
    // Prediction "Alice works at Acme, which is located in Paris." vs gold
    // "Acme": overlap 1 of 9 prediction tokens -> F1 = 2*(1/9)/(1/9 + 1) = 0.2.
    let f1 = report["report"]["mean_f1"].as_f64().unwrap();
    assert!((f1 - 0.2).abs() < 1e-9, "got {f1}");
}

#[test]
fn judge_resolves_a_consistent_winner() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    std::fs::write(&a, "Alice works at Acme in Paris.").unwrap();
    std::fs::write(&b, "No idea.").unwrap();
    let output = mot(&[
        "judge",
        "--question",
        "Where does Alice work?",
        "--answer-a",
        a.to_str().unwrap(),
        "--answer-b",
        b.to_str().unwrap(),
        "--mock",
        fixture("judge_mock.json").to_str().unwrap(),
    ]);
    let record: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(record["overall"], "AnswerA");
    assert_eq!(record["accuracy"], "AnswerA");
}

#[test]
fn unknown_subcommand_exits_with_usage_code_2() {
    let output = mot(&["frobnicate"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn missing_config_file_fails_with_a_diagnostic() {
    let output = mot(&[
        "--config",
        "/nonexistent/config.toml",
        "inspect",
        "--graph",
        "/tmp/nowhere",
    ]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("not found"), "stderr: {stderr}");
}

#[test]
fn bad_config_value_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[matrix]\nrows = 0\n").unwrap();
    let output = mot(&[
        "--config",
        cfg.to_str().unwrap(),
        "inspect",
        "--graph",
        "/tmp/nowhere",
    ]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("matrix.rows"), "stderr: {stderr}");
}

#[test]
fn query_without_mock_or_endpoint_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let graph_dir = dir.path().join("graph");
    ingest_fixture_graph(&graph_dir);
    let output = mot(&[
        "query",
        "--graph",
        graph_dir.to_str().unwrap(),
        "--question",
        "q?",
    ]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("--mock"), "stderr: {stderr}");
}

#[test]
fn graph_dir_falls_back_to_the_config_paths_section() {
    let dir = tempfile::tempdir().unwrap();
    let graph_dir = dir.path().join("graph");
    ingest_fixture_graph(&graph_dir);
    let cfg = dir.path().join("mot.toml");
    std::fs::write(
        &cfg,
        format!("[paths]\ngraph_dir = {:?}\n", graph_dir.to_str().unwrap()),
    )
    .unwrap();
    let output = mot(&["--config", cfg.to_str().unwrap(), "inspect"]);
    let stats: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(stats["entities"], 3);
}

#[test]
fn unwritable_report_path_fails_with_io_error() {
    let output = mot(&[
        "bench24",
        "--problems",
        fixture("problems.jsonl").to_str().unwrap(),
        "--oracle",
        "--report",
        "/nonexistent-dir/report.json",
    ]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn text_report_shows_scheme_shape_and_call_parity() {
    let dir = tempfile::tempdir().unwrap();
    let graph_dir = dir.path().join("graph");
    ingest_fixture_graph(&graph_dir);
    let output = mot(&[
        "query",
        "--graph",
        graph_dir.to_str().unwrap(),
        "--question",
        "Where does Alice work?",
        "--mock",
        fixture("mock.json").to_str().unwrap(),
        "--format",
        "text",
    ]);
    let text = stdout_of(&output);
    assert!(text.contains("matrix: 3x4 scheme=vert_hor"), "got: {text}");
    assert!(text.contains("calls predicted (reasoning llm, retrieval): (16, 8)"));
    assert!(text.contains("calls actual    (reasoning llm, retrieval): (16, 8)"));
}
