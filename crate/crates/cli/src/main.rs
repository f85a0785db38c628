//! `mot`: operate the matrix-of-thought system end to end. Ingest corpora
//! into a knowledge graph, answer questions, run benchmarks, judge answer
//! pairs, and inspect persisted graphs. Every subcommand accepts `--mock`
//! with a script file, which makes the whole system runnable offline.

mod config;
mod report;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use config::Config;
use mot_core::corpus_graph::{self, chunk_document, Chunk, KnowledgeGraph};
use mot_core::eval_bench::{
    load_game24_problems, load_qa_instances, pairwise_judge, run_game24_benchmark,
    run_qa_benchmark, solve_24, Game24Problem,
};
use mot_core::llm_gateway::{CallLedger, HttpBackend, LlmBackend, MockBackend, MockScript};
use mot_core::thought_matrix::{predict_call_counts, run_matrix, CallStructure, MatrixConfig};
use report::{BenchDocument, ReportFormat};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "mot",
    version,
    about = "Matrix-of-thought reasoning over a corpus knowledge graph"
)]
struct Cli {
    /// TOML config file; built-in defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Chunk documents, extract entities and relations, and persist the
    /// knowledge graph (merging into an existing graph directory).
    Ingest {
        /// A document file or a directory of document files.
        #[arg(long)]
        docs: PathBuf,
        /// Graph output directory (falls back to paths.graph_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Scripted mock backend (JSON rule file) instead of the live API.
        #[arg(long)]
        mock: Option<PathBuf>,
    },
    /// Answer a question by running the thought matrix over a graph.
    Query {
        /// Graph directory (falls back to paths.graph_dir).
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        question: String,
        /// Write the full run trace (nodes, prompts, ledger) as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        mock: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
    },
    /// Run the 24-game benchmark from a JSONL problem file.
    Bench24 {
        #[arg(long)]
        problems: PathBuf,
        /// Graph directory to retrieve from (empty graph when omitted).
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        mock: Option<PathBuf>,
        /// Use the brute-force solver instead of the reasoning engine.
        #[arg(long)]
        oracle: bool,
        /// Report file (stdout when omitted).
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: ReportFormat,
    },
    /// Run the QA benchmark (F1 / exact match) from a JSONL file.
    Benchqa {
        #[arg(long)]
        items: PathBuf,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        mock: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: ReportFormat,
    },
    /// Judge two answer files pairwise on four dimensions.
    Judge {
        #[arg(long)]
        question: String,
        #[arg(long)]
        answer_a: PathBuf,
        #[arg(long)]
        answer_b: PathBuf,
        #[arg(long)]
        mock: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: ReportFormat,
    },
    /// Print statistics for a persisted graph.
    Inspect {
        /// Graph directory (falls back to paths.graph_dir).
        #[arg(long)]
        graph: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(path) => Ok(Config::parse(path)?),
        None => Ok(Config::default()),
    }
}

fn make_backend(config: &Config, mock: Option<&Path>) -> Result<Box<dyn LlmBackend>> {
    match mock {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading mock script {}", path.display()))?;
            let script = MockScript::from_json(&text)?;
            Ok(Box::new(MockBackend::new(script)?))
        }
        None => {
            if config.backend.endpoint.is_empty() {
                bail!("no live endpoint configured; set backend.endpoint or pass --mock <script.json>");
            }
            Ok(Box::new(HttpBackend::new(config.backend_descriptor())?))
        }
    }
}

fn load_graph_or_empty(path: Option<&Path>) -> Result<KnowledgeGraph> {
    match path {
        Some(path) => Ok(corpus_graph::persist::load(path)?),
        None => Ok(KnowledgeGraph::default()),
    }
}

fn resolve_graph_dir(flag: Option<PathBuf>, config: &Config) -> Result<PathBuf> {
    flag.or_else(|| config.paths.graph_dir.clone())
        .context("no graph directory; pass --graph/--out or set paths.graph_dir in the config")
}

/// A bench report lands in paths.report_dir when no explicit path is given.
fn resolve_report_path(
    flag: Option<PathBuf>,
    config: &Config,
    default_name: &str,
) -> Option<PathBuf> {
    flag.or_else(|| config.paths.report_dir.as_ref().map(|dir| dir.join(default_name)))
}

fn collect_documents(docs: &Path) -> Result<Vec<(String, String)>> {
    let mut documents = Vec::new();
    if docs.is_dir() {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(docs)?
            .filter_map(|entry| entry.ok())
            .map(|entry| entry.path())
            .filter(|path| path.is_file())
            .collect();
        paths.sort();
        for path in paths {
            let doc_id = path
                .file_stem()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_else(|| "doc".into());
            documents.push((doc_id, std::fs::read_to_string(&path)?));
        }
    } else {
        let doc_id = docs
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| "doc".into());
        documents.push((doc_id, std::fs::read_to_string(docs)?));
    }
    if documents.is_empty() {
        bail!("no documents found under {}", docs.display());
    }
    Ok(documents)
}

fn run(cli: Cli) -> Result<()> {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest { docs, out, mock } => {
            let out = resolve_graph_dir(out, &config)?;
            let backend = make_backend(&config, mock.as_deref())?;
            ingest(&config, &docs, &out, backend.as_ref())
        }
        Command::Query {
            graph,
            question,
            trace,
            mock,
            format,
        } => {
            let graph = resolve_graph_dir(graph, &config)?;
            let backend = make_backend(&config, mock.as_deref())?;
            query(&config, &graph, &question, trace.as_deref(), backend.as_ref(), format)
        }
        Command::Bench24 {
            problems,
            graph,
            mock,
            oracle,
            report,
            format,
        } => {
            let problems = load_game24_problems(&problems)?;
            let graph = load_graph_or_empty(graph.as_deref())?;
            let report = resolve_report_path(report, &config, "bench24.json");
            bench24(
                &config,
                &problems,
                &graph,
                mock.as_deref(),
                oracle,
                report.as_deref(),
                format,
            )
        }
        Command::Benchqa {
            items,
            graph,
            mock,
            report,
            format,
        } => {
            let items = load_qa_instances(&items)?;
            let graph = load_graph_or_empty(graph.as_deref())?;
            let report = resolve_report_path(report, &config, "benchqa.json");
            let backend = make_backend(&config, mock.as_deref())?;
            benchqa(&config, &items, &graph, backend.as_ref(), report.as_deref(), format)
        }
        Command::Judge {
            question,
            answer_a,
            answer_b,
            mock,
            report,
            format,
        } => {
            let report = resolve_report_path(report, &config, "judge.json");
            let backend = make_backend(&config, mock.as_deref())?;
            judge(&question, &answer_a, &answer_b, backend.as_ref(), report.as_deref(), format)
        }
        Command::Inspect { graph } => {
            let graph = resolve_graph_dir(graph, &config)?;
            inspect(&graph)
        }
    }
}

fn ingest(config: &Config, docs: &Path, out: &Path, backend: &dyn LlmBackend) -> Result<()> {
    let documents = collect_documents(docs)?;
    let ledger = CallLedger::new();
    let mut chunks: Vec<Chunk> = Vec::new();
    for (doc_id, text) in &documents {
        chunks.extend(chunk_document(doc_id, text, config.chunking.c_len));
    }
    let build = corpus_graph::build_graph(&chunks, backend, &ledger)?;
    let mut graph = build.graph;

    // Merge into an existing graph when the output directory already holds
    // one; otherwise this is a fresh ingest.
    if out.join("VERSION").exists() {
        let existing = corpus_graph::persist::load(out)?;
        graph = corpus_graph::merge_subgraph(&existing, &graph)?;
    }
    corpus_graph::persist::persist(&graph, out)?;

    println!(
        "ingested {} documents ({} chunks) -> {} entities, {} relations, {} parse warnings",
        documents.len(),
        chunks.len(),
        graph.entities.len(),
        graph.relations.len(),
        build.parse_warnings
    );
    println!(
        "ledger: llm={} embed={} (graph at {})",
        ledger.llm_calls(),
        ledger.embed_calls(),
        out.display()
    );
    Ok(())
}

fn query(
    config: &Config,
    graph_dir: &Path,
    question: &str,
    trace: Option<&Path>,
    backend: &dyn LlmBackend,
    format: ReportFormat,
) -> Result<()> {
    let graph = corpus_graph::persist::load(graph_dir)?;
    let matrix_config = config.matrix_config();
    let result = run_matrix(question, &matrix_config, &graph, backend)?;
    if let Some(path) = trace {
        std::fs::write(path, result.to_json())
            .with_context(|| format!("writing trace {}", path.display()))?;
    }
    match format {
        ReportFormat::Json => println!("{}", result.to_json()),
        ReportFormat::Text => print!("{}", report::render_query_text(&result)),
    }
    Ok(())
}

/// Question posed to the engine for one 24-game problem.
fn game24_question(problem: &Game24Problem) -> String {
    let [a, b, c, d] = problem.numbers();
    format!(
        "Using the four numbers {a}, {b}, {c}, and {d} exactly once each, with +, -, *, / \
         and parentheses, write an equation that equals 24. Finish with the equation on \
         its own line, in the form <expression> = 24."
    )
}

fn bench24(
    config: &Config,
    problems: &[Game24Problem],
    graph: &KnowledgeGraph,
    mock: Option<&Path>,
    oracle: bool,
    report_path: Option<&Path>,
    format: ReportFormat,
) -> Result<()> {
    let matrix_config = config.matrix_config();
    let document = if oracle {
        let report = run_game24_benchmark(problems, |p| {
            solve_24(p).unwrap_or_else(|| "no solution".into())
        })?;
        BenchDocument {
            engine: "solver-oracle".into(),
            predicted_per_run: None,
            actual_total: None,
            report,
        }
    } else {
        let backend = make_backend(config, mock)?;
        let mut actual = (0u64, 0u64);
        let report = run_game24_benchmark(problems, |p| {
            run_engine(&game24_question(p), &matrix_config, graph, backend.as_ref(), &mut actual)
        })?;
        BenchDocument {
            engine: format!("mot-{}x{}", matrix_config.rows, matrix_config.cols),
            predicted_per_run: Some(predict_call_counts(
                matrix_config.rows,
                matrix_config.cols,
                CallStructure::Mot,
            )),
            actual_total: Some(actual),
            report,
        }
    };
    let rendered = match format {
        ReportFormat::Json => report::render_json(&document),
        ReportFormat::Text => report::render_bench24_text(&document),
    };
    report::emit(&rendered, report_path)
}

/// Run one matrix query for a benchmark item, accumulating call counts.
/// Engine failures degrade to an empty answer so the item scores as a
/// failure instead of aborting the whole benchmark.
fn run_engine(
    question: &str,
    matrix_config: &MatrixConfig,
    graph: &KnowledgeGraph,
    backend: &dyn LlmBackend,
    actual: &mut (u64, u64),
) -> String {
    match run_matrix(question, matrix_config, graph, backend) {
        Ok(result) => {
            actual.0 += result.ledger.reasoning_llm_calls;
            actual.1 += result.ledger.retrieval_calls;
            result.answer
        }
        Err(err) => {
            eprintln!("warning: engine failed on {question:?}: {err}");
            String::new()
        }
    }
}

fn benchqa(
    config: &Config,
    items: &[mot_core::eval_bench::QaInstance],
    graph: &KnowledgeGraph,
    backend: &dyn LlmBackend,
    report_path: Option<&Path>,
    format: ReportFormat,
) -> Result<()> {
    let matrix_config = config.matrix_config();
    let mut actual = (0u64, 0u64);
    let report = run_qa_benchmark(items, |item| {
        run_engine(&item.question, &matrix_config, graph, backend, &mut actual)
    })?;
    let document = BenchDocument {
        engine: format!("mot-{}x{}", matrix_config.rows, matrix_config.cols),
        predicted_per_run: Some(predict_call_counts(
            matrix_config.rows,
            matrix_config.cols,
            CallStructure::Mot,
        )),
        actual_total: Some(actual),
        report,
    };
    let rendered = match format {
        ReportFormat::Json => report::render_json(&document),
        ReportFormat::Text => report::render_qa_text(&document),
    };
    report::emit(&rendered, report_path)
}

fn judge(
    question: &str,
    answer_a: &Path,
    answer_b: &Path,
    backend: &dyn LlmBackend,
    report_path: Option<&Path>,
    format: ReportFormat,
) -> Result<()> {
    let a = std::fs::read_to_string(answer_a)
        .with_context(|| format!("reading {}", answer_a.display()))?;
    let b = std::fs::read_to_string(answer_b)
        .with_context(|| format!("reading {}", answer_b.display()))?;
    let ledger = CallLedger::new();
    let record = pairwise_judge(question, a.trim(), b.trim(), backend, &ledger)?;
    let rendered = match format {
        ReportFormat::Json => report::render_json(&record),
        ReportFormat::Text => report::render_judge_text(&record),
    };
    report::emit(&rendered, report_path)
}

#[derive(Serialize)]
struct GraphStats {
    entities: usize,
    relations: usize,
    chunks: usize,
    kv_entries: usize,
    entity_vectors: usize,
    relation_vectors: usize,
    embed_dim: Option<usize>,
}

fn inspect(graph_dir: &Path) -> Result<()> {
    let graph = corpus_graph::persist::load(graph_dir)?;
    let stats = GraphStats {
        entities: graph.entities.len(),
        relations: graph.relations.len(),
        chunks: graph.chunk_store.len(),
        kv_entries: graph.kv_index.len(),
        entity_vectors: graph.entity_vectors.len(),
        relation_vectors: graph.relation_vectors.len(),
        embed_dim: graph.entity_vectors.iter().next().map(|(_, v)| v.len()),
    };
    println!("{}", report::render_json(&stats));
    Ok(())
}
