//! Report rendering: deterministic JSON or a human-readable text summary
//! that includes the ledger and predicted-vs-actual call counts.

use clap::ValueEnum;
use mot_core::eval_bench::{Game24Report, JudgeRecord, QaReport, Winner, DIMENSIONS};
use mot_core::thought_matrix::{predict_call_counts, CallStructure, MotResult};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Text,
}

/// Write a rendered report to a file, or to stdout when no path is given.
pub fn emit(content: &str, path: Option<&Path>) -> anyhow::Result<()> {
    match path {
        Some(path) => {
            std::fs::write(path, content)?;
            eprintln!("report written to {}", path.display());
            Ok(())
        }
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

pub fn render_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

fn ledger_lines(out: &mut String, result: &MotResult) {
    let (m, n) = (result.config.rows, result.config.cols);
    let (predicted_llm, predicted_retrieval) = predict_call_counts(m, n, CallStructure::Mot);
    let _ = writeln!(
        out,
        "ledger: llm_total={} reasoning_llm={} retrieval={} embed={}",
        result.ledger.llm_calls,
        result.ledger.reasoning_llm_calls,
        result.ledger.retrieval_calls,
        result.ledger.embed_calls
    );
    let _ = writeln!(
        out,
        "calls predicted (reasoning llm, retrieval): ({predicted_llm}, {predicted_retrieval})"
    );
    let _ = writeln!(
        out,
        "calls actual    (reasoning llm, retrieval): ({}, {})",
        result.ledger.reasoning_llm_calls, result.ledger.retrieval_calls
    );
}

/// Text rendering of a query run: the answer, the matrix configuration, and
/// the call accounting.
pub fn render_query_text(result: &MotResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "answer:\n{}\n", result.answer);
    let _ = writeln!(
        out,
        "matrix: {}x{} scheme={} (base {}, step {})",
        result.config.rows,
        result.config.cols,
        result.config.scheme.kind,
        result.config.scheme.base,
        result.config.scheme.step
    );
    ledger_lines(&mut out, result);
    out
}

/// Bench document wrapping a report with engine info and aggregate call
/// accounting across all per-problem runs.
#[derive(Debug, Serialize)]
pub struct BenchDocument<R: Serialize> {
    pub engine: String,
    /// Per-problem predicted (reasoning llm, retrieval) counts, when the
    /// engine is a matrix run.
    pub predicted_per_run: Option<(u64, u64)>,
    /// Summed actual counts across runs.
    pub actual_total: Option<(u64, u64)>,
    pub report: R,
}

pub fn render_bench24_text(doc: &BenchDocument<Game24Report>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "24-game benchmark ({} problems)", doc.report.total);
    let _ = writeln!(out, "engine: {}", doc.engine);
    let _ = writeln!(
        out,
        "success rate: {:.3} ({}/{})",
        doc.report.success_rate, doc.report.successes, doc.report.total
    );
    if let (Some(predicted), Some(actual)) = (doc.predicted_per_run, doc.actual_total) {
        let runs = doc.report.total as u64;
        let _ = writeln!(
            out,
            "calls predicted (reasoning llm, retrieval): ({}, {})",
            predicted.0 * runs,
            predicted.1 * runs
        );
        let _ = writeln!(
            out,
            "calls actual    (reasoning llm, retrieval): ({}, {})",
            actual.0, actual.1
        );
    }
    for item in &doc.report.items {
        let _ = writeln!(
            out,
            "  {:?} -> {} [{:?}]",
            item.numbers,
            item.equation.as_deref().unwrap_or("<no equation>"),
            item.reason
        );
    }
    out
}

pub fn render_qa_text(doc: &BenchDocument<QaReport>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "QA benchmark ({} questions)", doc.report.total);
    let _ = writeln!(out, "engine: {}", doc.engine);
    let _ = writeln!(
        out,
        "mean F1: {:.4}  mean EM: {:.4}",
        doc.report.mean_f1, doc.report.mean_em
    );
    if let (Some(predicted), Some(actual)) = (doc.predicted_per_run, doc.actual_total) {
        let runs = doc.report.total as u64;
        let _ = writeln!(
            out,
            "calls predicted (reasoning llm, retrieval): ({}, {})",
            predicted.0 * runs,
            predicted.1 * runs
        );
        let _ = writeln!(
            out,
            "calls actual    (reasoning llm, retrieval): ({}, {})",
            actual.0, actual.1
        );
    }
    out
}

pub fn render_judge_text(record: &JudgeRecord) -> String {
    let mut out = String::new();
    for dimension in DIMENSIONS {
        let winner = match record.winner(dimension) {
            Some(Winner::AnswerA) => "A",
            Some(Winner::AnswerB) => "B",
            Some(Winner::Split) => "split",
            None => "?",
        };
        let _ = writeln!(out, "{dimension}: {winner}");
    }
    let _ = writeln!(out, "Rationale: {}", record.rationale);
    out
}
