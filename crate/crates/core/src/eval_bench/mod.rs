//! Deterministic evaluation bench: 24-game verification with a solver
//! oracle, token-level QA scoring, pairwise judging, and benchmark runners
//! over line-delimited JSON inputs.

pub mod game24;
pub mod judge;
pub mod qa;

pub use game24::{
    all_problems, extract_equation, solve_24, verify_24, Game24Problem, Game24Verdict,
    VerdictReason, TARGET,
};
pub use judge::{judge_template, pairwise_judge, JudgeRecord, Winner, DIMENSIONS};
pub use qa::{normalize_answer, score_qa, QaScore};

use crate::llm_gateway::GatewayError;
use serde::{Deserialize, Serialize};
use std::io::BufRead;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("benchmark input is empty")]
    EmptyBenchmark,
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("both answers must be non-empty")]
    EmptyAnswer,
    #[error("judge output unparseable after retry, starting with {response_head:?}")]
    JudgeParseError { response_head: String },
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Serde(#[from] serde_json::Error),
}

/// Per-problem outcome in a 24-game run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Game24Item {
    pub numbers: [i64; 4],
    /// Equation extracted from the answer text, when one was found.
    pub equation: Option<String>,
    pub reason: VerdictReason,
    pub valid: bool,
}

/// Aggregate 24-game report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Game24Report {
    pub total: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub items: Vec<Game24Item>,
}

/// Run the 24-game benchmark: the engine produces a final answer text per
/// problem, the last well-formed equation is extracted, and success means
/// the verifier accepts it.
pub fn run_game24_benchmark(
    problems: &[Game24Problem],
    mut engine: impl FnMut(&Game24Problem) -> String,
) -> Result<Game24Report, BenchError> {
    if problems.is_empty() {
        return Err(BenchError::EmptyBenchmark);
    }
    let mut items = Vec::with_capacity(problems.len());
    let mut successes = 0usize;
    for problem in problems {
        let answer = engine(problem);
        let item = match extract_equation(&answer) {
            Some(equation) => {
                let verdict = verify_24(problem, &equation);
                Game24Item {
                    numbers: problem.numbers(),
                    equation: Some(equation),
                    reason: verdict.reason,
                    valid: verdict.valid,
                }
            }
            None => Game24Item {
                numbers: problem.numbers(),
                equation: None,
                reason: VerdictReason::ParseError,
                valid: false,
            },
        };
        if item.valid {
            successes += 1;
        }
        items.push(item);
    }
    Ok(Game24Report {
        total: problems.len(),
        successes,
        success_rate: successes as f64 / problems.len() as f64,
        items,
    })
}

/// One QA benchmark instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QaInstance {
    pub question: String,
    pub answers: Vec<String>,
}

/// Per-question outcome in a QA run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QaItem {
    pub question: String,
    pub prediction: String,
    pub f1: f64,
    pub em: u8,
}

/// Aggregate QA report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QaReport {
    pub total: usize,
    pub mean_f1: f64,
    pub mean_em: f64,
    pub items: Vec<QaItem>,
}

/// Run the QA benchmark with F1/EM scoring per instance.
pub fn run_qa_benchmark(
    instances: &[QaInstance],
    mut engine: impl FnMut(&QaInstance) -> String,
) -> Result<QaReport, BenchError> {
    if instances.is_empty() {
        return Err(BenchError::EmptyBenchmark);
    }
    let mut items = Vec::with_capacity(instances.len());
    for instance in instances {
        if instance.answers.is_empty() {
            return Err(BenchError::InvalidProblem(format!(
                "question {:?} has no gold answers",
                instance.question
            )));
        }
        let prediction = engine(instance);
        let score = score_qa(&prediction, &instance.answers);
        items.push(QaItem {
            question: instance.question.clone(),
            prediction,
            f1: score.f1,
            em: score.em,
        });
    }
    let total = items.len();
    let mean_f1 = items.iter().map(|i| i.f1).sum::<f64>() / total as f64;
    let mean_em = items.iter().map(|i| i.em as f64).sum::<f64>() / total as f64;
    Ok(QaReport {
        total,
        mean_f1,
        mean_em,
        items,
    })
}

#[derive(Deserialize)]
struct Game24Row {
    numbers: [i64; 4],
}

/// Load 24-game problems from line-delimited JSON: `{"numbers": [a,b,c,d]}`.
pub fn load_game24_problems(path: &Path) -> Result<Vec<Game24Problem>, BenchError> {
    let file = std::fs::File::open(path)?;
    let mut problems = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Game24Row = serde_json::from_str(&line)?;
        problems.push(Game24Problem::new(row.numbers)?);
    }
    Ok(problems)
}

/// Load QA instances from line-delimited JSON:
/// `{"question": "...", "answers": ["..."]}`.
pub fn load_qa_instances(path: &Path) -> Result<Vec<QaInstance>, BenchError> {
    let file = std::fs::File::open(path)?;
    let mut instances = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        instances.push(serde_json::from_str(&line)?);
    }
    Ok(instances)
}
