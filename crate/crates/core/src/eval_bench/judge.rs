//! Pairwise LLM-as-judge protocol over four dimensions.
//!
//! Two answers are compared on Comprehensiveness, Accuracy, Empowerment,
//! and Overall. To mitigate position bias the judge is called twice, with
//! the answers swapped on the second call; a dimension's winner stands only
//! when both orders agree, otherwise it is recorded as a split.

use super::BenchError;
use crate::corpus_graph::PromptTemplate;
use crate::llm_gateway::{complete, CallLedger, LlmBackend, PHASE_JUDGE};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const DIMENSIONS: [&str; 4] = ["Comprehensiveness", "Accuracy", "Empowerment", "Overall"];

const JUDGE_TEMPLATE_BODY: &str = "### Task: pairwise answer judgement

Compare the two answers to the question on four dimensions:
Comprehensiveness, Accuracy, Empowerment, Overall.

For each dimension name the winning answer. Reply in exactly this format,
one line per dimension, then the rationale:
Comprehensiveness: A or B
Accuracy: A or B
Empowerment: A or B
Overall: A or B
Rationale: <one short paragraph>

Question:
{question}

Answer A:
{answer_a}

Answer B:
{answer_b}
";

/// The judging prompt template.
pub fn judge_template() -> PromptTemplate {
    PromptTemplate::new(
        "pairwise_judge",
        JUDGE_TEMPLATE_BODY,
        &["question", "answer_a", "answer_b"],
    )
}

/// Winner of one dimension after both orders are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Winner {
    AnswerA,
    AnswerB,
    /// The two orders disagreed.
    Split,
}

impl Winner {
    fn swapped(self) -> Self {
        match self {
            Winner::AnswerA => Winner::AnswerB,
            Winner::AnswerB => Winner::AnswerA,
            Winner::Split => Winner::Split,
        }
    }
}

/// Resolved judgement across both orders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeRecord {
    pub comprehensiveness: Winner,
    pub accuracy: Winner,
    pub empowerment: Winner,
    pub overall: Winner,
    pub rationale: String,
}

impl JudgeRecord {
    pub fn winner(&self, dimension: &str) -> Option<Winner> {
        match dimension {
            "Comprehensiveness" => Some(self.comprehensiveness),
            "Accuracy" => Some(self.accuracy),
            "Empowerment" => Some(self.empowerment),
            "Overall" => Some(self.overall),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct SingleJudgement {
    winners: BTreeMap<String, Winner>,
    rationale: String,
}

/// Parse the fixed-format judge reply: one `Dimension: A|B` line per
/// dimension plus a rationale line.
fn parse_judge_response(text: &str) -> Option<SingleJudgement> {
    let mut winners = BTreeMap::new();
    let mut rationale = String::new();
    for line in text.lines() {
        let line = line.trim();
        let Some((key, value)) = line.split_once(':') else {
            continue;
        };
        let key = key.trim();
        let value = value.trim();
        if key.eq_ignore_ascii_case("rationale") {
            rationale = value.to_string();
            continue;
        }
        for dimension in DIMENSIONS {
            if key.eq_ignore_ascii_case(dimension) {
                let winner = match value.to_ascii_uppercase().as_str() {
                    "A" => Winner::AnswerA,
                    "B" => Winner::AnswerB,
                    _ => return None,
                };
                winners.insert(dimension.to_string(), winner);
            }
        }
    }
    if winners.len() == DIMENSIONS.len() {
        Some(SingleJudgement { winners, rationale })
    } else {
        None
    }
}

fn judge_once(
    question: &str,
    answer_a: &str,
    answer_b: &str,
    backend: &dyn LlmBackend,
    ledger: &CallLedger,
) -> Result<SingleJudgement, BenchError> {
    let mut bindings = BTreeMap::new();
    bindings.insert("question", question.to_string());
    bindings.insert("answer_a", answer_a.to_string());
    bindings.insert("answer_b", answer_b.to_string());
    let prompt = judge_template()
        .render(&bindings)
        .map_err(|e| BenchError::InvalidProblem(e.to_string()))?;
    // One retry on unparseable output before giving up.
    let mut last_response = String::new();
    for _attempt in 0..2 {
        let response = complete(backend, &prompt, ledger, PHASE_JUDGE)?;
        if let Some(parsed) = parse_judge_response(&response) {
            return Ok(parsed);
        }
        last_response = response;
    }
    Err(BenchError::JudgeParseError {
        response_head: last_response.chars().take(120).collect(),
    })
}

/// Judge a pair of answers in both orders and resolve per dimension.
pub fn pairwise_judge(
    question: &str,
    answer_a: &str,
    answer_b: &str,
    backend: &dyn LlmBackend,
    ledger: &CallLedger,
) -> Result<JudgeRecord, BenchError> {
    if answer_a.trim().is_empty() || answer_b.trim().is_empty() {
        return Err(BenchError::EmptyAnswer);
    }
    let forward = judge_once(question, answer_a, answer_b, backend, ledger)?;
    let reversed = judge_once(question, answer_b, answer_a, backend, ledger)?;

    let resolve = |dimension: &str| {
        let f = forward.winners[dimension];
        // In the reversed order A and B are swapped, so map back.
        let r = reversed.winners[dimension].swapped();
        if f == r {
            f
        } else {
            Winner::Split
        }
    };

    let mut rationale = forward.rationale.clone();
    if !reversed.rationale.is_empty() && reversed.rationale != forward.rationale {
        if !rationale.is_empty() {
            rationale.push_str(" / ");
        }
        rationale.push_str(&reversed.rationale);
    }

    Ok(JudgeRecord {
        comprehensiveness: resolve("Comprehensiveness"),
        accuracy: resolve("Accuracy"),
        empowerment: resolve("Empowerment"),
        overall: resolve("Overall"),
        rationale,
    })
}
