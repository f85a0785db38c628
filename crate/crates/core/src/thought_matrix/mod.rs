//! The thought-matrix reasoning engine.
//!
//! A run fills an m×n grid column by column. Column 1 is seeded by a
//! knowledge unit retrieved from the bare question; every later column is
//! seeded by a retrieval over the question plus the previous column's
//! summary. Within a column, row 1 starts fresh while rows 2..m each see a
//! weighted slice of the node directly above and are instructed to take a
//! different approach. Each column ends with a corrective summary against a
//! freshly retrieved knowledge unit; the final summary is the answer.

pub mod prompts;
pub mod weights;

pub use prompts::{
    render_summary_prompt, render_thought_prompt, split_paragraphs, summary_template,
    thought_template, COMMUNICATION_HEADER,
};
pub use weights::{build_weight_matrix, SchemeKind, WeightMatrix, WeightScheme};

use crate::corpus_graph::{KnowledgeGraph, TemplateError};
use crate::llm_gateway::{
    complete, CallLedger, GatewayError, LedgerSnapshot, LlmBackend, PHASE_SUMMARY, PHASE_THOUGHT,
};
use crate::retrieval::{
    retrieve_knowledge_unit, KnowledgeUnit, QueryComposition, DEFAULT_KU_BUDGET, DEFAULT_TOP_M,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MotError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("run aborted after {} nodes and {} summaries: {}", .0.nodes.len(), .0.summaries.len(), .0.cause)]
    Aborted(Box<AbortedRun>),
}

/// Partial trace carried out of a failed run.
#[derive(Debug)]
pub struct AbortedRun {
    pub cause: String,
    pub nodes: Vec<ThoughtNode>,
    pub summaries: Vec<SummaryNode>,
    pub events: Vec<EngineEvent>,
}

/// Engine configuration; defaults to the 3×4 matrix with the Vert&Hor-0.1
/// weight scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixConfig {
    pub rows: usize,
    pub cols: usize,
    pub scheme: WeightScheme,
    pub top_m: usize,
    pub ku_budget: usize,
}

impl Default for MatrixConfig {
    fn default() -> Self {
        Self {
            rows: 3,
            cols: 4,
            scheme: WeightScheme::default(),
            top_m: DEFAULT_TOP_M,
            ku_budget: DEFAULT_KU_BUDGET,
        }
    }
}

impl MatrixConfig {
    pub fn with_shape(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), MotError> {
        if self.rows < 1 || self.cols < 1 {
            return Err(MotError::Config(format!(
                "matrix shape {}x{} must be at least 1x1",
                self.rows, self.cols
            )));
        }
        if self.top_m < 1 {
            return Err(MotError::Config("top_m must be at least 1".into()));
        }
        if self.ku_budget < 1 {
            return Err(MotError::Config("ku_budget must be at least 1".into()));
        }
        self.scheme.validate()
    }
}

/// One generated thought node. The text is normalized so its paragraphs
/// rejoin to it exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThoughtNode {
    /// 1-based row within the column.
    pub row: usize,
    /// 1-based column.
    pub col: usize,
    pub text: String,
    pub paragraphs: Vec<String>,
    pub prompt_used: String,
}

impl ThoughtNode {
    fn from_response(row: usize, col: usize, response: &str, prompt_used: String) -> Self {
        let paragraphs = split_paragraphs(response);
        let text = paragraphs.join("\n\n");
        Self {
            row,
            col,
            text,
            paragraphs,
            prompt_used,
        }
    }
}

/// Per-column corrective summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryNode {
    pub col: usize,
    pub text: String,
    /// Which knowledge unit corrected this column.
    pub ku_key: String,
    pub prompt_used: String,
}

/// Ordered record of what the engine did, used to check degeneracy
/// arguments against a chain reference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EngineEvent {
    Retrieve { col: usize },
    Thought { row: usize, col: usize },
    Summarize { col: usize },
}

/// Complete result of one matrix run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotResult {
    pub answer: String,
    pub config: MatrixConfig,
    /// Reported (m−1)×(n−1) weight grid.
    pub weight_matrix: Vec<Vec<f64>>,
    pub nodes: Vec<ThoughtNode>,
    pub summaries: Vec<SummaryNode>,
    pub events: Vec<EngineEvent>,
    pub ledger: LedgerSnapshot,
}

impl MotResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

/// The last ⌈α·P⌉ paragraphs of a node, joined in order. α = 0 passes
/// nothing; α = 1 passes the entire node text.
pub fn communication_slice(node: &ThoughtNode, alpha: f64) -> String {
    debug_assert!((0.0..=1.0).contains(&alpha));
    if alpha <= 0.0 || node.paragraphs.is_empty() {
        return String::new();
    }
    let total = node.paragraphs.len();
    let take = ((alpha * total as f64).ceil() as usize).min(total);
    node.paragraphs[total - take..].join("\n\n")
}

fn generate_row_one(
    question: &str,
    ku: &KnowledgeUnit,
    col: usize,
    backend: &dyn LlmBackend,
    ledger: &CallLedger,
) -> Result<ThoughtNode, MotError> {
    let prompt = render_thought_prompt(question, ku, "")?;
    let response = complete(backend, &prompt, ledger, PHASE_THOUGHT)?;
    Ok(ThoughtNode::from_response(1, col, &response, prompt))
}

/// Generate the initial thought node at (1, 1) from the first knowledge
/// unit. One LLM call.
pub fn generate_initial_node(
    question: &str,
    ku: &KnowledgeUnit,
    backend: &dyn LlmBackend,
    ledger: &CallLedger,
) -> Result<ThoughtNode, MotError> {
    generate_row_one(question, ku, 1, backend, ledger)
}

/// Generate the node below `prev` in the same column, exposing a weighted
/// slice of it. One LLM call.
pub fn generate_thought_node(
    question: &str,
    ku: &KnowledgeUnit,
    prev: &ThoughtNode,
    alpha: f64,
    backend: &dyn LlmBackend,
    ledger: &CallLedger,
) -> Result<ThoughtNode, MotError> {
    let slice = communication_slice(prev, alpha);
    let prompt = render_thought_prompt(question, ku, &slice)?;
    let response = complete(backend, &prompt, ledger, PHASE_THOUGHT)?;
    Ok(ThoughtNode::from_response(prev.row + 1, prev.col, &response, prompt))
}

/// Refine and aggregate a fully generated column: one retrieval seeded by
/// the question plus all column node texts, then one LLM call.
pub fn summarize_column(
    question: &str,
    column_nodes: &[ThoughtNode],
    graph: &KnowledgeGraph,
    backend: &dyn LlmBackend,
    ledger: &CallLedger,
    top_m: usize,
    ku_budget: usize,
) -> Result<SummaryNode, MotError> {
    assert!(!column_nodes.is_empty(), "column must be fully generated");
    let col = column_nodes[0].col;
    let texts: Vec<String> = column_nodes.iter().map(|n| n.text.clone()).collect();
    let query = QueryComposition::with_context(question, texts.clone());
    let mut ku = retrieve_knowledge_unit(&query, graph, backend, ledger, top_m, ku_budget)?;
    ku.key = format!("ku:c{col}:refine");
    let prompt = render_summary_prompt(question, &texts, &ku)?;
    let text = complete(backend, &prompt, ledger, PHASE_SUMMARY)?;
    Ok(SummaryNode {
        col,
        text,
        ku_key: ku.key,
        prompt_used: prompt,
    })
}

#[derive(Default)]
struct TraceState {
    nodes: Vec<ThoughtNode>,
    summaries: Vec<SummaryNode>,
    events: Vec<EngineEvent>,
}

/// Run the full matrix procedure for a question over a built graph.
///
/// The run owns a fresh ledger; its snapshot lands in the result. Any stage
/// error aborts with the trace completed so far.
pub fn run_matrix(
    question: &str,
    config: &MatrixConfig,
    graph: &KnowledgeGraph,
    backend: &dyn LlmBackend,
) -> Result<MotResult, MotError> {
    config.validate()?;
    if question.trim().is_empty() {
        return Err(MotError::Config("question must be non-empty".into()));
    }
    let weights = build_weight_matrix(&config.scheme, config.rows, config.cols)?;
    let ledger = CallLedger::new();
    let mut trace = TraceState::default();

    match run_columns(question, config, graph, backend, &ledger, &weights, &mut trace) {
        Ok(answer) => Ok(MotResult {
            answer,
            config: config.clone(),
            weight_matrix: weights.reported(),
            nodes: trace.nodes,
            summaries: trace.summaries,
            events: trace.events,
            ledger: ledger.snapshot(),
        }),
        Err(err) => Err(MotError::Aborted(Box::new(AbortedRun {
            cause: err.to_string(),
            nodes: trace.nodes,
            summaries: trace.summaries,
            events: trace.events,
        }))),
    }
}

fn run_columns(
    question: &str,
    config: &MatrixConfig,
    graph: &KnowledgeGraph,
    backend: &dyn LlmBackend,
    ledger: &CallLedger,
    weights: &WeightMatrix,
    trace: &mut TraceState,
) -> Result<String, MotError> {
    let mut previous_summary: Option<String> = None;

    for col in 1..=config.cols {
        let query = match &previous_summary {
            None => QueryComposition::new(question),
            Some(summary) => QueryComposition::with_context(question, vec![summary.clone()]),
        };
        trace.events.push(EngineEvent::Retrieve { col });
        let mut ku =
            retrieve_knowledge_unit(&query, graph, backend, ledger, config.top_m, config.ku_budget)?;
        ku.key = format!("ku:c{col}:seed");

        let first = generate_row_one(question, &ku, col, backend, ledger)?;
        trace.events.push(EngineEvent::Thought { row: 1, col });
        trace.nodes.push(first);

        for row in 2..=config.rows {
            let alpha = weights.alpha(row, col);
            let prev = trace
                .nodes
                .last()
                .expect("previous row exists")
                .clone();
            let node = generate_thought_node(question, &ku, &prev, alpha, backend, ledger)?;
            trace.events.push(EngineEvent::Thought { row, col });
            trace.nodes.push(node);
        }

        let column_nodes: Vec<ThoughtNode> = trace
            .nodes
            .iter()
            .filter(|n| n.col == col)
            .cloned()
            .collect();
        trace.events.push(EngineEvent::Retrieve { col });
        let summary = summarize_column(
            question,
            &column_nodes,
            graph,
            backend,
            ledger,
            config.top_m,
            config.ku_budget,
        )?;
        trace.events.push(EngineEvent::Summarize { col });
        previous_summary = Some(summary.text.clone());
        trace.summaries.push(summary);
    }

    Ok(previous_summary.expect("at least one column ran"))
}

/// Which call-count model to predict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CallStructure {
    Mot,
    Ratt,
}

/// Predicted (LLM, retrieval) event counts for an m×n run.
///
/// The matrix procedure costs m thought calls plus one summary call and two
/// retrievals per column. The tree baseline costs m generation calls, m
/// refinement calls, and one summary call per layer, with one retrieval per
/// node.
pub fn predict_call_counts(m: usize, n: usize, structure: CallStructure) -> (u64, u64) {
    let (m, n) = (m as u64, n as u64);
    match structure {
        CallStructure::Mot => (n * (m + 1), 2 * n),
        CallStructure::Ratt => (n * (2 * m + 1), n * m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm_gateway::MockBackend;

    fn scripted_backend() -> MockBackend {
        MockBackend::from_pairs(vec![
            (
                "### Task: query keyword extraction",
                r#"{"high_level_keywords":["theme"],"low_level_keywords":["alice"]}"#,
            ),
            (
                "### Task: draft an answer strategy",
                "First strategy paragraph.\n\nSecond strategy paragraph.",
            ),
            ("### Task: consolidate column strategies", "Consolidated column answer."),
        ])
    }

    fn ku_with(text: &str) -> KnowledgeUnit {
        KnowledgeUnit {
            serialized: text.to_string(),
            ..KnowledgeUnit::default()
        }
    }

    #[test]
    fn initial_node_embeds_the_knowledge_unit_and_counts_once() {
        let backend = scripted_backend();
        let ledger = CallLedger::new();
        let ku = ku_with("[ku-content]");
        let node = generate_initial_node("Q?", &ku, &backend, &ledger).unwrap();
        assert_eq!(node.row, 1);
        assert_eq!(node.col, 1);
        assert!(node.prompt_used.contains("[ku-content]"));
        assert_eq!(node.text, "First strategy paragraph.\n\nSecond strategy paragraph.");
        assert_eq!(ledger.phase_count(PHASE_THOUGHT), 1);
    }

    #[test]
    fn zero_alpha_prompt_is_byte_identical_to_no_communication() {
        let backend = scripted_backend();
        let ledger = CallLedger::new();
        let ku = ku_with("K");
        let first = generate_initial_node("Q?", &ku, &backend, &ledger).unwrap();
        let second = generate_thought_node("Q?", &ku, &first, 0.0, &backend, &ledger).unwrap();
        let no_comm = render_thought_prompt("Q?", &ku, "").unwrap();
        assert_eq!(second.prompt_used, no_comm);
    }

    #[test]
    fn full_alpha_passes_every_paragraph_verbatim() {
        let backend = scripted_backend();
        let ledger = CallLedger::new();
        let ku = ku_with("K");
        let first = generate_initial_node("Q?", &ku, &backend, &ledger).unwrap();
        assert_eq!(first.paragraphs.len(), 2);
        let second = generate_thought_node("Q?", &ku, &first, 1.0, &backend, &ledger).unwrap();
        assert!(second.prompt_used.contains("First strategy paragraph."));
        assert!(second.prompt_used.contains("Second strategy paragraph."));
        assert!(second.prompt_used.contains(COMMUNICATION_HEADER));
        assert_eq!(second.row, 2);
    }

    #[test]
    fn slice_takes_the_ceiling_of_alpha_times_paragraphs() {
        let node = ThoughtNode::from_response(1, 1, "p1\n\np2\n\np3", String::new());
        assert_eq!(communication_slice(&node, 0.0), "");
        assert_eq!(communication_slice(&node, 1.0), "p1\n\np2\n\np3");
        // ceil(0.5 * 3) = 2: the last two paragraphs.
        assert_eq!(communication_slice(&node, 0.5), "p2\n\np3");
    }

    #[test]
    fn summarize_column_counts_one_retrieval_and_one_llm() {
        let backend = scripted_backend();
        let ledger = CallLedger::new();
        let ku = ku_with("K");
        let a = generate_initial_node("Q?", &ku, &backend, &ledger).unwrap();
        let b = generate_thought_node("Q?", &ku, &a, 0.5, &backend, &ledger).unwrap();
        let before = ledger.snapshot();
        let summary = summarize_column(
            "Q?",
            &[a.clone(), b.clone()],
            &KnowledgeGraph::default(),
            &backend,
            &ledger,
            DEFAULT_TOP_M,
            DEFAULT_KU_BUDGET,
        )
        .unwrap();
        let delta = ledger.snapshot().delta_from(&before);
        assert_eq!(delta.retrieval_calls, 1);
        assert_eq!(delta.per_phase.get(PHASE_SUMMARY), Some(&1));
        assert_eq!(summary.text, "Consolidated column answer.");
        // The summary prompt binds every column node text.
        assert!(summary.prompt_used.contains(&a.text));
        assert!(summary.prompt_used.contains(&b.text));
    }

    #[test]
    fn run_matrix_3x4_matches_the_predicted_counts() {
        let backend = scripted_backend();
        let config = MatrixConfig::with_shape(3, 4);
        let result = run_matrix("Q?", &config, &KnowledgeGraph::default(), &backend).unwrap();
        let (llm, retrieval) = predict_call_counts(3, 4, CallStructure::Mot);
        assert_eq!(result.ledger.reasoning_llm_calls, llm);
        assert_eq!(result.ledger.retrieval_calls, retrieval);
        assert_eq!((llm, retrieval), (16, 8));
        assert_eq!(result.nodes.len(), 12);
        assert_eq!(result.summaries.len(), 4);
    }

    #[test]
    fn one_by_one_run_is_the_chain_degenerate_case() {
        let backend = scripted_backend();
        let config = MatrixConfig::with_shape(1, 1);
        let result = run_matrix("Q?", &config, &KnowledgeGraph::default(), &backend).unwrap();
        assert_eq!(result.ledger.reasoning_llm_calls, 2);
        assert_eq!(result.ledger.retrieval_calls, 2);
        assert_eq!(
            result.events,
            vec![
                EngineEvent::Retrieve { col: 1 },
                EngineEvent::Thought { row: 1, col: 1 },
                EngineEvent::Retrieve { col: 1 },
                EngineEvent::Summarize { col: 1 },
            ]
        );
    }

    #[test]
    fn zero_weights_single_column_yields_identical_sibling_prompts() {
        let backend = scripted_backend();
        let mut config = MatrixConfig::with_shape(3, 1);
        config.scheme = WeightScheme::constant(0.0);
        let result = run_matrix("Q?", &config, &KnowledgeGraph::default(), &backend).unwrap();
        let prompts: Vec<&String> = result.nodes.iter().map(|n| &n.prompt_used).collect();
        assert_eq!(prompts.len(), 3);
        assert!(prompts.iter().all(|p| !p.contains(COMMUNICATION_HEADER)));
        assert!(prompts.iter().all(|p| *p == prompts[0]));
    }

    #[test]
    fn answer_equals_the_final_summary_text() {
        let backend = scripted_backend();
        let config = MatrixConfig::with_shape(2, 3);
        let result = run_matrix("Q?", &config, &KnowledgeGraph::default(), &backend).unwrap();
        assert_eq!(result.answer, result.summaries.last().unwrap().text);
    }

    #[test]
    fn fixed_inputs_give_byte_identical_results() {
        let backend = scripted_backend();
        let config = MatrixConfig::default();
        let a = run_matrix("Q?", &config, &KnowledgeGraph::default(), &backend).unwrap();
        let b = run_matrix("Q?", &config, &KnowledgeGraph::default(), &backend).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn backend_failure_aborts_with_the_partial_trace() {
        // Thoughts succeed but the summary rule is missing, so the run
        // aborts after the first column's nodes.
        let backend = MockBackend::from_pairs(vec![
            (
                "### Task: draft an answer strategy",
                "Some strategy.",
            ),
        ]);
        let config = MatrixConfig::with_shape(2, 2);
        let err = run_matrix("Q?", &config, &KnowledgeGraph::default(), &backend).unwrap_err();
        match err {
            MotError::Aborted(run) => {
                assert_eq!(run.nodes.len(), 2);
                assert!(run.summaries.is_empty());
            }
            other => panic!("expected aborted run, got {other:?}"),
        }
    }

    #[test]
    fn predicted_counts_match_the_cost_model() {
        assert_eq!(predict_call_counts(3, 4, CallStructure::Mot), (16, 8));
        assert_eq!(predict_call_counts(3, 4, CallStructure::Ratt), (28, 12));
        assert_eq!(predict_call_counts(1, 1, CallStructure::Mot), (2, 2));
    }

    #[test]
    fn invalid_config_is_rejected_before_any_call() {
        let backend = scripted_backend();
        let config = MatrixConfig::with_shape(0, 4);
        assert!(matches!(
            run_matrix("Q?", &config, &KnowledgeGraph::default(), &backend),
            Err(MotError::Config(_))
        ));
    }
}
