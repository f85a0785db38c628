//! Thought-node and summary prompt construction, plus the paragraph slice
//! that implements column-cell communication.

use crate::corpus_graph::{PromptTemplate, TemplateError};
use crate::retrieval::KnowledgeUnit;
use std::collections::BTreeMap;

/// Label that introduces the communicated slice of the previous node.
pub const COMMUNICATION_HEADER: &str =
    "Previous strategy (take a completely different approach):";

const THOUGHT_TEMPLATE_BODY: &str = "### Task: draft an answer strategy

Use the retrieved knowledge below to answer the question. Split the answer
into multiple paragraphs and respond to the question directly, without extra
introductions or explanations.

Retrieved knowledge:
{knowledge_unit}

Question:
{question}
{communication}";

const SUMMARY_TEMPLATE_BODY: &str = "### Task: consolidate column strategies

Review the draft strategies below against the retrieved knowledge. Keep the
parts that are correct unchanged, complete the parts that lack detail using
the retrieved knowledge, and correct any factual errors so the result stays
logically coherent. Answer in multiple paragraphs, keeping the language
consistent with the drafts.

Question:
{question}

Draft strategies:
{column_nodes}

Retrieved knowledge:
{knowledge_unit}
";

/// Template for thought nodes; the initial node binds an empty
/// communication section.
pub fn thought_template() -> PromptTemplate {
    PromptTemplate::new("thought_node", THOUGHT_TEMPLATE_BODY, &["question", "knowledge_unit"])
}

/// Template for per-column summary nodes.
pub fn summary_template() -> PromptTemplate {
    PromptTemplate::new("summary_node", SUMMARY_TEMPLATE_BODY, &["question", "knowledge_unit", "column_nodes"])
}

/// Split text into paragraphs on one or more blank lines; surrounding
/// whitespace is ignored.
pub fn split_paragraphs(text: &str) -> Vec<String> {
    let mut paragraphs = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                paragraphs.push(current.join("\n").trim().to_string());
                current.clear();
            }
        } else {
            current.push(line);
        }
    }
    if !current.is_empty() {
        paragraphs.push(current.join("\n").trim().to_string());
    }
    paragraphs
}

/// Build a thought-node prompt. A non-empty `communication_slice` is
/// appended in its labeled section; an empty slice leaves the prompt
/// byte-identical to the no-communication form.
pub fn render_thought_prompt(
    question: &str,
    ku: &KnowledgeUnit,
    communication_slice: &str,
) -> Result<String, TemplateError> {
    let communication = if communication_slice.is_empty() {
        String::new()
    } else {
        format!("\n{COMMUNICATION_HEADER}\n{communication_slice}\n")
    };
    let mut bindings = BTreeMap::new();
    bindings.insert("question", question.to_string());
    bindings.insert("knowledge_unit", ku.serialized.clone());
    bindings.insert("communication", communication);
    thought_template().render(&bindings)
}

/// Build the per-column summary prompt over every node text in the column.
pub fn render_summary_prompt(
    question: &str,
    column_node_texts: &[String],
    ku: &KnowledgeUnit,
) -> Result<String, TemplateError> {
    let column_nodes = column_node_texts
        .iter()
        .enumerate()
        .map(|(i, text)| format!("Strategy {}:\n{}", i + 1, text))
        .collect::<Vec<_>>()
        .join("\n\n");
    let mut bindings = BTreeMap::new();
    bindings.insert("question", question.to_string());
    bindings.insert("knowledge_unit", ku.serialized.clone());
    bindings.insert("column_nodes", column_nodes);
    summary_template().render(&bindings)
}
