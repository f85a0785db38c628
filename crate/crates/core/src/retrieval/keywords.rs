//! Query keyword extraction.
//!
//! One LLM call turns a query into high-level keywords (themes, concepts)
//! and low-level keywords (entities, concrete terms), returned as a JSON
//! object with exactly those two keys. The operation is total: parse
//! failures retry once, then fall back to the whole question as a single
//! low-level keyword.

use super::QueryComposition;
use crate::corpus_graph::PromptTemplate;
use crate::llm_gateway::{complete, CallLedger, LlmBackend, PHASE_KEYWORDS};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const KEYWORD_TEMPLATE_BODY: &str = "### Task: query keyword extraction

Extract keywords from the query below for knowledge retrieval.

Return ONLY a JSON object with exactly these two keys and no other text:
- \"high_level_keywords\": overarching concepts or themes
- \"low_level_keywords\": specific entities, details, or concrete terms

Query:
{query}
";

/// The keyword-extraction prompt template.
pub fn keyword_template() -> PromptTemplate {
    PromptTemplate::new("extract_keywords", KEYWORD_TEMPLATE_BODY, &["query"])
}

/// Dual-level retrieval keywords.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Keywords {
    pub high_level: Vec<String>,
    pub low_level: Vec<String>,
}

impl Keywords {
    pub fn is_empty(&self) -> bool {
        self.high_level.is_empty() && self.low_level.is_empty()
    }
}

#[derive(Deserialize)]
struct KeywordsWire {
    #[serde(default)]
    high_level_keywords: Vec<String>,
    #[serde(default)]
    low_level_keywords: Vec<String>,
}

fn clean(list: Vec<String>) -> Vec<String> {
    let mut seen = Vec::new();
    for item in list {
        let trimmed = item.trim().to_string();
        if !trimmed.is_empty() && !seen.contains(&trimmed) {
            seen.push(trimmed);
        }
    }
    seen
}

/// Parse the wire JSON, tolerating surrounding prose or code fences by
/// scanning for the outermost object.
pub fn parse_keywords_json(text: &str) -> Option<Keywords> {
    let start = text.find('{')?;
    let end = text.rfind('}')?;
    if end < start {
        return None;
    }
    let wire: KeywordsWire = serde_json::from_str(&text[start..=end]).ok()?;
    let keywords = Keywords {
        high_level: clean(wire.high_level_keywords),
        low_level: clean(wire.low_level_keywords),
    };
    if keywords.is_empty() {
        None
    } else {
        Some(keywords)
    }
}

/// Extract keywords for a query. Never fails: after one retry, the fallback
/// uses the whole question as a low-level keyword.
pub fn extract_keywords(
    query: &QueryComposition,
    backend: &dyn LlmBackend,
    ledger: &CallLedger,
) -> Keywords {
    let template = keyword_template();
    let mut bindings = BTreeMap::new();
    bindings.insert("query", query.composed_text());
    let prompt = match template.render(&bindings) {
        Ok(p) => p,
        Err(_) => return fallback(query),
    };
    for _attempt in 0..2 {
        match complete(backend, &prompt, ledger, PHASE_KEYWORDS) {
            Ok(response) => {
                if let Some(keywords) = parse_keywords_json(&response) {
                    return keywords;
                }
            }
            Err(_) => break,
        }
    }
    fallback(query)
}

fn fallback(query: &QueryComposition) -> Keywords {
    Keywords {
        high_level: Vec::new(),
        low_level: vec![query.question.clone()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm_gateway::MockBackend;

    fn query(q: &str) -> QueryComposition {
        QueryComposition::new(q)
    }

    #[test]
    fn scripted_json_parses_into_both_lists() {
        let backend = MockBackend::from_pairs(vec![(
            "keyword extraction",
            r#"{"high_level_keywords":["employment"],"low_level_keywords":["Alice","Acme"]}"#,
        )]);
        let ledger = CallLedger::new();
        let kw = extract_keywords(&query("Where does Alice work?"), &backend, &ledger);
        assert_eq!(kw.high_level, vec!["employment"]);
        assert_eq!(kw.low_level, vec!["Alice", "Acme"]);
        assert_eq!(ledger.phase_count(PHASE_KEYWORDS), 1);
    }

    #[test]
    fn malformed_response_twice_falls_back_to_question() {
        let backend = MockBackend::from_pairs(vec![("keyword extraction", "not json at all")]);
        let ledger = CallLedger::new();
        let kw = extract_keywords(&query("Where does Alice work?"), &backend, &ledger);
        assert!(kw.high_level.is_empty());
        assert_eq!(kw.low_level, vec!["Where does Alice work?"]);
        // One original call plus one retry.
        assert_eq!(ledger.phase_count(PHASE_KEYWORDS), 2);
    }

    #[test]
    fn empty_lists_in_valid_json_still_fall_back() {
        let backend = MockBackend::from_pairs(vec![(
            "keyword extraction",
            r#"{"high_level_keywords":[],"low_level_keywords":[]}"#,
        )]);
        let ledger = CallLedger::new();
        let kw = extract_keywords(&query("anything?"), &backend, &ledger);
        assert_eq!(kw.low_level, vec!["anything?"]);
    }

    #[test]
    fn backend_failure_falls_back_without_counting() {
        let backend = MockBackend::from_pairs::<&str, &str>(vec![]);
        let ledger = CallLedger::new();
        let kw = extract_keywords(&query("q?"), &backend, &ledger);
        assert_eq!(kw.low_level, vec!["q?"]);
        assert_eq!(ledger.llm_calls(), 0);
    }

    #[test]
    fn entries_are_trimmed_and_deduplicated() {
        let parsed = parse_keywords_json(
            r#"{"high_level_keywords":[" theme ","theme"],"low_level_keywords":["a","","a"]}"#,
        )
        .unwrap();
        assert_eq!(parsed.high_level, vec!["theme"]);
        assert_eq!(parsed.low_level, vec!["a"]);
    }

    #[test]
    fn json_inside_code_fence_is_found() {
        let parsed = parse_keywords_json(
            "```json\n{\"high_level_keywords\":[\"x\"],\"low_level_keywords\":[]}\n```",
        )
        .unwrap();
        assert_eq!(parsed.high_level, vec!["x"]);
    }
}
