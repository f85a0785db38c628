//! Dual retrieval over the knowledge graph and knowledge-unit assembly.
//!
//! Low-level keywords query the entity vector index, high-level keywords the
//! relation vector index. Hits expand to one-hop triples and their source
//! chunks, and the result is serialized into one knowledge unit: a triples
//! section followed by original text, trimmed to a word budget.

mod keywords;

pub use keywords::{extract_keywords, keyword_template, parse_keywords_json, Keywords};

use crate::corpus_graph::KnowledgeGraph;
use crate::llm_gateway::{embed, CallLedger, GatewayError, LlmBackend};
use serde::{Deserialize, Serialize};

/// Default hits kept per retrieval level.
pub const DEFAULT_TOP_M: usize = 5;
/// Default knowledge-unit word budget.
pub const DEFAULT_KU_BUDGET: usize = 1800;

// Single-word section headers so they cost one budget word each.
const TRIPLES_HEADER: &str = "[knowledge-triples]";
const SOURCES_HEADER: &str = "[source-text]";
/// Marker emitted when retrieval produced nothing usable.
pub const EMPTY_KU_MARKER: &str = "[no-retrieved-knowledge]";

/// The retrieval query: the question plus any accumulated node texts that
/// should steer this retrieval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryComposition {
    pub question: String,
    pub context_nodes: Vec<String>,
}

impl QueryComposition {
    pub fn new(question: &str) -> Self {
        Self {
            question: question.to_string(),
            context_nodes: Vec::new(),
        }
    }

    pub fn with_context(question: &str, context_nodes: Vec<String>) -> Self {
        Self {
            question: question.to_string(),
            context_nodes,
        }
    }

    /// The flat text handed to keyword extraction.
    pub fn composed_text(&self) -> String {
        if self.context_nodes.is_empty() {
            return self.question.clone();
        }
        let mut text = self.question.clone();
        for node in &self.context_nodes {
            text.push('\n');
            text.push_str(node);
        }
        text
    }
}

/// A triple hit with the score it inherited from retrieval ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTriple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub score: f64,
}

/// Ranked output of dual retrieval.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RetrievalHits {
    /// Entity keys by descending cosine score.
    pub entity_hits: Vec<(String, f64)>,
    /// Relation keys by descending cosine score.
    pub relation_hits: Vec<(String, f64)>,
    /// Triples from one-hop expansion of entity hits plus the hit relations,
    /// descending score.
    pub triples: Vec<ScoredTriple>,
    /// Source chunk texts of all hits, deduplicated, in hit-rank order.
    pub source_chunks: Vec<String>,
}

impl RetrievalHits {
    pub fn is_empty(&self) -> bool {
        self.entity_hits.is_empty() && self.relation_hits.is_empty()
    }
}

/// One retrieval product: triples plus original text, rendered into a
/// budget-bounded block.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeUnit {
    /// Label assigned by the caller (for trace references).
    pub key: String,
    pub triples: Vec<ScoredTriple>,
    pub source_texts: Vec<String>,
    pub serialized: String,
    /// Whitespace-word count of `serialized`; never exceeds the budget.
    pub budget_used: usize,
}

/// Run both retrieval levels against the graph indexes.
///
/// Empty graphs and empty keyword levels yield empty hits rather than
/// errors; embeddings happen only for non-empty levels.
pub fn dual_retrieve(
    kw: &Keywords,
    graph: &KnowledgeGraph,
    backend: &dyn LlmBackend,
    ledger: &CallLedger,
    top_m: usize,
) -> Result<RetrievalHits, GatewayError> {
    assert!(top_m >= 1, "top_m must be at least 1");
    let mut hits = RetrievalHits::default();

    if !kw.low_level.is_empty() && !graph.entity_vectors.is_empty() {
        let query_vector = embed(backend, &kw.low_level.join(", "), ledger)?;
        hits.entity_hits = graph.entity_vectors.top_k(&query_vector, top_m);
    }
    if !kw.high_level.is_empty() && !graph.relation_vectors.is_empty() {
        let query_vector = embed(backend, &kw.high_level.join(", "), ledger)?;
        hits.relation_hits = graph.relation_vectors.top_k(&query_vector, top_m);
    }

    // Triples: one-hop relations of hit entities, then directly hit
    // relations; each relation appears once with its best score.
    let mut triple_keys: Vec<(String, f64)> = Vec::new();
    let mut push_triple = |key: String, score: f64| {
        if let Some(existing) = triple_keys.iter_mut().find(|(k, _)| *k == key) {
            if score > existing.1 {
                existing.1 = score;
            }
        } else {
            triple_keys.push((key, score));
        }
    };
    for (entity_key, score) in &hits.entity_hits {
        for relation in graph.one_hop(entity_key) {
            push_triple(relation.key(), *score);
        }
    }
    for (relation_key, score) in &hits.relation_hits {
        if graph.relations.contains_key(relation_key) {
            push_triple(relation_key.clone(), *score);
        }
    }
    triple_keys.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    for (key, score) in &triple_keys {
        let relation = &graph.relations[key];
        hits.triples.push(ScoredTriple {
            subject: relation.source.clone(),
            predicate: relation.description.clone(),
            object: relation.target.clone(),
            score: *score,
        });
    }

    // Source chunks from the kv index of every hit, first appearance wins.
    let mut seen_chunks = Vec::new();
    let hit_keys = hits
        .entity_hits
        .iter()
        .chain(hits.relation_hits.iter())
        .map(|(k, _)| k.clone())
        .collect::<Vec<_>>();
    for key in hit_keys {
        if let Some(kv) = graph.kv_index.get(&key) {
            for chunk_id in &kv.chunk_ids {
                if !seen_chunks.contains(chunk_id) {
                    seen_chunks.push(chunk_id.clone());
                    if let Some(chunk) = graph.chunk_store.get(chunk_id) {
                        hits.source_chunks.push(chunk.text.clone());
                    }
                }
            }
        }
    }
    Ok(hits)
}

fn words(text: &str) -> usize {
    text.split_whitespace().count()
}

fn triple_line(t: &ScoredTriple) -> String {
    format!("({} | {} | {})", t.subject, t.predicate, t.object)
}

/// Render hits into a knowledge unit within a word budget.
///
/// All triples are kept if they fit; source chunks fill the remainder.
/// Over budget, the lowest-scored source chunks drop first, then the
/// lowest-scored triples.
pub fn assemble_knowledge_unit(hits: &RetrievalHits, budget: usize) -> KnowledgeUnit {
    assert!(budget >= 1, "budget must be at least 1");

    let mut kept_triples = 0usize;
    let mut used = 0usize;
    {
        let mut tally = words(TRIPLES_HEADER);
        for t in &hits.triples {
            let line_words = words(&triple_line(t));
            if tally + line_words > budget {
                break;
            }
            tally += line_words;
            kept_triples += 1;
        }
        if kept_triples > 0 {
            used = tally;
        }
    }

    // Chunks may only appear once every triple fits: over budget, the
    // lowest-scored chunks drop first, then the lowest-scored triples.
    let mut kept_chunks = 0usize;
    if kept_triples == hits.triples.len() && !hits.source_chunks.is_empty() {
        let mut tally = used + words(SOURCES_HEADER);
        for chunk in &hits.source_chunks {
            let chunk_words = words(chunk);
            if tally + chunk_words > budget {
                break;
            }
            tally += chunk_words;
            kept_chunks += 1;
        }
    }

    let triples: Vec<ScoredTriple> = hits.triples[..kept_triples].to_vec();
    let source_texts: Vec<String> = hits.source_chunks[..kept_chunks].to_vec();

    let mut serialized = String::new();
    if triples.is_empty() && source_texts.is_empty() {
        serialized.push_str(EMPTY_KU_MARKER);
    } else {
        if !triples.is_empty() {
            serialized.push_str(TRIPLES_HEADER);
            for t in &triples {
                serialized.push('\n');
                serialized.push_str(&triple_line(t));
            }
        }
        if !source_texts.is_empty() {
            if !triples.is_empty() {
                serialized.push('\n');
            }
            serialized.push_str(SOURCES_HEADER);
            for text in &source_texts {
                serialized.push('\n');
                serialized.push_str(text);
            }
        }
    }

    let budget_used = words(&serialized);
    KnowledgeUnit {
        key: String::new(),
        triples,
        source_texts,
        serialized,
        budget_used,
    }
}

/// The full retrieval event: keyword extraction, dual retrieval, assembly.
/// Counts as one retrieval on the ledger.
pub fn retrieve_knowledge_unit(
    query: &QueryComposition,
    graph: &KnowledgeGraph,
    backend: &dyn LlmBackend,
    ledger: &CallLedger,
    top_m: usize,
    budget: usize,
) -> Result<KnowledgeUnit, GatewayError> {
    ledger.record_retrieval();
    let keywords = extract_keywords(query, backend, ledger);
    let hits = dual_retrieve(&keywords, graph, backend, ledger, top_m)?;
    Ok(assemble_knowledge_unit(&hits, budget))
}
