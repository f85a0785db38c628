//! Knowledge-graph construction from a document corpus.
//!
//! Documents are chunked, each chunk goes through one LLM extraction call,
//! the pooled records are deduplicated, and the result is a graph of unique
//! entities and relations with a key-value source index (key → description +
//! source chunk ids), vector indexes over entity and relation keys, and a
//! chunk store holding the original text. Graphs merge by union, so a corpus
//! can be ingested incrementally.

pub mod chunk;
pub mod extract;
pub mod persist;
pub mod template;
pub mod vector;

pub use chunk::{chunk_document, chunk_document_with, Chunk, DEFAULT_CHUNK_LEN};
pub use extract::{
    extraction_template, parse_extraction_records, render_extraction_prompt, ExtractionRecords,
};
pub use template::{PromptTemplate, TemplateError};
pub use vector::{cosine_similarity, VectorIndex};

use crate::llm_gateway::{complete, embed, CallLedger, GatewayError, LlmBackend, PHASE_GRAPH_EXTRACT};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use thiserror::Error;

/// Byte budget for merged entity descriptions; concatenation truncates here.
pub const DESCRIPTION_BYTE_BUDGET: usize = 4096;

const DESCRIPTION_SEPARATOR: &str = "; ";

#[derive(Debug, Error)]
pub enum GraphError {
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("chunk id {chunk_id:?} already ingested with different text")]
    IngestConflict { chunk_id: String },
    #[error("graph not found at {path}")]
    NotFound { path: PathBuf },
    #[error("unsupported graph format {found:?} (expected {expected:?})")]
    VersionError { found: String, expected: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Serde(#[from] serde_json::Error),
}

/// A deduplicated entity node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    /// Normalized name; unique within a graph after dedup.
    pub name: String,
    pub entity_type: String,
    pub description: String,
    pub source_chunk_ids: BTreeSet<String>,
}

/// A deduplicated relation edge between two entities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub source: String,
    pub target: String,
    pub description: String,
    pub keywords: Vec<String>,
    pub source_chunk_ids: BTreeSet<String>,
}

impl Relation {
    /// Stable key: endpoints plus normalized description.
    pub fn key(&self) -> String {
        relation_key(&self.source, &self.target, &self.description)
    }

    /// The knowledge-graph triple view `(source, predicate, target)`.
    pub fn triple(&self) -> (String, String, String) {
        (self.source.clone(), self.description.clone(), self.target.clone())
    }
}

pub fn relation_key(source: &str, target: &str, description: &str) -> String {
    format!("{source}|{target}|{}", normalize_name(description))
}

/// Key-value source index entry: the description text plus the chunks it
/// came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KvEntry {
    pub description: String,
    pub chunk_ids: BTreeSet<String>,
}

/// The persistent knowledge graph.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeGraph {
    pub entities: BTreeMap<String, Entity>,
    pub relations: BTreeMap<String, Relation>,
    pub kv_index: BTreeMap<String, KvEntry>,
    pub entity_vectors: VectorIndex,
    pub relation_vectors: VectorIndex,
    pub chunk_store: BTreeMap<String, Chunk>,
}

/// Trim, case-fold, and collapse inner whitespace so duplicate mentions
/// land on one key.
pub fn normalize_name(raw: &str) -> String {
    raw.split_whitespace()
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

fn merge_entity(into: &mut Entity, from: Entity) {
    if (into.entity_type.is_empty() || into.entity_type == "unknown")
        && !from.entity_type.is_empty()
    {
        into.entity_type = from.entity_type;
    }
    if !from.description.is_empty()
        && !into
            .description
            .split(DESCRIPTION_SEPARATOR)
            .any(|seg| seg == from.description)
    {
        if into.description.is_empty() {
            into.description = from.description;
        } else {
            into.description.push_str(DESCRIPTION_SEPARATOR);
            into.description.push_str(&from.description);
        }
        truncate_to_byte_budget(&mut into.description, DESCRIPTION_BYTE_BUDGET);
    }
    into.source_chunk_ids.extend(from.source_chunk_ids);
}

fn merge_relation(into: &mut Relation, from: Relation) {
    for kw in from.keywords {
        if !into.keywords.contains(&kw) {
            into.keywords.push(kw);
        }
    }
    into.source_chunk_ids.extend(from.source_chunk_ids);
}

fn truncate_to_byte_budget(text: &mut String, budget: usize) {
    if text.len() <= budget {
        return;
    }
    let mut cut = budget;
    while cut > 0 && !text.is_char_boundary(cut) {
        cut -= 1;
    }
    text.truncate(cut);
}

/// De-redundancy over pooled extraction records: entities merge on
/// normalized name, relations on `(source, target, normalized description)`.
pub fn dedup(entities: Vec<Entity>, relations: Vec<Relation>) -> (Vec<Entity>, Vec<Relation>) {
    let mut entity_map: BTreeMap<String, Entity> = BTreeMap::new();
    for e in entities {
        match entity_map.get_mut(&e.name) {
            Some(existing) => merge_entity(existing, e),
            None => {
                entity_map.insert(e.name.clone(), e);
            }
        }
    }
    let mut relation_map: BTreeMap<String, Relation> = BTreeMap::new();
    for r in relations {
        match relation_map.get_mut(&r.key()) {
            Some(existing) => merge_relation(existing, r),
            None => {
                relation_map.insert(r.key(), r);
            }
        }
    }
    (
        entity_map.into_values().collect(),
        relation_map.into_values().collect(),
    )
}

/// Result of [`build_graph`]: the graph plus how many extraction lines were
/// skipped as malformed.
#[derive(Debug)]
pub struct GraphBuild {
    pub graph: KnowledgeGraph,
    pub parse_warnings: usize,
}

/// Build a graph from chunks: one extraction call per chunk, one dedup pass
/// over the pooled records, then index construction.
pub fn build_graph(
    chunks: &[Chunk],
    backend: &dyn LlmBackend,
    ledger: &CallLedger,
) -> Result<GraphBuild, GraphError> {
    let template = extraction_template();
    let mut pooled_entities = Vec::new();
    let mut pooled_relations = Vec::new();
    let mut parse_warnings = 0;

    for chunk in chunks {
        let prompt = render_extraction_prompt(chunk, &template)?;
        let response = complete(backend, &prompt, ledger, PHASE_GRAPH_EXTRACT)?;
        let records = parse_extraction_records(&response, &chunk.id);
        pooled_entities.extend(records.entities);
        pooled_relations.extend(records.relations);
        parse_warnings += records.warnings;
    }

    let (entities, relations) = dedup(pooled_entities, pooled_relations);
    let mut graph = KnowledgeGraph::default();
    for chunk in chunks {
        graph.chunk_store.insert(chunk.id.clone(), chunk.clone());
    }
    for e in entities {
        graph.entities.insert(e.name.clone(), e);
    }
    for r in relations {
        graph.relations.insert(r.key(), r);
    }
    graph.insert_missing_endpoints();
    graph.rebuild_kv_index();
    graph.rebuild_vector_indexes(backend, ledger)?;
    Ok(GraphBuild {
        graph,
        parse_warnings,
    })
}

/// Union-merge of two graphs: entity name sets union (collisions merge as in
/// dedup), relations union by key, chunk stores union by id.
pub fn merge_subgraph(
    graph: &KnowledgeGraph,
    incoming: &KnowledgeGraph,
) -> Result<KnowledgeGraph, GraphError> {
    let mut merged = graph.clone();
    for (id, chunk) in &incoming.chunk_store {
        match merged.chunk_store.get(id) {
            Some(existing) if existing.text != chunk.text => {
                return Err(GraphError::IngestConflict { chunk_id: id.clone() })
            }
            Some(_) => {}
            None => {
                merged.chunk_store.insert(id.clone(), chunk.clone());
            }
        }
    }
    for entity in incoming.entities.values() {
        match merged.entities.get_mut(&entity.name) {
            Some(existing) => merge_entity(existing, entity.clone()),
            None => {
                merged.entities.insert(entity.name.clone(), entity.clone());
            }
        }
    }
    for relation in incoming.relations.values() {
        match merged.relations.get_mut(&relation.key()) {
            Some(existing) => merge_relation(existing, relation.clone()),
            None => {
                merged.relations.insert(relation.key(), relation.clone());
            }
        }
    }
    merged.insert_missing_endpoints();
    merged.rebuild_kv_index();
    // Vectors carry over; keys new to this graph take the incoming vector.
    for (key, v) in incoming.entity_vectors.iter() {
        if !merged.entity_vectors.contains_key(key) {
            merged.entity_vectors.insert(key.clone(), v.clone());
        }
    }
    for (key, v) in incoming.relation_vectors.iter() {
        if !merged.relation_vectors.contains_key(key) {
            merged.relation_vectors.insert(key.clone(), v.clone());
        }
    }
    Ok(merged)
}

impl KnowledgeGraph {
    pub fn is_empty(&self) -> bool {
        self.entities.is_empty() && self.relations.is_empty() && self.chunk_store.is_empty()
    }

    /// Relations touching the given entity key, in stable key order.
    pub fn one_hop(&self, entity_key: &str) -> Vec<&Relation> {
        self.relations
            .values()
            .filter(|r| r.source == entity_key || r.target == entity_key)
            .collect()
    }

    /// Relation endpoints referenced by records but never extracted as
    /// entities become placeholder nodes so every edge resolves.
    fn insert_missing_endpoints(&mut self) {
        let mut missing: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for relation in self.relations.values() {
            for endpoint in [&relation.source, &relation.target] {
                if !self.entities.contains_key(endpoint) {
                    missing
                        .entry(endpoint.clone())
                        .or_default()
                        .extend(relation.source_chunk_ids.iter().cloned());
                }
            }
        }
        for (name, chunk_ids) in missing {
            self.entities.insert(
                name.clone(),
                Entity {
                    name,
                    entity_type: "unknown".into(),
                    description: String::new(),
                    source_chunk_ids: chunk_ids,
                },
            );
        }
    }

    fn rebuild_kv_index(&mut self) {
        self.kv_index.clear();
        for (key, e) in &self.entities {
            self.kv_index.insert(
                key.clone(),
                KvEntry {
                    description: e.description.clone(),
                    chunk_ids: e.source_chunk_ids.clone(),
                },
            );
        }
        for (key, r) in &self.relations {
            self.kv_index.insert(
                key.clone(),
                KvEntry {
                    description: r.description.clone(),
                    chunk_ids: r.source_chunk_ids.clone(),
                },
            );
        }
    }

    fn rebuild_vector_indexes(
        &mut self,
        backend: &dyn LlmBackend,
        ledger: &CallLedger,
    ) -> Result<(), GraphError> {
        self.entity_vectors = VectorIndex::new();
        self.relation_vectors = VectorIndex::new();
        for (key, e) in &self.entities {
            let text = entity_embed_text(e);
            self.entity_vectors.insert(key.clone(), embed(backend, &text, ledger)?);
        }
        for (key, r) in &self.relations {
            let text = relation_embed_text(r);
            self.relation_vectors.insert(key.clone(), embed(backend, &text, ledger)?);
        }
        Ok(())
    }

    /// Check the structural invariants; returns the first violation found.
    pub fn validate(&self) -> Result<(), String> {
        for (key, e) in &self.entities {
            if *key != e.name {
                return Err(format!("entity key {key:?} does not match name {:?}", e.name));
            }
            if e.source_chunk_ids.is_empty() {
                return Err(format!("entity {key:?} has no source chunks"));
            }
        }
        for (key, r) in &self.relations {
            if !self.entities.contains_key(&r.source) || !self.entities.contains_key(&r.target) {
                return Err(format!("relation {key:?} has an unresolved endpoint"));
            }
        }
        for (key, kv) in &self.kv_index {
            if !self.entities.contains_key(key) && !self.relations.contains_key(key) {
                return Err(format!("kv key {key:?} resolves to no entity or relation"));
            }
            for chunk_id in &kv.chunk_ids {
                if !self.chunk_store.contains_key(chunk_id) {
                    return Err(format!("kv key {key:?} references missing chunk {chunk_id:?}"));
                }
            }
        }
        for key in self.entity_vectors.keys() {
            if !self.entities.contains_key(key) {
                return Err(format!("entity vector {key:?} has no entity"));
            }
        }
        for key in self.relation_vectors.keys() {
            if !self.relations.contains_key(key) {
                return Err(format!("relation vector {key:?} has no relation"));
            }
        }
        Ok(())
    }
}

/// Text embedded for an entity key.
pub fn entity_embed_text(e: &Entity) -> String {
    if e.description.is_empty() {
        e.name.clone()
    } else {
        format!("{}: {}", e.name, e.description)
    }
}

/// Text embedded for a relation key.
pub fn relation_embed_text(r: &Relation) -> String {
    let mut text = format!("{} {} {}", r.source, r.description, r.target);
    if !r.keywords.is_empty() {
        text.push(' ');
        text.push_str(&r.keywords.join(" "));
    }
    text
}
