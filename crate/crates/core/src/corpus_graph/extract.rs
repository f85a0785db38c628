//! Entity/relation extraction: the graph-construct prompt and a total
//! parser for the structured record list the model returns.
//!
//! Record format, one record per line:
//!
//! ```text
//! ("entity" | <name> | <type> | <description>)
//! ("relationship" | <source> | <target> | <description> | <kw1, kw2, ...>)
//! ```
//!
//! Malformed lines never abort a build; they are skipped and counted.

use super::template::{PromptTemplate, TemplateError};
use super::{normalize_name, Chunk, Entity, Relation};
use std::collections::BTreeMap;
use std::collections::BTreeSet;

/// Field separator inside a record.
pub const RECORD_DELIMITER: &str = "|";

const EXTRACTION_TEMPLATE_BODY: &str = "### Task: knowledge extraction

From the text below, identify the entities (people, places, organizations, \
dates, events, concepts) with a short description of each, then the \
relationships between those entities, then high-level thematic keywords for \
each relationship.

Output rules:
- One record per line, wrapped in parentheses, fields separated by \" | \".
- Entity record: (\"entity\" | <name> | <type> | <description>)
- Relationship record: (\"relationship\" | <source entity> | <target entity> | <description> | <comma-separated keywords>)
- Output only records, no commentary or summaries.

Text:
{chunk_text}
";

/// The graph-construct prompt template.
pub fn extraction_template() -> PromptTemplate {
    PromptTemplate::new("graph_construct", EXTRACTION_TEMPLATE_BODY, &["chunk_text"])
}

/// Fill the extraction template with one chunk's text.
pub fn render_extraction_prompt(chunk: &Chunk, template: &PromptTemplate) -> Result<String, TemplateError> {
    let mut bindings = BTreeMap::new();
    bindings.insert("chunk_text", chunk.text.clone());
    template.render(&bindings)
}

/// Parsed output of one extraction response.
#[derive(Debug, Default)]
pub struct ExtractionRecords {
    pub entities: Vec<Entity>,
    pub relations: Vec<Relation>,
    /// Number of non-blank lines that were not well-formed records.
    pub warnings: usize,
}

/// Parse an extraction response. The parser is total: well-formed records
/// are collected, everything else increments `warnings`.
pub fn parse_extraction_records(llm_output: &str, chunk_id: &str) -> ExtractionRecords {
    let mut records = ExtractionRecords::default();
    for line in llm_output.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match parse_record_line(line, chunk_id) {
            Some(ParsedRecord::Entity(e)) => records.entities.push(e),
            Some(ParsedRecord::Relation(r)) => records.relations.push(r),
            None => records.warnings += 1,
        }
    }
    records
}

enum ParsedRecord {
    Entity(Entity),
    Relation(Relation),
}

fn parse_record_line(line: &str, chunk_id: &str) -> Option<ParsedRecord> {
    let inner = line.strip_prefix('(')?.strip_suffix(')')?;
    let fields: Vec<&str> = inner.split(RECORD_DELIMITER).map(str::trim).collect();
    let kind = fields.first()?.trim_matches('"').to_ascii_lowercase();
    let mut chunk_ids = BTreeSet::new();
    chunk_ids.insert(chunk_id.to_string());
    match (kind.as_str(), fields.len()) {
        ("entity", 4) => {
            let name = normalize_name(fields[1]);
            if name.is_empty() {
                return None;
            }
            Some(ParsedRecord::Entity(Entity {
                name,
                entity_type: fields[2].to_string(),
                description: fields[3].to_string(),
                source_chunk_ids: chunk_ids,
            }))
        }
        ("relationship", 5) => {
            let source = normalize_name(fields[1]);
            let target = normalize_name(fields[2]);
            if source.is_empty() || target.is_empty() {
                return None;
            }
            let keywords: Vec<String> = fields[4]
                .split(',')
                .map(|k| k.trim().to_string())
                .filter(|k| !k.is_empty())
                .collect();
            Some(ParsedRecord::Relation(Relation {
                source,
                target,
                description: fields[3].to_string(),
                keywords,
                source_chunk_ids: chunk_ids,
            }))
        }
        _ => None,
    }
}
