//! Graph persistence: one directory of line-delimited JSON files plus a
//! version header.
//!
//! ```text
//! <dir>/VERSION         format header, single line
//! <dir>/entities.jsonl  one Entity per line
//! <dir>/relations.jsonl one Relation per line
//! <dir>/chunks.jsonl    one Chunk per line
//! <dir>/vectors.jsonl   {"kind", "key", "vector"} per line
//! ```
//!
//! The key-value index is derived from entities and relations, so it is
//! rebuilt on load rather than stored.

use super::{Chunk, Entity, GraphError, KnowledgeGraph, Relation};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Format header written to `VERSION`.
pub const FORMAT_VERSION: &str = "mot-graph-v1";

#[derive(Serialize, Deserialize)]
struct VectorRow {
    kind: VectorKind,
    key: String,
    vector: Vec<f32>,
}

#[derive(Serialize, Deserialize, PartialEq, Eq, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum VectorKind {
    Entity,
    Relation,
}

/// Write the graph to a directory, creating it if needed.
pub fn persist(graph: &KnowledgeGraph, dir: &Path) -> Result<(), GraphError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("VERSION"), format!("{FORMAT_VERSION}\n"))?;
    write_jsonl(&dir.join("entities.jsonl"), graph.entities.values())?;
    write_jsonl(&dir.join("relations.jsonl"), graph.relations.values())?;
    write_jsonl(&dir.join("chunks.jsonl"), graph.chunk_store.values())?;

    let mut vectors = BufWriter::new(fs::File::create(dir.join("vectors.jsonl"))?);
    for (key, vector) in graph.entity_vectors.iter() {
        let row = VectorRow {
            kind: VectorKind::Entity,
            key: key.clone(),
            vector: vector.clone(),
        };
        writeln!(vectors, "{}", serde_json::to_string(&row)?)?;
    }
    for (key, vector) in graph.relation_vectors.iter() {
        let row = VectorRow {
            kind: VectorKind::Relation,
            key: key.clone(),
            vector: vector.clone(),
        };
        writeln!(vectors, "{}", serde_json::to_string(&row)?)?;
    }
    vectors.flush()?;
    Ok(())
}

/// Load a graph previously written by [`persist`].
pub fn load(dir: &Path) -> Result<KnowledgeGraph, GraphError> {
    let version_path = dir.join("VERSION");
    if !version_path.exists() {
        return Err(GraphError::NotFound { path: dir.to_path_buf() });
    }
    let found = fs::read_to_string(&version_path)?.trim().to_string();
    if found != FORMAT_VERSION {
        return Err(GraphError::VersionError {
            found,
            expected: FORMAT_VERSION.to_string(),
        });
    }

    let mut graph = KnowledgeGraph::default();
    for entity in read_jsonl::<Entity>(&dir.join("entities.jsonl"))? {
        graph.entities.insert(entity.name.clone(), entity);
    }
    for relation in read_jsonl::<Relation>(&dir.join("relations.jsonl"))? {
        graph.relations.insert(relation.key(), relation);
    }
    for chunk in read_jsonl::<Chunk>(&dir.join("chunks.jsonl"))? {
        graph.chunk_store.insert(chunk.id.clone(), chunk);
    }
    for row in read_jsonl::<VectorRow>(&dir.join("vectors.jsonl"))? {
        match row.kind {
            VectorKind::Entity => graph.entity_vectors.insert(row.key, row.vector),
            VectorKind::Relation => graph.relation_vectors.insert(row.key, row.vector),
        }
    }
    graph.rebuild_kv_index();
    Ok(graph)
}

fn write_jsonl<'a, T: Serialize + 'a>(
    path: &Path,
    rows: impl Iterator<Item = &'a T>,
) -> Result<(), GraphError> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for row in rows {
        writeln!(out, "{}", serde_json::to_string(row)?)?;
    }
    out.flush()?;
    Ok(())
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, GraphError> {
    if !path.exists() {
        return Err(GraphError::NotFound { path: path.to_path_buf() });
    }
    let reader = BufReader::new(fs::File::open(path)?);
    let mut rows = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(serde_json::from_str(&line)?);
    }
    Ok(rows)
}
