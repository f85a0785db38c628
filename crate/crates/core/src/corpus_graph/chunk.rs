//! Word-count document chunking.
//!
//! A document of `N` whitespace-delimited words splits into `ceil(N / c_len)`
//! chunks; every chunk except possibly the last holds exactly `c_len` words.

use serde::{Deserialize, Serialize};

/// Default words-per-chunk.
pub const DEFAULT_CHUNK_LEN: usize = 1200;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    /// Stable id derived from the document id and chunk ordinal.
    pub id: String,
    pub doc_id: String,
    pub index: usize,
    pub text: String,
    pub word_count: usize,
}

pub fn chunk_id(doc_id: &str, index: usize) -> String {
    format!("{doc_id}#{index:05}")
}

/// Split a document into word-bounded chunks of at most `c_len` words.
/// An empty (or all-whitespace) document yields no chunks.
pub fn chunk_document(doc_id: &str, doc_text: &str, c_len: usize) -> Vec<Chunk> {
    chunk_document_with(doc_id, doc_text, c_len, |text| {
        text.split_whitespace().collect()
    })
}

/// Chunking with a custom tokenizer; the default counts whitespace words.
pub fn chunk_document_with(
    doc_id: &str,
    doc_text: &str,
    c_len: usize,
    tokenizer: impl Fn(&str) -> Vec<&str>,
) -> Vec<Chunk> {
    assert!(c_len >= 1, "c_len must be at least 1");
    let words = tokenizer(doc_text);
    words
        .chunks(c_len)
        .enumerate()
        .map(|(index, chunk_words)| Chunk {
            id: chunk_id(doc_id, index),
            doc_id: doc_id.to_string(),
            index,
            text: chunk_words.join(" "),
            word_count: chunk_words.len(),
        })
        .collect()
}
