//! Matrix-of-Thought reasoning engine.
//!
//! The pipeline: documents are chunked and distilled into a deduplicated
//! knowledge graph ([`corpus_graph`]); queries pull knowledge units (graph
//! triples plus original text) through dual keyword retrieval
//! ([`retrieval`]); the engine answers by filling an m×n matrix of thought
//! nodes under a column-cell communication regime, summarizing each column
//! against freshly retrieved knowledge ([`thought_matrix`]). Every LLM and
//! retrieval event is accounted on a ledger ([`llm_gateway`]), and
//! [`eval_bench`] provides deterministic evaluation: a 24-game verifier with
//! a brute-force solver oracle, token-level F1/EM scoring, and a pairwise
//! judge protocol.

pub mod corpus_graph;
pub mod eval_bench;
pub mod llm_gateway;
pub mod retrieval;
pub mod thought_matrix;

pub use corpus_graph::{
    build_graph, chunk_document, dedup, merge_subgraph, Chunk, Entity, KnowledgeGraph,
    PromptTemplate, Relation,
};
pub use eval_bench::{
    pairwise_judge, run_game24_benchmark, run_qa_benchmark, score_qa, solve_24, verify_24,
    Game24Problem, Game24Verdict, JudgeRecord, QaScore,
};
pub use llm_gateway::{
    complete, embed, BackendDescriptor, CallLedger, GatewayError, HttpBackend, LedgerSnapshot,
    LlmBackend, MockBackend, MockScript,
};
pub use retrieval::{
    assemble_knowledge_unit, dual_retrieve, extract_keywords, retrieve_knowledge_unit, Keywords,
    KnowledgeUnit, QueryComposition, RetrievalHits,
};
pub use thought_matrix::{
    build_weight_matrix, communication_slice, predict_call_counts, run_matrix, CallStructure,
    MatrixConfig, MotResult, ThoughtNode, WeightMatrix, WeightScheme,
};
