//! Call accounting shared by every backend.
//!
//! The ledger counts three event classes: text completions (`llm_calls`),
//! knowledge-unit retrievals (`retrieval_calls`), and embeddings
//! (`embed_calls`). Completions are additionally tagged with a phase name so
//! reasoning-time calls can be separated from ingestion-time and
//! retrieval-internal calls when comparing against the cost model.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Mutex;

/// Phase tag for knowledge-graph extraction completions (ingestion time).
pub const PHASE_GRAPH_EXTRACT: &str = "graph.extract";
/// Phase tag for query keyword-extraction completions (retrieval-internal).
pub const PHASE_KEYWORDS: &str = "retrieval.keywords";
/// Phase tag for thought-node completions.
pub const PHASE_THOUGHT: &str = "reason.thought";
/// Phase tag for column-summary completions.
pub const PHASE_SUMMARY: &str = "reason.summary";
/// Phase tag for pairwise-judge completions.
pub const PHASE_JUDGE: &str = "bench.judge";

/// Phases whose completions are reasoning-LLM calls in the cost model.
///
/// Keyword extraction also goes through the completion channel, but its cost
/// is part of a retrieval event, so it is excluded here and isolated under
/// its own phase tag instead.
pub const REASONING_PHASES: [&str; 2] = [PHASE_THOUGHT, PHASE_SUMMARY];

#[derive(Debug, Default)]
struct LedgerInner {
    llm_calls: u64,
    retrieval_calls: u64,
    embed_calls: u64,
    per_phase: BTreeMap<String, u64>,
}

/// Thread-safe call counter. Increments are atomic with respect to
/// concurrent callers; counts never decrease within a run.
#[derive(Debug, Default)]
pub struct CallLedger {
    inner: Mutex<LedgerInner>,
}

impl CallLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record one successful completion under the given phase.
    pub fn record_completion(&self, phase: &str) {
        let mut inner = self.inner.lock().expect("ledger poisoned");
        inner.llm_calls += 1;
        *inner.per_phase.entry(phase.to_string()).or_insert(0) += 1;
    }

    /// Record one knowledge-unit retrieval event.
    pub fn record_retrieval(&self) {
        self.inner.lock().expect("ledger poisoned").retrieval_calls += 1;
    }

    /// Record one embedding call.
    pub fn record_embed(&self) {
        self.inner.lock().expect("ledger poisoned").embed_calls += 1;
    }

    pub fn llm_calls(&self) -> u64 {
        self.inner.lock().expect("ledger poisoned").llm_calls
    }

    pub fn retrieval_calls(&self) -> u64 {
        self.inner.lock().expect("ledger poisoned").retrieval_calls
    }

    pub fn embed_calls(&self) -> u64 {
        self.inner.lock().expect("ledger poisoned").embed_calls
    }

    /// Completions recorded under one phase.
    pub fn phase_count(&self, phase: &str) -> u64 {
        self.inner
            .lock()
            .expect("ledger poisoned")
            .per_phase
            .get(phase)
            .copied()
            .unwrap_or(0)
    }

    /// Completions whose cost the model books as reasoning-LLM calls
    /// (thought nodes and column summaries).
    pub fn reasoning_llm_calls(&self) -> u64 {
        let inner = self.inner.lock().expect("ledger poisoned");
        REASONING_PHASES
            .iter()
            .map(|p| inner.per_phase.get(*p).copied().unwrap_or(0))
            .sum()
    }

    /// Immutable copy of the current counts.
    pub fn snapshot(&self) -> LedgerSnapshot {
        let inner = self.inner.lock().expect("ledger poisoned");
        let reasoning = REASONING_PHASES
            .iter()
            .map(|p| inner.per_phase.get(*p).copied().unwrap_or(0))
            .sum();
        LedgerSnapshot {
            llm_calls: inner.llm_calls,
            reasoning_llm_calls: reasoning,
            retrieval_calls: inner.retrieval_calls,
            embed_calls: inner.embed_calls,
            per_phase: inner.per_phase.clone(),
        }
    }
}

/// Point-in-time copy of ledger counts, serialized into run traces and
/// reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerSnapshot {
    /// Every successful completion, all phases.
    pub llm_calls: u64,
    /// Completions under the reasoning phases only (the `k`-cost events).
    pub reasoning_llm_calls: u64,
    /// Knowledge-unit retrieval events (the `r`-cost events).
    pub retrieval_calls: u64,
    pub embed_calls: u64,
    pub per_phase: BTreeMap<String, u64>,
}

impl LedgerSnapshot {
    /// Count delta relative to an earlier snapshot of the same ledger.
    pub fn delta_from(&self, earlier: &LedgerSnapshot) -> LedgerSnapshot {
        let mut per_phase = BTreeMap::new();
        for (phase, count) in &self.per_phase {
            let before = earlier.per_phase.get(phase).copied().unwrap_or(0);
            if count - before > 0 {
                per_phase.insert(phase.clone(), count - before);
            }
        }
        LedgerSnapshot {
            llm_calls: self.llm_calls - earlier.llm_calls,
            reasoning_llm_calls: self.reasoning_llm_calls - earlier.reasoning_llm_calls,
            retrieval_calls: self.retrieval_calls - earlier.retrieval_calls,
            embed_calls: self.embed_calls - earlier.embed_calls,
            per_phase,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn completions_count_total_and_phase() {
        let ledger = CallLedger::new();
        ledger.record_completion(PHASE_THOUGHT);
        ledger.record_completion(PHASE_THOUGHT);
        ledger.record_completion(PHASE_KEYWORDS);
        assert_eq!(ledger.llm_calls(), 3);
        assert_eq!(ledger.phase_count(PHASE_THOUGHT), 2);
        assert_eq!(ledger.phase_count(PHASE_KEYWORDS), 1);
        assert_eq!(ledger.reasoning_llm_calls(), 2);
    }

    #[test]
    fn total_is_sum_of_phases() {
        let ledger = CallLedger::new();
        for phase in [PHASE_GRAPH_EXTRACT, PHASE_THOUGHT, PHASE_SUMMARY, PHASE_JUDGE] {
            ledger.record_completion(phase);
            ledger.record_completion(phase);
        }
        let snap = ledger.snapshot();
        let phase_sum: u64 = snap.per_phase.values().sum();
        assert_eq!(snap.llm_calls, phase_sum);
        // No phase count exceeds the total.
        assert!(snap.per_phase.values().all(|&c| c <= snap.llm_calls));
    }

    #[test]
    fn concurrent_increments_do_not_lose_counts() {
        use std::sync::Arc;
        let ledger = Arc::new(CallLedger::new());
        let mut handles = Vec::new();
        for _ in 0..8 {
            let ledger = Arc::clone(&ledger);
            handles.push(std::thread::spawn(move || {
                for _ in 0..100 {
                    ledger.record_completion(PHASE_THOUGHT);
                    ledger.record_retrieval();
                    ledger.record_embed();
                }
            }));
        }
        for h in handles {
            h.join().unwrap();
        }
        assert_eq!(ledger.llm_calls(), 800);
        assert_eq!(ledger.retrieval_calls(), 800);
        assert_eq!(ledger.embed_calls(), 800);
    }

    #[test]
    fn snapshot_delta_subtracts_counts() {
        let ledger = CallLedger::new();
        ledger.record_completion(PHASE_THOUGHT);
        let before = ledger.snapshot();
        ledger.record_completion(PHASE_SUMMARY);
        ledger.record_retrieval();
        let delta = ledger.snapshot().delta_from(&before);
        assert_eq!(delta.llm_calls, 1);
        assert_eq!(delta.retrieval_calls, 1);
        assert_eq!(delta.per_phase.get(PHASE_SUMMARY), Some(&1));
        assert_eq!(delta.per_phase.get(PHASE_THOUGHT), None);
    }
}
