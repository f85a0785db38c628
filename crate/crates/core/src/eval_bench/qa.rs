//! Token-level F1 and exact-match scoring for QA answers.
//!
//! Normalization: case-fold, strip ASCII punctuation, drop the articles
//! a/an/the, collapse whitespace. EM is 1 iff the normalized prediction
//! equals any normalized gold; F1 is the maximum token-multiset F1 over the
//! golds.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QaScore {
    pub f1: f64,
    pub em: u8,
}

/// Standard QA answer normalization.
pub fn normalize_answer(text: &str) -> String {
    let lowered = text.to_lowercase();
    let no_punct: String = lowered
        .chars()
        .filter(|c| !c.is_ascii_punctuation())
        .collect();
    no_punct
        .split_whitespace()
        .filter(|w| !matches!(*w, "a" | "an" | "the"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn token_counts(text: &str) -> HashMap<&str, usize> {
    let mut counts = HashMap::new();
    for token in text.split_whitespace() {
        *counts.entry(token).or_insert(0) += 1;
    }
    counts
}

/// Token-multiset F1 between two already-normalized strings. When both are
/// empty the answers agree and score 1; when only one is empty they score 0.
fn token_f1(prediction: &str, gold: &str) -> f64 {
    let pred = token_counts(prediction);
    let gold_counts = token_counts(gold);
    let pred_total: usize = pred.values().sum();
    let gold_total: usize = gold_counts.values().sum();
    if pred_total == 0 || gold_total == 0 {
        return if pred_total == gold_total { 1.0 } else { 0.0 };
    }
    let overlap: usize = pred
        .iter()
        .map(|(token, count)| count.min(gold_counts.get(token).unwrap_or(&0)))
        .sum();
    if overlap == 0 {
        return 0.0;
    }
    let precision = overlap as f64 / pred_total as f64;
    let recall = overlap as f64 / gold_total as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Score a prediction against one or more gold answers.
pub fn score_qa(prediction: &str, golds: &[String]) -> QaScore {
    assert!(!golds.is_empty(), "golds must be non-empty");
    let pred_norm = normalize_answer(prediction);
    let mut best_f1 = 0.0f64;
    let mut em = 0u8;
    for gold in golds {
        let gold_norm = normalize_answer(gold);
        if pred_norm == gold_norm {
            em = 1;
        }
        best_f1 = best_f1.max(token_f1(&pred_norm, &gold_norm));
    }
    QaScore { f1: best_f1, em }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golds(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identical_answer_scores_perfectly() {
        let score = score_qa("Paris", &golds(&["Paris"]));
        assert_eq!(score.em, 1);
        assert!((score.f1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_overlap_matches_hand_computed_f1() {
        // Prediction has 2 tokens, gold has 1, overlap 1:
        // precision 1/2, recall 1, F1 = 2 * (1/2) / (3/2) = 2/3.
        let score = score_qa("Paris France", &golds(&["Paris"]));
        assert_eq!(score.em, 0);
        assert!((score.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn article_removal_gives_exact_match() {
        let score = score_qa("the Eiffel Tower", &golds(&["Eiffel Tower"]));
        assert_eq!(score.em, 1);
        assert!((score.f1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn punctuation_and_case_are_ignored() {
        let score = score_qa("Eiffel Tower!", &golds(&["eiffel tower"]));
        assert_eq!(score.em, 1);
    }

    #[test]
    fn best_gold_wins() {
        let score = score_qa("Paris", &golds(&["London", "Paris", "Rome"]));
        assert_eq!(score.em, 1);
        assert!((score.f1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_match_implies_perfect_f1() {
        for (pred, gold) in [("a cat", "cat"), ("The  Answer", "answer"), ("x, y", "x y")] {
            let score = score_qa(pred, &golds(&[gold]));
            if score.em == 1 {
                assert!((score.f1 - 1.0).abs() < 1e-12, "{pred} vs {gold}");
            }
        }
    }

    #[test]
    fn no_overlap_scores_zero() {
        let score = score_qa("cats", &golds(&["dogs"]));
        assert_eq!(score.em, 0);
        assert_eq!(score.f1, 0.0);
    }

    #[test]
    fn f1_is_symmetric_for_single_gold() {
        let a = score_qa("red green blue", &golds(&["green blue yellow"]));
        let b = score_qa("green blue yellow", &golds(&["red green blue"]));
        assert!((a.f1 - b.f1).abs() < 1e-12);
    }

    #[test]
    fn repeated_tokens_count_as_a_multiset() {
        // Overlap of "b b" with "b" is 1, not 2.
        let score = score_qa("b b", &golds(&["b"]));
        // precision 1/2, recall 1 -> 2/3
        assert!((score.f1 - 2.0 / 3.0).abs() < 1e-12);
    }
}
