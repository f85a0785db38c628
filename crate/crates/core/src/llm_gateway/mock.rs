//! Deterministic scripted backend for offline runs and tests.
//!
//! A [`MockScript`] is an ordered rule list: the first rule whose matcher
//! hits the prompt wins and its response is returned verbatim. Embeddings
//! are derived from a byte hash of the input text, so the same text always
//! maps to the same unit vector and distinct texts collide only with
//! negligible probability.

use super::{GatewayError, LlmBackend};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Default dimension of hash-derived mock embeddings.
pub const DEFAULT_EMBED_DIM: usize = 64;

/// How a rule is matched against the prompt text.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Matcher {
    /// Plain substring containment.
    Contains(String),
    /// Regular expression (compiled once at script load).
    Pattern(String),
}

/// One scripted rule: matcher plus the canned response.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptRule {
    #[serde(flatten)]
    pub matcher: Matcher,
    pub response: String,
}

/// Serialized form of a mock script (the `--mock` file format).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MockScript {
    #[serde(default)]
    pub rules: Vec<ScriptRule>,
    #[serde(default = "default_dim")]
    pub embed_dim: usize,
}

fn default_dim() -> usize {
    DEFAULT_EMBED_DIM
}

impl MockScript {
    pub fn new(rules: Vec<ScriptRule>, embed_dim: usize) -> Self {
        Self { rules, embed_dim }
    }

    /// Convenience constructor from `(substring, response)` pairs.
    pub fn from_pairs<S: Into<String>, R: Into<String>>(pairs: Vec<(S, R)>) -> Self {
        let rules = pairs
            .into_iter()
            .map(|(m, r)| ScriptRule {
                matcher: Matcher::Contains(m.into()),
                response: r.into(),
            })
            .collect();
        Self::new(rules, DEFAULT_EMBED_DIM)
    }

    pub fn from_json(json: &str) -> Result<Self, GatewayError> {
        serde_json::from_str(json).map_err(|e| GatewayError::Script(e.to_string()))
    }
}

enum CompiledMatcher {
    Contains(String),
    Pattern(Regex),
}

struct CompiledRule {
    matcher: CompiledMatcher,
    response: String,
}

/// Scripted backend. Read-only after construction and therefore safe to
/// share across threads.
pub struct MockBackend {
    rules: Vec<CompiledRule>,
    embed_dim: usize,
}

impl MockBackend {
    pub fn new(script: MockScript) -> Result<Self, GatewayError> {
        if script.embed_dim == 0 {
            return Err(GatewayError::Script("embed_dim must be at least 1".into()));
        }
        let mut rules = Vec::with_capacity(script.rules.len());
        for rule in script.rules {
            let matcher = match rule.matcher {
                Matcher::Contains(s) => CompiledMatcher::Contains(s),
                Matcher::Pattern(p) => CompiledMatcher::Pattern(
                    Regex::new(&p).map_err(|e| GatewayError::Script(e.to_string()))?,
                ),
            };
            rules.push(CompiledRule {
                matcher,
                response: rule.response,
            });
        }
        Ok(Self {
            rules,
            embed_dim: script.embed_dim,
        })
    }

    /// Shortcut used throughout the tests: substring rules, default dim.
    pub fn from_pairs<S: Into<String>, R: Into<String>>(pairs: Vec<(S, R)>) -> Self {
        Self::new(MockScript::from_pairs(pairs)).expect("substring rules always compile")
    }
}

impl LlmBackend for MockBackend {
    fn complete_raw(&self, prompt: &str) -> Result<String, GatewayError> {
        for rule in &self.rules {
            let hit = match &rule.matcher {
                CompiledMatcher::Contains(s) => prompt.contains(s.as_str()),
                CompiledMatcher::Pattern(re) => re.is_match(prompt),
            };
            if hit {
                return Ok(rule.response.clone());
            }
        }
        Err(GatewayError::NoScriptMatch {
            prompt_head: prompt.chars().take(120).collect(),
        })
    }

    fn embed_raw(&self, text: &str) -> Result<Vec<f32>, GatewayError> {
        Ok(hash_embedding(text, self.embed_dim))
    }

    fn embed_dim(&self) -> usize {
        self.embed_dim
    }
}

/// Deterministic pseudo-random unit vector seeded by a SHA-256 of the text.
pub fn hash_embedding(text: &str, dim: usize) -> Vec<f32> {
    let digest = Sha256::digest(text.as_bytes());
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    let mut rng = ChaCha12Rng::from_seed(seed);
    let mut v: Vec<f32> = (0..dim)
        .map(|_| {
            let x: f64 = StandardNormal.sample(&mut rng);
            x as f32
        })
        .collect();
    let norm = v.iter().map(|x| (*x as f64) * (*x as f64)).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in &mut v {
            *x = (*x as f64 / norm) as f32;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_matching_rule_wins() {
        let backend = MockBackend::from_pairs(vec![("ping", "pong"), ("ping", "late")]);
        assert_eq!(backend.complete_raw("say ping now").unwrap(), "pong");
    }

    #[test]
    fn unmatched_prompt_is_no_script_match() {
        let backend = MockBackend::from_pairs(vec![("ping", "pong")]);
        let err = backend.complete_raw("other").unwrap_err();
        assert!(matches!(err, GatewayError::NoScriptMatch { .. }));
    }

    #[test]
    fn pattern_rules_match_across_lines() {
        let script = MockScript::new(
            vec![ScriptRule {
                matcher: Matcher::Pattern("(?s)alpha.*omega".into()),
                response: "matched".into(),
            }],
            16,
        );
        let backend = MockBackend::new(script).unwrap();
        assert_eq!(backend.complete_raw("alpha\nmiddle\nomega").unwrap(), "matched");
    }

    #[test]
    fn embeddings_are_deterministic_unit_vectors() {
        let backend = MockBackend::from_pairs::<&str, &str>(vec![]);
        let a = backend.embed_raw("alpha").unwrap();
        let b = backend.embed_raw("alpha").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), DEFAULT_EMBED_DIM);
        let norm: f64 = a.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-5);
    }

    #[test]
    fn distinct_texts_embed_differently() {
        // Checked by evaluating the hash mock on both strings.
        let a = hash_embedding("alpha", DEFAULT_EMBED_DIM);
        let b = hash_embedding("beta", DEFAULT_EMBED_DIM);
        assert_ne!(a, b);
    }

    #[test]
    fn script_json_roundtrip() {
        let json = r#"{
            "rules": [
                {"contains": "ping", "response": "pong"},
                {"pattern": "^exact$", "response": "hit"}
            ],
            "embed_dim": 32
        }"#;
        let script = MockScript::from_json(json).unwrap();
        assert_eq!(script.rules.len(), 2);
        assert_eq!(script.embed_dim, 32);
        let backend = MockBackend::new(script).unwrap();
        assert_eq!(backend.complete_raw("exact").unwrap(), "hit");
        assert_eq!(backend.embed_dim(), 32);
    }
}
