//! Declarative TOML configuration with strict key checking.
//!
//! Every section is optional; an empty file yields the defaults (3×4 matrix,
//! Vert&Hor-0.1 weights, chunk length 1200, top-5 retrieval per level).
//! Unknown keys and out-of-range values are rejected with the offending
//! field path.

use mot_core::llm_gateway::{BackendDescriptor, DEFAULT_API_KEY_ENV};
use mot_core::retrieval::{DEFAULT_KU_BUDGET, DEFAULT_TOP_M};
use mot_core::thought_matrix::{MatrixConfig, SchemeKind, WeightScheme};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file not found: {0}")]
    NotFound(PathBuf),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("invalid config field {field}: {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub backend: BackendSection,
    pub matrix: MatrixSection,
    pub retrieval: RetrievalSection,
    pub chunking: ChunkingSection,
    pub paths: PathsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackendSection {
    pub endpoint: String,
    pub model_id: String,
    pub temperature: f64,
    pub max_retries: u32,
    pub timeout_secs: f64,
    pub api_key_env: String,
    pub embed_model: Option<String>,
}

impl Default for BackendSection {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            model_id: "gpt-4o-mini".into(),
            temperature: 0.0,
            max_retries: 2,
            timeout_secs: 30.0,
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            embed_model: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatrixSection {
    pub rows: usize,
    pub cols: usize,
    pub scheme: SchemeKind,
    pub base: f64,
    pub step: f64,
    pub seed: u64,
}

impl Default for MatrixSection {
    fn default() -> Self {
        Self {
            rows: 3,
            cols: 4,
            scheme: SchemeKind::VertHor,
            base: 0.1,
            step: 0.1,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetrievalSection {
    pub top_m: usize,
    pub ku_budget: usize,
    pub embed_dim: usize,
}

impl Default for RetrievalSection {
    fn default() -> Self {
        Self {
            top_m: DEFAULT_TOP_M,
            ku_budget: DEFAULT_KU_BUDGET,
            embed_dim: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChunkingSection {
    pub c_len: usize,
}

impl Default for ChunkingSection {
    fn default() -> Self {
        Self { c_len: 1200 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsSection {
    pub graph_dir: Option<PathBuf>,
    pub report_dir: Option<PathBuf>,
}

impl Config {
    /// Parse and validate a config file. A missing path is an error; an
    /// empty file is the defaults.
    pub fn parse(path: &Path) -> Result<Self, ConfigError> {
        if !path.exists() {
            return Err(ConfigError::NotFound(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let config: Config =
            toml::from_str(text).map_err(|e| ConfigError::Invalid(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    #[allow(dead_code)] // exercised by the roundtrip invariant test
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let field = |field: &str, message: String| {
            Err(ConfigError::Field {
                field: field.into(),
                message,
            })
        };
        if self.matrix.rows < 1 {
            return field("matrix.rows", "must be at least 1".into());
        }
        if self.matrix.cols < 1 {
            return field("matrix.cols", "must be at least 1".into());
        }
        for (name, value) in [
            ("matrix.base", self.matrix.base),
            ("matrix.step", self.matrix.step),
            ("backend.temperature", self.backend.temperature),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return field(name, format!("{value} outside [0, 1]"));
            }
        }
        if self.backend.timeout_secs <= 0.0 {
            return field("backend.timeout_secs", "must be positive".into());
        }
        if self.retrieval.top_m < 1 {
            return field("retrieval.top_m", "must be at least 1".into());
        }
        if self.retrieval.ku_budget < 1 {
            return field("retrieval.ku_budget", "must be at least 1".into());
        }
        if self.retrieval.embed_dim < 1 {
            return field("retrieval.embed_dim", "must be at least 1".into());
        }
        if self.chunking.c_len < 1 {
            return field("chunking.c_len", "must be at least 1".into());
        }
        Ok(())
    }

    /// The engine configuration this file describes.
    pub fn matrix_config(&self) -> MatrixConfig {
        MatrixConfig {
            rows: self.matrix.rows,
            cols: self.matrix.cols,
            scheme: WeightScheme {
                kind: self.matrix.scheme,
                base: self.matrix.base,
                step: self.matrix.step,
                seed: self.matrix.seed,
            },
            top_m: self.retrieval.top_m,
            ku_budget: self.retrieval.ku_budget,
        }
    }

    /// Live-backend descriptor carrying the configured embedding dimension.
    pub fn backend_descriptor(&self) -> BackendDescriptor {
        BackendDescriptor {
            endpoint: self.backend.endpoint.clone(),
            model_id: self.backend.model_id.clone(),
            temperature: self.backend.temperature,
            max_retries: self.backend.max_retries,
            timeout_secs: self.backend.timeout_secs,
            api_key_env: self.backend.api_key_env.clone(),
            embed_dim: self.retrieval.embed_dim,
            embed_model: self.backend.embed_model.clone(),
        }
    }
}
