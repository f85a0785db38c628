//! Named prompt templates with `{placeholder}` substitution.

use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TemplateError {
    #[error("template {template:?}: placeholder {name:?} is not bound")]
    MissingPlaceholder { template: String, name: String },
    #[error("template {template:?}: required placeholder {name:?} is empty")]
    EmptyRequired { template: String, name: String },
}

/// A prompt template. Rendering fails unless every placeholder in the body
/// is bound, and every required placeholder is bound to non-empty text.
#[derive(Debug, Clone)]
pub struct PromptTemplate {
    pub name: String,
    pub body: String,
    pub required_placeholders: BTreeSet<String>,
}

impl PromptTemplate {
    pub fn new(name: &str, body: &str, required: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            body: body.to_string(),
            required_placeholders: required.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Substitute `{name}` markers with the given bindings.
    pub fn render(&self, bindings: &BTreeMap<&str, String>) -> Result<String, TemplateError> {
        for required in &self.required_placeholders {
            match bindings.get(required.as_str()) {
                None => {
                    return Err(TemplateError::MissingPlaceholder {
                        template: self.name.clone(),
                        name: required.clone(),
                    })
                }
                Some(value) if value.trim().is_empty() => {
                    return Err(TemplateError::EmptyRequired {
                        template: self.name.clone(),
                        name: required.clone(),
                    })
                }
                Some(_) => {}
            }
        }
        let mut out = String::with_capacity(self.body.len());
        let mut rest = self.body.as_str();
        while let Some(open) = rest.find('{') {
            out.push_str(&rest[..open]);
            let after = &rest[open + 1..];
            let close = after.find('}').ok_or_else(|| TemplateError::MissingPlaceholder {
                template: self.name.clone(),
                name: "<unterminated>".into(),
            })?;
            let key = &after[..close];
            match bindings.get(key) {
                Some(value) => out.push_str(value),
                None => {
                    return Err(TemplateError::MissingPlaceholder {
                        template: self.name.clone(),
                        name: key.to_string(),
                    })
                }
            }
            rest = &after[close + 1..];
        }
        out.push_str(rest);
        Ok(out)
    }
}
