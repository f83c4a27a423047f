use thiserror::Error;

use super::validate::{schema_findings, Category};
use super::Instance;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("schema violation at `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("duplicate {what} id `{id}`")]
    DuplicateId { what: &'static str, id: String },
}

/// Parses an instance document (JSON).
///
/// Structural problems (unknown or missing fields, wrong types, negative
/// quantities, ratios outside `[0, 1]`, duplicate ids) are errors.
/// Cross-reference and feasibility checks are left to
/// [`validate_instance`](super::validate_instance).
pub fn parse_instance(doc: &str) -> Result<Instance, ParseError> {
    let mut de = serde_json::Deserializer::from_str(doc);
    let inst: Instance = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        match inner.classify() {
            serde_json::error::Category::Data => ParseError::Schema { field: path, message: strip_position(&inner) },
            _ => ParseError::Syntax { line: inner.line(), column: inner.column(), message: strip_position(&inner) },
        }
    })?;
    de.end().map_err(|e| ParseError::Syntax { line: e.line(), column: e.column(), message: strip_position(&e) })?;
    match schema_findings(&inst).into_iter().next() {
        None => Ok(inst),
        Some(f) => Err(match f.category {
            Category::Duplicate(what) => ParseError::DuplicateId { what, id: f.entity },
            _ => ParseError::Schema { field: f.entity, message: f.message },
        }),
    }
}

fn strip_position(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_string(),
        None => s,
    }
}

/// Pretty-printed JSON; [`parse_instance`] reads it back unchanged.
pub fn to_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(inst).expect("instance data is always serializable")
}
