//! Java method extraction: records, SLOC variants and accessor detection.

mod java;
pub mod lexer;
pub mod sloc;

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::metrics::MetricVector;

pub use java::ParsedMethod;
pub use sloc::{compute_sloc, pretty_print, SlocError, SlocMode};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("{file_path}:{line}:{column}: syntax error")]
    Parse { file_path: String, line: usize, column: usize },
    #[error("{file_path}: {source}")]
    Sloc {
        file_path: String,
        #[source]
        source: SlocError,
    },
    #[error("text does not contain a method declaration")]
    NotAMethod,
}

/// Parameter types and return type with whitespace squashed out. Constructors
/// and initializers have no return type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub parameters: Vec<String>,
    pub return_type: Option<String>,
}

impl Signature {
    pub fn arity(&self) -> usize {
        self.parameters.len()
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.parameters.join(","))?;
        if let Some(ret) = &self.return_type {
            write!(f, ":{ret}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRecord {
    pub method_id: String,
    pub project_id: String,
    pub file_path: String,
    pub name: String,
    pub signature: Signature,
    pub start_line: usize,
    pub end_line: usize,
    pub body_text: String,
    pub sloc_standard: usize,
    pub sloc_as_is: usize,
    pub sloc_pretty: usize,
    pub is_accessor: bool,
    #[serde(default)]
    pub birth_timestamp: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricVector>,
}

impl MethodRecord {
    pub fn sloc(&self, mode: SlocMode) -> usize {
        match mode {
            SlocMode::Standard => self.sloc_standard,
            SlocMode::AsIs => self.sloc_as_is,
            SlocMode::Pretty => self.sloc_pretty,
        }
    }
}

pub fn method_id(file_path: &str, name: &str, signature: &Signature, start_line: usize) -> String {
    let mut hasher = Sha256::new();
    hasher.update(file_path.as_bytes());
    hasher.update([0]);
    hasher.update(name.as_bytes());
    hasher.update([0]);
    hasher.update(signature.to_string().as_bytes());
    hasher.update([0]);
    hasher.update(start_line.to_string().as_bytes());
    hasher.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Getter: `get*`, no parameters, non-void return. Setter: `set*`, one
/// parameter, void return.
pub fn detect_accessor(name: &str, signature: &Signature) -> bool {
    let returns_void = signature.return_type.as_deref() == Some("void");
    let getter = name.starts_with("get") && signature.arity() == 0 && signature.return_type.is_some() && !returns_void;
    let setter = name.starts_with("set") && signature.arity() == 1 && returns_void;
    getter || setter
}

/// Extracts one record per method, constructor and static initializer with a
/// body, in source order. Methods of anonymous and local classes get records
/// of their own; their text also remains part of the enclosing method.
pub fn extract_methods(source: &str, file_path: &str, project_id: &str) -> Result<Vec<MethodRecord>, ExtractError> {
    let tree = java::parse_java(source);
    if let Some((line, column)) = java::first_error(&tree) {
        return Err(ExtractError::Parse { file_path: file_path.to_string(), line, column });
    }
    java::declarations(&tree, source)
        .into_iter()
        .map(|decl| {
            let body_text = source[decl.start_byte..decl.end_byte].to_string();
            let sloc = |mode| {
                compute_sloc(&body_text, mode)
                    .map_err(|source| ExtractError::Sloc { file_path: file_path.to_string(), source })
            };
            let signature = Signature { parameters: decl.parameters, return_type: decl.return_type };
            Ok(MethodRecord {
                method_id: method_id(file_path, &decl.name, &signature, decl.start_line),
                project_id: project_id.to_string(),
                file_path: file_path.to_string(),
                is_accessor: detect_accessor(&decl.name, &signature),
                sloc_standard: sloc(SlocMode::Standard)?,
                sloc_as_is: sloc(SlocMode::AsIs)?,
                sloc_pretty: sloc(SlocMode::Pretty)?,
                name: decl.name,
                signature,
                start_line: decl.start_line,
                end_line: decl.end_line,
                body_text,
                birth_timestamp: None,
                metrics: None,
            })
        })
        .collect()
}

/// A method located in a possibly historic file version, without SLOC or
/// identity. Syntax errors elsewhere in the file are tolerated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct MethodSite {
    pub name: String,
    pub signature: Signature,
    pub body_text: String,
    pub start_line: usize,
}

pub(crate) fn locate_methods(source: &str) -> Vec<MethodSite> {
    let tree = java::parse_java(source);
    java::declarations(&tree, source)
        .into_iter()
        .map(|d| MethodSite {
            body_text: source[d.start_byte..d.end_byte].to_string(),
            signature: Signature { parameters: d.parameters, return_type: d.return_type },
            name: d.name,
            start_line: d.start_line,
        })
        .collect()
}
