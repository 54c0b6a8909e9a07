//! Feature-based readability proxy.
//!
//! A logistic model over six surface features. Line-length and identifier
//! features are measured on code lines only, and the comment and blank ratios
//! are taken relative to the code line count, so adding a comment line moves
//! exactly one feature.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::extractor::lexer::{tokenize, TokenKind};
use crate::extractor::sloc::{code_lines, SlocError};

const DEFAULT_WEIGHTS: &str = include_str!("../../config/readability.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadabilityWeights {
    pub intercept: f64,
    pub avg_line_length: f64,
    pub max_line_length: f64,
    pub avg_identifiers_per_line: f64,
    pub comment_ratio: f64,
    pub blank_ratio: f64,
    pub max_nesting: f64,
}

impl Default for ReadabilityWeights {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_WEIGHTS).expect("shipped readability weights are valid")
    }
}

impl ReadabilityWeights {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadabilityFeatures {
    pub avg_line_length: f64,
    pub max_line_length: f64,
    pub avg_identifiers_per_line: f64,
    pub comment_ratio: f64,
    pub blank_ratio: f64,
    pub max_nesting: f64,
}

pub fn readability_features(body: &str) -> Result<ReadabilityFeatures, SlocError> {
    let tokens = tokenize(body)?;
    let code = code_lines(&tokens);
    let comment_lines: std::collections::BTreeSet<usize> = tokens
        .iter()
        .filter(|t| t.is_comment())
        .flat_map(|t| t.line..=t.end_line)
        .filter(|l| !code.contains(l))
        .collect();
    let lines: Vec<&str> = body.lines().collect();
    let blank = (1..=lines.len())
        .filter(|l| !code.contains(l) && !comment_lines.contains(l) && lines[l - 1].trim().is_empty())
        .count();

    let code_count = code.len().max(1) as f64;
    let lengths: Vec<usize> = code.iter().filter_map(|l| lines.get(l - 1)).map(|l| l.chars().count()).collect();
    let identifiers = tokens.iter().filter(|t| t.kind == TokenKind::Identifier).count();

    let mut depth = 0i64;
    let mut max_depth = 0i64;
    for t in tokens.iter().filter(|t| t.kind == TokenKind::Operator) {
        match t.text {
            "{" => {
                depth += 1;
                max_depth = max_depth.max(depth);
            }
            "}" => depth -= 1,
            _ => {}
        }
    }

    Ok(ReadabilityFeatures {
        avg_line_length: lengths.iter().sum::<usize>() as f64 / code_count,
        max_line_length: lengths.iter().copied().max().unwrap_or(0) as f64,
        avg_identifiers_per_line: identifiers as f64 / code_count,
        comment_ratio: comment_lines.len() as f64 / code_count,
        blank_ratio: blank as f64 / code_count,
        // the method's own braces are level one
        max_nesting: (max_depth - 1).max(0) as f64,
    })
}

pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Readability in `[0, 1]`; higher reads better.
pub fn readability_score(body: &str, weights: &ReadabilityWeights) -> Result<f64, SlocError> {
    let f = readability_features(body)?;
    let z = weights.intercept
        + weights.avg_line_length * f.avg_line_length
        + weights.max_line_length * f.max_line_length
        + weights.avg_identifiers_per_line * f.avg_identifiers_per_line
        + weights.comment_ratio * f.comment_ratio
        + weights.blank_ratio * f.blank_ratio
        + weights.max_nesting * f.max_nesting;
    let score = logistic(z);
    Ok(if score.is_nan() { 0.0 } else { score.clamp(0.0, 1.0) })
}
