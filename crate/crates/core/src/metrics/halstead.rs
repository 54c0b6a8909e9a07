//! Halstead volume with a fixed token classification.
//!
//! | token                                   | class    |
//! |-----------------------------------------|----------|
//! | keywords other than `true false null`   | operator |
//! | operator and separator symbols          | operator |
//! | `)` `]` `}` (counted via their opener)  | ignored  |
//! | identifiers                             | operand  |
//! | numeric, string and char literals       | operand  |
//! | `true` `false` `null`                   | operand  |
//! | comments                                | ignored  |

use std::collections::HashSet;

use crate::extractor::lexer::{tokenize, LexError, Token, TokenKind, KEYWORDS};
use crate::extractor::ParsedMethod;

pub const OPERAND_KEYWORDS: &[&str] = &["true", "false", "null"];
pub const IGNORED_SYMBOLS: &[&str] = &[")", "]", "}"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalsteadClass {
    Operator,
    Operand,
    Ignored,
}

/// Operator keywords, in lexer order.
pub fn operator_keywords() -> impl Iterator<Item = &'static str> {
    KEYWORDS.iter().copied().filter(|k| !OPERAND_KEYWORDS.contains(k))
}

pub fn classify(token: &Token<'_>) -> HalsteadClass {
    match token.kind {
        TokenKind::LineComment | TokenKind::BlockComment => HalsteadClass::Ignored,
        TokenKind::Identifier | TokenKind::Number | TokenKind::Text => HalsteadClass::Operand,
        TokenKind::Keyword if OPERAND_KEYWORDS.contains(&token.text) => HalsteadClass::Operand,
        TokenKind::Keyword => HalsteadClass::Operator,
        TokenKind::Operator if IGNORED_SYMBOLS.contains(&token.text) => HalsteadClass::Ignored,
        TokenKind::Operator => HalsteadClass::Operator,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HalsteadCounts {
    pub distinct_operators: usize,
    pub distinct_operands: usize,
    pub total_operators: usize,
    pub total_operands: usize,
}

impl HalsteadCounts {
    pub fn from_text(text: &str) -> Result<Self, LexError> {
        let tokens = tokenize(text)?;
        let mut operators = HashSet::new();
        let mut operands = HashSet::new();
        let mut counts = HalsteadCounts::default();
        for tok in &tokens {
            match classify(tok) {
                HalsteadClass::Operator => {
                    counts.total_operators += 1;
                    operators.insert(tok.text);
                }
                HalsteadClass::Operand => {
                    counts.total_operands += 1;
                    operands.insert(tok.text);
                }
                HalsteadClass::Ignored => {}
            }
        }
        counts.distinct_operators = operators.len();
        counts.distinct_operands = operands.len();
        Ok(counts)
    }

    pub fn length(&self) -> usize {
        self.total_operators + self.total_operands
    }

    pub fn vocabulary(&self) -> usize {
        self.distinct_operators + self.distinct_operands
    }

    /// `length * log2(vocabulary)`, zero for an empty token stream.
    pub fn volume(&self) -> f64 {
        if self.length() == 0 {
            return 0.0;
        }
        self.length() as f64 * (self.vocabulary() as f64).log2()
    }
}

pub fn halstead_volume(method: &ParsedMethod) -> f64 {
    // the body already parsed, so it lexes
    HalsteadCounts::from_text(method.body()).map(|c| c.volume()).unwrap_or(0.0)
}
