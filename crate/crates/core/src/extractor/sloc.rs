//! Source-lines-of-code counting in three flavours.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::lexer::{tokenize, LexError, Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlocMode {
    /// Lines holding at least one code token; comment-only and blank lines are skipped.
    #[default]
    Standard,
    /// Raw line count.
    AsIs,
    /// Code lines after reformatting to the canonical layout.
    Pretty,
}

impl SlocMode {
    pub const ALL: [SlocMode; 3] = [SlocMode::Standard, SlocMode::AsIs, SlocMode::Pretty];

    pub fn as_str(self) -> &'static str {
        match self {
            SlocMode::Standard => "standard",
            SlocMode::AsIs => "as_is",
            SlocMode::Pretty => "pretty",
        }
    }
}

impl fmt::Display for SlocMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SlocMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "standard" => Ok(SlocMode::Standard),
            "as_is" | "asis" => Ok(SlocMode::AsIs),
            "pretty" => Ok(SlocMode::Pretty),
            other => Err(format!("unknown SLOC mode `{other}` (expected standard, as_is or pretty)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot tokenize method body at line {line}: {source}")]
pub struct SlocError {
    pub line: usize,
    #[source]
    pub source: LexError,
}

impl From<LexError> for SlocError {
    fn from(source: LexError) -> Self {
        SlocError { line: source.line(), source }
    }
}

pub fn compute_sloc(body: &str, mode: SlocMode) -> Result<usize, SlocError> {
    match mode {
        SlocMode::AsIs => Ok(body.lines().count()),
        SlocMode::Standard => Ok(code_lines(&tokenize(body)?).len()),
        SlocMode::Pretty => {
            let pretty = pretty_print(body)?;
            Ok(pretty.lines().filter(|l| !l.trim().is_empty()).count())
        }
    }
}

/// Every line number touched by a non-comment token.
pub(crate) fn code_lines(tokens: &[Token<'_>]) -> BTreeSet<usize> {
    tokens
        .iter()
        .filter(|t| !t.is_comment())
        .flat_map(|t| t.line..=t.end_line)
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Brace {
    Block { saved_parens: usize },
    ArrayInit,
}

/// Reformats a method to the canonical layout used for pretty SLOC: one
/// statement per line, opening braces kept on the declaring line, closing
/// braces on their own line, no blank lines and no comments.
pub fn pretty_print(body: &str) -> Result<String, SlocError> {
    let tokens: Vec<Token<'_>> = tokenize(body)?.into_iter().filter(|t| !t.is_comment()).collect();
    let mut out = PrettyWriter::default();
    let mut braces: Vec<Brace> = Vec::new();
    let mut parens = 0usize;
    let mut headers: Vec<usize> = Vec::new();
    let mut in_case_label = false;
    let mut ternaries = 0usize;

    let mut i = 0;
    while i < tokens.len() {
        let tok = &tokens[i];
        let next = tokens.get(i + 1);
        let next_is = |s: &str| next.is_some_and(|n| n.is(s));
        let prev = i.checked_sub(1).map(|p| &tokens[p]);

        if tok.is("@")
            && out.line_empty()
            && parens == 0
            && next.is_some_and(|n| n.kind == TokenKind::Identifier)
        {
            i = out.annotation(&tokens, i);
            out.newline();
            continue;
        }

        match tok.text {
            "{" if tok.kind == TokenKind::Operator => {
                let array_init = prev.is_some_and(|p| {
                    p.is("=")
                        || p.is("]")
                        || p.is("(")
                        || ((p.is(",") || p.is("{")) && braces.last() == Some(&Brace::ArrayInit))
                });
                out.push(tok);
                if array_init {
                    braces.push(Brace::ArrayInit);
                } else {
                    braces.push(Brace::Block { saved_parens: parens });
                    parens = 0;
                    out.newline();
                }
            }
            "}" if tok.kind == TokenKind::Operator => match braces.pop() {
                Some(Brace::ArrayInit) => out.push(tok),
                block => {
                    if let Some(Brace::Block { saved_parens }) = block {
                        parens = saved_parens;
                    }
                    out.newline();
                    out.push(tok);
                    let continues = next.is_some_and(|n| [";", ",", ")", "."].iter().any(|s| n.is(s)));
                    if !continues {
                        out.newline();
                    }
                }
            },
            ";" if tok.kind == TokenKind::Operator => {
                out.push(tok);
                if parens == 0 {
                    out.newline();
                }
            }
            "(" if tok.kind == TokenKind::Operator => {
                out.push(tok);
                parens += 1;
            }
            ")" if tok.kind == TokenKind::Operator => {
                out.push(tok);
                parens = parens.saturating_sub(1);
                if headers.last() == Some(&parens) {
                    headers.pop();
                    if !next_is("{") && !next_is(";") {
                        out.newline();
                    }
                }
            }
            "if" | "for" | "while" | "switch" | "catch" | "synchronized" | "try"
                if tok.kind == TokenKind::Keyword =>
            {
                out.push(tok);
                if next_is("(") {
                    headers.push(parens);
                } else if tok.text == "try" && !next_is("{") {
                    out.newline();
                }
            }
            "else" | "do" if tok.kind == TokenKind::Keyword => {
                out.push(tok);
                if !next_is("{") && !next_is("if") {
                    out.newline();
                }
            }
            "case" | "default" if tok.kind == TokenKind::Keyword && out.line_empty() && parens == 0 => {
                in_case_label = true;
                ternaries = 0;
                out.push(tok);
            }
            "?" if tok.kind == TokenKind::Operator => {
                if in_case_label {
                    ternaries += 1;
                }
                out.push(tok);
            }
            ":" if tok.kind == TokenKind::Operator && in_case_label => {
                out.push(tok);
                if ternaries == 0 {
                    in_case_label = false;
                    out.newline();
                } else {
                    ternaries -= 1;
                }
            }
            "->" if tok.kind == TokenKind::Operator && in_case_label => {
                in_case_label = false;
                out.push(tok);
            }
            _ => out.push(tok),
        }
        i += 1;
    }
    out.newline();
    Ok(out.finish())
}

#[derive(Default)]
struct PrettyWriter {
    lines: Vec<String>,
    current: String,
    last: Option<(TokenKind, String)>,
}

impl PrettyWriter {
    fn line_empty(&self) -> bool {
        self.current.is_empty()
    }

    fn push(&mut self, tok: &Token<'_>) {
        if !self.current.is_empty() && self.needs_space(tok) {
            self.current.push(' ');
        }
        self.current.push_str(tok.text);
        self.last = Some((tok.kind, tok.text.to_string()));
    }

    fn needs_space(&self, tok: &Token<'_>) -> bool {
        let Some((last_kind, last)) = &self.last else {
            return false;
        };
        let op = tok.kind == TokenKind::Operator;
        if op && [")", "]", ";", ",", ".", "::", "++", "--", ":"].contains(&tok.text) {
            return false;
        }
        if op && tok.text == "(" && *last_kind == TokenKind::Identifier {
            return false;
        }
        if op && tok.text == "[" && matches!(last_kind, TokenKind::Identifier | TokenKind::Keyword) {
            return false;
        }
        if *last_kind == TokenKind::Operator && ["(", "[", ".", "@", "::", "!", "~"].contains(&last.as_str()) {
            return false;
        }
        true
    }

    /// Emits `@Name(.Name)*` plus an optional balanced argument list; returns the next index.
    fn annotation(&mut self, tokens: &[Token<'_>], mut i: usize) -> usize {
        self.push(&tokens[i]);
        i += 1;
        while i < tokens.len() {
            let t = &tokens[i];
            if t.kind == TokenKind::Identifier || t.is(".") {
                self.push(t);
                i += 1;
            } else {
                break;
            }
        }
        if tokens.get(i).is_some_and(|t| t.is("(")) {
            let mut depth = 0usize;
            while i < tokens.len() {
                let t = &tokens[i];
                self.push(t);
                i += 1;
                if t.is("(") {
                    depth += 1;
                } else if t.is(")") {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
            }
        }
        i
    }

    fn newline(&mut self) {
        if !self.current.is_empty() {
            self.lines.push(std::mem::take(&mut self.current));
        }
    }

    fn finish(mut self) -> String {
        self.newline();
        let mut depth = 0usize;
        let mut out = String::new();
        for line in &self.lines {
            if line.starts_with('}') {
                depth = depth.saturating_sub(1);
            }
            out.push_str(&"    ".repeat(depth));
            out.push_str(line);
            out.push('\n');
            if line.ends_with('{') {
                depth += 1;
            }
        }
        out
    }
}
