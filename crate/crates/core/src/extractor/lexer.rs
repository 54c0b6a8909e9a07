//! A small Java lexer.
//!
//! Only as much lexing as line counting, canonical reformatting and Halstead
//! token classification need: comments are kept as tokens so callers can
//! tell comment lines from code lines, and every token carries the 1-based
//! line range it spans.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Identifier,
    Keyword,
    /// Numeric literal.
    Number,
    /// String, text block or character literal.
    Text,
    Operator,
    LineComment,
    BlockComment,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token<'a> {
    pub kind: TokenKind,
    pub text: &'a str,
    /// 1-based first line of the token.
    pub line: usize,
    /// 1-based last line (differs from `line` for block comments and text blocks).
    pub end_line: usize,
}

impl Token<'_> {
    pub fn is_comment(&self) -> bool {
        matches!(self.kind, TokenKind::LineComment | TokenKind::BlockComment)
    }

    pub fn is(&self, text: &str) -> bool {
        self.text == text && !self.is_comment() && self.kind != TokenKind::Text
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("unterminated string literal starting on line {line}")]
    UnterminatedString { line: usize },
    #[error("unterminated character literal on line {line}")]
    UnterminatedChar { line: usize },
    #[error("unterminated block comment starting on line {line}")]
    UnterminatedComment { line: usize },
    #[error("unexpected character {ch:?} on line {line}")]
    UnexpectedChar { ch: char, line: usize },
}

impl LexError {
    pub fn line(&self) -> usize {
        match *self {
            LexError::UnterminatedString { line }
            | LexError::UnterminatedChar { line }
            | LexError::UnterminatedComment { line }
            | LexError::UnexpectedChar { line, .. } => line,
        }
    }
}

pub const KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "package", "private", "protected", "public", "return", "short", "static",
    "strictfp", "super", "switch", "synchronized", "this", "throw", "throws", "transient", "try",
    "void", "volatile", "while", "var", "yield", "record", "true", "false", "null",
];

// Longest first so that greedy matching picks `>>>=` over `>>`.
const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=",
    ">=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", "(", ")", "{", "}", "[",
    "]", ";", ",", ".", "@", "=", ">", "<", "!", "~", "?", ":", "+", "-", "*", "/", "&", "|",
    "^", "%",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

/// Tokenizes `src`. Line numbers are relative to the start of `src`.
pub fn tokenize(src: &str) -> Result<Vec<Token<'_>>, LexError> {
    Lexer { src, bytes: src.as_bytes(), pos: 0, line: 1 }.run()
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Lexer<'a> {
    fn run(mut self) -> Result<Vec<Token<'a>>, LexError> {
        let mut tokens = Vec::new();
        while let Some(c) = self.peek_char() {
            if c == '\n' {
                self.line += 1;
                self.pos += 1;
                continue;
            }
            if c.is_whitespace() {
                self.pos += c.len_utf8();
                continue;
            }
            let start = self.pos;
            let line = self.line;
            let kind = self.lex_one(c)?;
            tokens.push(Token { kind, text: &self.src[start..self.pos], line, end_line: self.line });
        }
        Ok(tokens)
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn byte_at(&self, offset: usize) -> Option<u8> {
        self.bytes.get(self.pos + offset).copied()
    }

    fn lex_one(&mut self, c: char) -> Result<TokenKind, LexError> {
        let start_line = self.line;
        match c {
            '/' if self.byte_at(1) == Some(b'/') => {
                while let Some(b) = self.byte_at(0) {
                    if b == b'\n' {
                        break;
                    }
                    self.pos += 1;
                }
                Ok(TokenKind::LineComment)
            }
            '/' if self.byte_at(1) == Some(b'*') => {
                self.pos += 2;
                loop {
                    match self.byte_at(0) {
                        None => return Err(LexError::UnterminatedComment { line: start_line }),
                        Some(b'*') if self.byte_at(1) == Some(b'/') => {
                            self.pos += 2;
                            return Ok(TokenKind::BlockComment);
                        }
                        Some(b) => {
                            if b == b'\n' {
                                self.line += 1;
                            }
                            self.pos += 1;
                        }
                    }
                }
            }
            '"' if self.src[self.pos..].starts_with("\"\"\"") => {
                self.pos += 3;
                loop {
                    match self.byte_at(0) {
                        None => return Err(LexError::UnterminatedString { line: start_line }),
                        Some(b'\\') => self.pos += 2,
                        Some(b'"') if self.src[self.pos..].starts_with("\"\"\"") => {
                            self.pos += 3;
                            return Ok(TokenKind::Text);
                        }
                        Some(b) => {
                            if b == b'\n' {
                                self.line += 1;
                            }
                            self.pos += 1;
                        }
                    }
                }
            }
            '"' | '\'' => {
                let quote = c as u8;
                self.pos += 1;
                loop {
                    match self.byte_at(0) {
                        None | Some(b'\n') => {
                            return Err(if quote == b'"' {
                                LexError::UnterminatedString { line: start_line }
                            } else {
                                LexError::UnterminatedChar { line: start_line }
                            })
                        }
                        Some(b'\\') => self.pos += 2,
                        Some(b) if b == quote => {
                            self.pos += 1;
                            return Ok(TokenKind::Text);
                        }
                        Some(_) => self.pos += 1,
                    }
                }
            }
            c if c.is_ascii_digit()
                || (c == '.' && self.byte_at(1).is_some_and(|b| b.is_ascii_digit())) =>
            {
                self.lex_number();
                Ok(TokenKind::Number)
            }
            c if c.is_alphabetic() || c == '_' || c == '$' => {
                let start = self.pos;
                while let Some(c) = self.peek_char() {
                    if c.is_alphanumeric() || c == '_' || c == '$' {
                        self.pos += c.len_utf8();
                    } else {
                        break;
                    }
                }
                if is_keyword(&self.src[start..self.pos]) {
                    Ok(TokenKind::Keyword)
                } else {
                    Ok(TokenKind::Identifier)
                }
            }
            _ => {
                let rest = &self.src[self.pos..];
                match OPERATORS.iter().find(|op| rest.starts_with(**op)) {
                    Some(op) => {
                        self.pos += op.len();
                        Ok(TokenKind::Operator)
                    }
                    None => Err(LexError::UnexpectedChar { ch: c, line: start_line }),
                }
            }
        }
    }

    fn lex_number(&mut self) {
        let hex = self.byte_at(0) == Some(b'0') && matches!(self.byte_at(1), Some(b'x' | b'X'));
        let mut prev = 0u8;
        while let Some(b) = self.byte_at(0) {
            let exponent_sign = matches!(b, b'+' | b'-')
                && if hex { matches!(prev, b'p' | b'P') } else { matches!(prev, b'e' | b'E') };
            if b.is_ascii_alphanumeric() || b == b'_' || b == b'.' || exponent_sign {
                // `1..2` never occurs in Java, but `x.length` after a digit would: stop at a
                // dot followed by a letter.
                if b == b'.' && self.byte_at(1).is_some_and(|n| n.is_ascii_alphabetic() && !matches!(n, b'e' | b'E' | b'f' | b'F' | b'd' | b'D')) {
                    break;
                }
                prev = b;
                self.pos += 1;
            } else {
                break;
            }
        }
    }
}
