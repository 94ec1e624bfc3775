//! Maximal-munch tokenizer driven by the grammar's token definitions.
//!
//! At every offset each pattern is tried anchored at that offset; the
//! longest match wins and equal-length matches go to the earliest
//! declaration. Patterns never search ahead and may not contain anchors or
//! other look-around assertions.

use std::fmt;

use regex_automata::meta::Regex;
use regex_automata::{Anchored, Input, MatchKind};
use thiserror::Error;

use crate::grammar::TokenDef;

/// Name given to runs of unmatchable input in lenient mode.
pub const OTHER: &str = "OTHER";

/// Byte range `[start, end)` plus the 1-based line and column (in chars) of
/// `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub name: String,
    pub lexeme: String,
    pub span: Span,
}

impl Token {
    pub fn new(name: impl Into<String>, lexeme: impl Into<String>, span: Span) -> Self {
        Token {
            name: name.into(),
            lexeme: lexeme.into(),
            span,
        }
    }

    /// Line and column just past the end of the lexeme.
    pub fn end_position(&self) -> (usize, usize) {
        advance(self.span.line, self.span.column, &self.lexeme)
    }
}

impl AsRef<str> for Token {
    /// The token name.
    fn as_ref(&self) -> &str {
        &self.name
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:?}", self.name, self.lexeme)
    }
}

fn advance(mut line: usize, mut column: usize, text: &str) -> (usize, usize) {
    for c in text.chars() {
        if c == '\n' {
            line += 1;
            column = 1;
        } else {
            column += 1;
        }
    }
    (line, column)
}

/// Builds tokens whose lexemes are their names, laid out as if the names
/// were written separated by single spaces. Handy wherever a token string
/// is given by terminal names alone.
pub fn tokens_from_names<S: AsRef<str>>(names: &[S]) -> Vec<Token> {
    let mut offset = 0;
    let mut column = 1;
    names
        .iter()
        .map(|n| {
            let n = n.as_ref();
            let len = n.len();
            let tok = Token::new(
                n,
                n,
                Span {
                    start: offset,
                    end: offset + len,
                    line: 1,
                    column,
                },
            );
            offset += len + 1;
            column += n.chars().count() + 1;
            tok
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LexMode {
    #[default]
    Strict,
    /// Unmatchable runs become `OTHER` tokens instead of errors.
    Lenient,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LexerError {
    #[error("no token definitions")]
    NoTokens,
    #[error("token `{name}`: invalid pattern: {message}")]
    InvalidPattern { name: String, message: String },
    #[error("token `{name}`: pattern can match the empty string")]
    EmptyMatchPattern { name: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{column}: no token matches {found:?}")]
pub struct LexError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub found: char,
}

#[derive(Debug)]
struct Rule {
    name: String,
    skip: bool,
    regex: Regex,
}

#[derive(Debug)]
pub struct Lexer {
    rules: Vec<Rule>,
}

impl Lexer {
    pub fn new(defs: &[TokenDef]) -> Result<Self, LexerError> {
        if defs.is_empty() {
            return Err(LexerError::NoTokens);
        }
        let rules = defs
            .iter()
            .map(|def| {
                check_pattern(def)?;
                let regex = Regex::builder()
                    .configure(Regex::config().match_kind(MatchKind::All))
                    .build(&def.pattern)
                    .map_err(|e| LexerError::InvalidPattern {
                        name: def.name.clone(),
                        message: e.to_string(),
                    })?;
                Ok(Rule {
                    name: def.name.clone(),
                    skip: def.skip,
                    regex,
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Lexer { rules })
    }

    /// Longest match at `pos`: `(rule index, end offset)`.
    fn longest_at(&self, text: &str, pos: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        let input = Input::new(text).range(pos..).anchored(Anchored::Yes);
        for (i, rule) in self.rules.iter().enumerate() {
            if let Some(m) = rule.regex.search(&input) {
                if m.end() > pos && best.is_none_or(|(_, end)| m.end() > end) {
                    best = Some((i, m.end()));
                }
            }
        }
        best
    }

    /// Splits `text` into tokens, dropping skip tokens.
    pub fn tokenize(&self, text: &str, mode: LexMode) -> Result<Vec<Token>, LexError> {
        let mut out = Vec::new();
        self.scan(text, mode, |tok, skip| {
            if !skip {
                out.push(tok);
            }
        })?;
        Ok(out)
    }

    /// Like [`tokenize`](Self::tokenize) but keeps skip tokens, so the
    /// lexemes concatenate back to `text`.
    pub fn tokenize_all(&self, text: &str, mode: LexMode) -> Result<Vec<Token>, LexError> {
        let mut out = Vec::new();
        self.scan(text, mode, |tok, _| out.push(tok))?;
        Ok(out)
    }

    fn scan(
        &self,
        text: &str,
        mode: LexMode,
        mut emit: impl FnMut(Token, bool),
    ) -> Result<(), LexError> {
        let (mut pos, mut line, mut column) = (0, 1, 1);
        while pos < text.len() {
            let (name, skip, end) = match self.longest_at(text, pos) {
                Some((rule, end)) => (self.rules[rule].name.as_str(), self.rules[rule].skip, end),
                None => {
                    if mode == LexMode::Strict {
                        return Err(LexError {
                            offset: pos,
                            line,
                            column,
                            found: text[pos..].chars().next().expect("pos < len"),
                        });
                    }
                    let mut end = pos;
                    for (i, c) in text[pos..].char_indices() {
                        if i > 0 && self.longest_at(text, pos + i).is_some() {
                            break;
                        }
                        end = pos + i + c.len_utf8();
                    }
                    (OTHER, false, end)
                }
            };
            let lexeme = &text[pos..end];
            let span = Span {
                start: pos,
                end,
                line,
                column,
            };
            (line, column) = advance(line, column, lexeme);
            emit(Token::new(name, lexeme, span), skip);
            pos = end;
        }
        Ok(())
    }
}

/// Compiles the token definitions in declaration order.
pub fn compile_lexer(defs: &[TokenDef]) -> Result<Lexer, LexerError> {
    Lexer::new(defs)
}

fn check_pattern(def: &TokenDef) -> Result<(), LexerError> {
    let hir = regex_syntax::parse(&def.pattern).map_err(|e| LexerError::InvalidPattern {
        name: def.name.clone(),
        message: e.to_string(),
    })?;
    let props = hir.properties();
    if !props.look_set().is_empty() {
        return Err(LexerError::InvalidPattern {
            name: def.name.clone(),
            message: "anchors and word boundaries are not supported".into(),
        });
    }
    if props.minimum_len() == Some(0) {
        return Err(LexerError::EmptyMatchPattern {
            name: def.name.clone(),
        });
    }
    Ok(())
}

/// One line of the token dump: name, start, end and escaped lexeme,
/// tab-separated.
pub fn dump_line(tok: &Token) -> String {
    format!(
        "{}\t{}\t{}\t{}",
        tok.name,
        tok.span.start,
        tok.span.end,
        tok.lexeme.escape_default()
    )
}
