//! Tier grammars: data languages described by sorting terminals into
//! classes (base items, brackets, marker tiers, operator tiers) instead of
//! writing productions.
//!
//! From such a classification this crate generates an LL(1) grammar and its
//! parse table, parses token streams into trees whose nodes are rule
//! applications, decides membership by local checks, and exports
//! bracket-free grammars as regular expressions.
//!
//! ```
//! use tiergram::{fixtures, lex_and_parse, render_tree, TreeFormat};
//!
//! let g = fixtures::g_expr();
//! let tree = lex_and_parse(&g, "1 + 2 * x").unwrap();
//! assert_eq!(
//!     render_tree(&tree, TreeFormat::Sexpr),
//!     r#"(connective:1 NUM="1" PLUS="+" (connective:2 NUM="2" STAR="*" ID="x"))"#
//! );
//! ```

pub mod fixtures;
pub mod grammar;
pub mod lexer;
pub mod membership;
pub mod parser;
pub mod regular;
pub mod tables;
pub mod testkit;
pub mod tree;

pub use grammar::{
    load_grammar, GrammarError, GrammarViolation, OperatorKind, OperatorTier, TermClass, TierGrammar,
    TokenDef,
};
pub use lexer::{compile_lexer, LexError, LexMode, Lexer, LexerError, Span, Token};
pub use parser::{build_parser, EventHandler, Recognizer, NodeEnd, NodeKind, ParseError, Parser, Session, TreeBuilder};
pub use tables::{generate_cfg, GrammarTables, TableError};
pub use tree::{render_tree, TierTree, TreeDoc, TreeFormat};
pub use membership::{check, check_balance, Checker, Condition, Violation};
pub use regular::{to_regex, to_regular_cfg, RegexAst, RegularError, TokenRegex};

/// Any failure along the text-to-tree pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Lexer(#[from] LexerError),
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Lexes `text` strictly with the grammar's token definitions and parses
/// the result. For repeated use, build the [`Lexer`] and [`Parser`] once.
pub fn lex_and_parse(g: &TierGrammar, text: &str) -> Result<TierTree, Error> {
    let parser = Parser::new(g)?;
    let tokens = Lexer::new(&g.tokens)?.tokenize(text, LexMode::Strict)?;
    Ok(parser.parse(&tokens)?)
}

/// The guide in `book/`, compiled so its snippets run as doctests.
#[cfg(doctest)]
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/grammars.md")]
    pub mod grammars {}
    #[doc = include_str!("../../../book/src/parsing.md")]
    pub mod parsing {}
    #[doc = include_str!("../../../book/src/streaming.md")]
    pub mod streaming {}
    #[doc = include_str!("../../../book/src/membership.md")]
    pub mod membership {}
    #[doc = include_str!("../../../book/src/regular.md")]
    pub mod regular {}
    #[doc = include_str!("../../../book/src/demotion.md")]
    pub mod demotion {}
    #[doc = include_str!("../../../book/src/testing.md")]
    pub mod testing {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
