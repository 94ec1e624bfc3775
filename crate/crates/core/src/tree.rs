//! Tier parse trees and their serializations.

use std::fmt::Write as _;

use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::lexer::Token;

/// A parse tree whose inner nodes are rule applications: brackets, operator
/// applications, marker groups and item sequences. All connectives (or
/// markers) of one priority that glue neighbouring items together live in a
/// single node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TierTree {
    Base(Token),
    Bracket {
        open: Token,
        child: Box<TierTree>,
        close: Token,
    },
    Prefix {
        priority: usize,
        operator: Token,
        child: Box<TierTree>,
    },
    Postfix {
        priority: usize,
        child: Box<TierTree>,
        operator: Token,
    },
    /// `children.len() == operators.len() + 1`
    Connective {
        priority: usize,
        children: Vec<TierTree>,
        operators: Vec<Token>,
    },
    /// `children.len() == markers.len() + 1`
    Markers {
        priority: usize,
        children: Vec<TierTree>,
        markers: Vec<Token>,
    },
    /// Two or more adjacent items.
    Sequence(Vec<TierTree>),
    Empty,
}

impl TierTree {
    /// All tokens of the tree in input order.
    pub fn tokens(&self) -> Vec<&Token> {
        let mut out = Vec::new();
        self.collect_tokens(&mut out);
        out
    }

    fn collect_tokens<'a>(&'a self, out: &mut Vec<&'a Token>) {
        match self {
            TierTree::Base(t) => out.push(t),
            TierTree::Bracket { open, child, close } => {
                out.push(open);
                child.collect_tokens(out);
                out.push(close);
            }
            TierTree::Prefix {
                operator, child, ..
            } => {
                out.push(operator);
                child.collect_tokens(out);
            }
            TierTree::Postfix {
                child, operator, ..
            } => {
                child.collect_tokens(out);
                out.push(operator);
            }
            TierTree::Connective {
                children,
                operators: seps,
                ..
            }
            | TierTree::Markers {
                children,
                markers: seps,
                ..
            } => {
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        out.push(&seps[i - 1]);
                    }
                    c.collect_tokens(out);
                }
            }
            TierTree::Sequence(children) => {
                for c in children {
                    c.collect_tokens(out);
                }
            }
            TierTree::Empty => {}
        }
    }

    /// Short kind name, as used in the JSON `kind` field.
    pub fn kind(&self) -> &'static str {
        match self {
            TierTree::Base(_) => "base",
            TierTree::Bracket { .. } => "bracket",
            TierTree::Prefix { .. } => "prefix",
            TierTree::Postfix { .. } => "postfix",
            TierTree::Connective { .. } => "connective",
            TierTree::Markers { .. } => "markers",
            TierTree::Sequence(_) => "seq",
            TierTree::Empty => "empty",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TreeFormat {
    #[default]
    Json,
    Sexpr,
}

pub fn render_tree(tree: &TierTree, format: TreeFormat) -> String {
    match format {
        TreeFormat::Json => {
            serde_json::to_string(tree).expect("tree serializes")
        }
        TreeFormat::Sexpr => {
            let mut out = String::new();
            write_sexpr(tree, &mut out);
            out
        }
    }
}

/// The serialized form of a token inside a tree document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenDoc {
    pub token: String,
    pub lexeme: String,
    pub span: [usize; 2],
}

impl From<&Token> for TokenDoc {
    fn from(t: &Token) -> Self {
        TokenDoc {
            token: t.name.clone(),
            lexeme: t.lexeme.clone(),
            span: [t.span.start, t.span.end],
        }
    }
}

/// The JSON tree document. Field order is fixed, so output is stable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TreeDoc {
    Base(TokenDoc),
    Bracket {
        open: TokenDoc,
        close: TokenDoc,
        child: Box<TreeDoc>,
    },
    Prefix {
        priority: usize,
        operator: TokenDoc,
        child: Box<TreeDoc>,
    },
    Postfix {
        priority: usize,
        operator: TokenDoc,
        child: Box<TreeDoc>,
    },
    Connective {
        priority: usize,
        operators: Vec<TokenDoc>,
        children: Vec<TreeDoc>,
    },
    Markers {
        priority: usize,
        markers: Vec<TokenDoc>,
        children: Vec<TreeDoc>,
    },
    Seq {
        children: Vec<TreeDoc>,
    },
    Empty,
}

impl TreeDoc {
    pub fn from_json(text: &str) -> Result<TreeDoc, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Lexemes in document order.
    pub fn lexemes(&self) -> Vec<&str> {
        fn walk<'a>(d: &'a TreeDoc, out: &mut Vec<&'a str>) {
            match d {
                TreeDoc::Base(t) => out.push(&t.lexeme),
                TreeDoc::Bracket { open, close, child } => {
                    out.push(&open.lexeme);
                    walk(child, out);
                    out.push(&close.lexeme);
                }
                TreeDoc::Prefix {
                    operator, child, ..
                } => {
                    out.push(&operator.lexeme);
                    walk(child, out);
                }
                TreeDoc::Postfix {
                    operator, child, ..
                } => {
                    walk(child, out);
                    out.push(&operator.lexeme);
                }
                TreeDoc::Connective {
                    operators: seps,
                    children,
                    ..
                }
                | TreeDoc::Markers {
                    markers: seps,
                    children,
                    ..
                } => {
                    for (i, c) in children.iter().enumerate() {
                        if i > 0 {
                            out.push(&seps[i - 1].lexeme);
                        }
                        walk(c, out);
                    }
                }
                TreeDoc::Seq { children } => children.iter().for_each(|c| walk(c, out)),
                TreeDoc::Empty => {}
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

impl From<&TierTree> for TreeDoc {
    fn from(t: &TierTree) -> Self {
        let docs = |v: &[TierTree]| v.iter().map(TreeDoc::from).collect();
        let toks = |v: &[Token]| v.iter().map(TokenDoc::from).collect();
        match t {
            TierTree::Base(tok) => TreeDoc::Base(tok.into()),
            TierTree::Bracket { open, child, close } => TreeDoc::Bracket {
                open: open.into(),
                close: close.into(),
                child: Box::new(child.as_ref().into()),
            },
            TierTree::Prefix {
                priority,
                operator,
                child,
            } => TreeDoc::Prefix {
                priority: *priority,
                operator: operator.into(),
                child: Box::new(child.as_ref().into()),
            },
            TierTree::Postfix {
                priority,
                child,
                operator,
            } => TreeDoc::Postfix {
                priority: *priority,
                operator: operator.into(),
                child: Box::new(child.as_ref().into()),
            },
            TierTree::Connective {
                priority,
                children,
                operators,
            } => TreeDoc::Connective {
                priority: *priority,
                operators: toks(operators),
                children: docs(children),
            },
            TierTree::Markers {
                priority,
                children,
                markers,
            } => TreeDoc::Markers {
                priority: *priority,
                markers: toks(markers),
                children: docs(children),
            },
            TierTree::Sequence(children) => TreeDoc::Seq {
                children: docs(children),
            },
            TierTree::Empty => TreeDoc::Empty,
        }
    }
}

/// Serializes a token the way [`TokenDoc`] does, without copying it.
struct TokenRef<'a>(&'a Token);

impl Serialize for TokenRef<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("token", &self.0.name)?;
        m.serialize_entry("lexeme", &self.0.lexeme)?;
        m.serialize_entry("span", &[self.0.span.start, self.0.span.end])?;
        m.end()
    }
}

struct TokenList<'a>(&'a [Token]);

impl Serialize for TokenList<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(TokenRef))
    }
}

/// Same document as serializing the equivalent [`TreeDoc`].
impl Serialize for TierTree {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("kind", self.kind())?;
        match self {
            TierTree::Base(t) => {
                m.serialize_entry("token", &t.name)?;
                m.serialize_entry("lexeme", &t.lexeme)?;
                m.serialize_entry("span", &[t.span.start, t.span.end])?;
            }
            TierTree::Bracket { open, child, close } => {
                m.serialize_entry("open", &TokenRef(open))?;
                m.serialize_entry("close", &TokenRef(close))?;
                m.serialize_entry("child", child)?;
            }
            TierTree::Prefix {
                priority,
                operator,
                child,
            }
            | TierTree::Postfix {
                priority,
                child,
                operator,
            } => {
                m.serialize_entry("priority", priority)?;
                m.serialize_entry("operator", &TokenRef(operator))?;
                m.serialize_entry("child", child)?;
            }
            TierTree::Connective {
                priority,
                children,
                operators,
            } => {
                m.serialize_entry("priority", priority)?;
                m.serialize_entry("operators", &TokenList(operators))?;
                m.serialize_entry("children", children)?;
            }
            TierTree::Markers {
                priority,
                children,
                markers,
            } => {
                m.serialize_entry("priority", priority)?;
                m.serialize_entry("markers", &TokenList(markers))?;
                m.serialize_entry("children", children)?;
            }
            TierTree::Sequence(children) => m.serialize_entry("children", children)?,
            TierTree::Empty => {}
        }
        m.end()
    }
}

fn write_token(tok: &Token, out: &mut String) {
    let _ = write!(out, "{}={:?}", tok.name, tok.lexeme);
}

fn write_sexpr(tree: &TierTree, out: &mut String) {
    let interleaved = |head: String, children: &[TierTree], seps: &[Token], out: &mut String| {
        out.push('(');
        out.push_str(&head);
        for (i, c) in children.iter().enumerate() {
            if i > 0 {
                out.push(' ');
                write_token(&seps[i - 1], out);
            }
            out.push(' ');
            write_sexpr(c, out);
        }
        out.push(')');
    };
    match tree {
        TierTree::Base(t) => write_token(t, out),
        TierTree::Bracket { open, child, close } => {
            out.push_str("(bracket ");
            write_token(open, out);
            out.push(' ');
            write_sexpr(child, out);
            out.push(' ');
            write_token(close, out);
            out.push(')');
        }
        TierTree::Prefix {
            priority,
            operator,
            child,
        } => {
            let _ = write!(out, "(prefix:{priority} ");
            write_token(operator, out);
            out.push(' ');
            write_sexpr(child, out);
            out.push(')');
        }
        TierTree::Postfix {
            priority,
            child,
            operator,
        } => {
            let _ = write!(out, "(postfix:{priority} ");
            write_sexpr(child, out);
            out.push(' ');
            write_token(operator, out);
            out.push(')');
        }
        TierTree::Connective {
            priority,
            children,
            operators,
        } => interleaved(format!("connective:{priority}"), children, operators, out),
        TierTree::Markers {
            priority,
            children,
            markers,
        } => interleaved(format!("markers:{priority}"), children, markers, out),
        TierTree::Sequence(children) => {
            out.push_str("(seq");
            for c in children {
                out.push(' ');
                write_sexpr(c, out);
            }
            out.push(')');
        }
        TierTree::Empty => out.push_str("()"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexer::Span;

    fn tok(name: &str, lexeme: &str, start: usize) -> Token {
        Token::new(
            name,
            lexeme,
            Span {
                start,
                end: start + lexeme.len(),
                line: 1,
                column: start + 1,
            },
        )
    }

    #[test]
    fn base_json() {
        let t = TierTree::Base(tok("NUM", "42", 0));
        assert_eq!(
            render_tree(&t, TreeFormat::Json),
            r#"{"kind":"base","token":"NUM","lexeme":"42","span":[0,2]}"#
        );
        assert_eq!(render_tree(&TierTree::Empty, TreeFormat::Json), r#"{"kind":"empty"}"#);
    }

    #[test]
    fn bracket_json_and_sexpr() {
        let t = TierTree::Bracket {
            open: tok("LPAR", "(", 0),
            child: Box::new(TierTree::Base(tok("NUM", "1", 1))),
            close: tok("RPAR", ")", 2),
        };
        let json = render_tree(&t, TreeFormat::Json);
        assert!(json.starts_with(r#"{"kind":"bracket","open":{"token":"LPAR""#));
        assert_eq!(TreeDoc::from_json(&json).unwrap(), TreeDoc::from(&t));
        assert_eq!(
            render_tree(&t, TreeFormat::Sexpr),
            r#"(bracket LPAR="(" NUM="1" RPAR=")")"#
        );
    }

    #[test]
    fn direct_json_matches_document() {
        let t = TierTree::Markers {
            priority: 1,
            children: vec![
                TierTree::Connective {
                    priority: 2,
                    children: vec![
                        TierTree::Prefix {
                            priority: 3,
                            operator: tok("MINUS", "-", 0),
                            child: Box::new(TierTree::Base(tok("NUM", "1", 1))),
                        },
                        TierTree::Postfix {
                            priority: 4,
                            child: Box::new(TierTree::Bracket {
                                open: tok("LPAR", "(", 3),
                                child: Box::new(TierTree::Sequence(vec![
                                    TierTree::Base(tok("ID", "\"q\"", 4)),
                                    TierTree::Base(tok("ID", "y", 8)),
                                ])),
                                close: tok("RPAR", ")", 9),
                            }),
                            operator: tok("BANG", "!", 10),
                        },
                    ],
                    operators: vec![tok("PLUS", "+", 2)],
                },
                TierTree::Empty,
            ],
            markers: vec![tok("NL", "\n", 11)],
        };
        let direct = render_tree(&t, TreeFormat::Json);
        let via_doc = serde_json::to_string(&TreeDoc::from(&t)).unwrap();
        assert_eq!(direct, via_doc);
        assert_eq!(TreeDoc::from_json(&direct).unwrap(), TreeDoc::from(&t));
    }

    #[test]
    fn markers_sexpr_interleaves() {
        let t = TierTree::Markers {
            priority: 1,
            children: vec![
                TierTree::Sequence(vec![
                    TierTree::Base(tok("W", "a", 0)),
                    TierTree::Base(tok("W", "b", 2)),
                ]),
                TierTree::Empty,
            ],
            markers: vec![tok("NL", "\n", 3)],
        };
        assert_eq!(
            render_tree(&t, TreeFormat::Sexpr),
            r#"(markers:1 (seq W="a" W="b") NL="\n" ())"#
        );
        let lexemes: Vec<&str> = t.tokens().iter().map(|t| t.lexeme.as_str()).collect();
        assert_eq!(lexemes, ["a", "b", "\n"]);
        assert_eq!(TreeDoc::from(&t).lexemes(), lexemes);
    }
}
