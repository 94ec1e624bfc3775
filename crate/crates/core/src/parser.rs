//! Table-driven predictive parsing into tier parse trees.
//!
//! The parser runs the LL(1) table generated for a tier grammar and merges
//! helper nonterminals away while it goes: when a nonterminal that stands
//! for a rule application is popped from the stack, the parser decides
//! whether it carried an operator, marker or several items, and only then
//! reports a node. The core driver is push-based and emits events; building
//! a [`TierTree`] is one consumer of those events.
//!
//! Event order: `on_base`, `on_open` and `on_close` fire for their tokens in
//! input order. Operator and marker tokens are collected and handed to the
//! `on_node_end` of the node they belong to, which fires once the node is
//! complete. Replaying the events on a stack (push a leaf on `on_base`,
//! push the opener on `on_open`, wrap the top tree on `on_close`, and
//! replace the top `child_count` trees by one node on `on_node_end`)
//! rebuilds the tree. An empty item sequence is reported as a sequence node
//! with zero children, except for an empty input, which only fires
//! `on_end`; replaying that leaves no tree, which stands for `Empty`.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::grammar::{OperatorKind, TermClass, TierGrammar};
use crate::lexer::Token;
use crate::tables::{GrammarTables, Lookahead, Nonterminal, Symbol, TableError};
use crate::tree::TierTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Prefix,
    Postfix,
    Connective,
    Markers,
    /// Item sequence; zero children stands for the empty tree.
    Sequence,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeKind::Prefix => "prefix",
            NodeKind::Postfix => "postfix",
            NodeKind::Connective => "connective",
            NodeKind::Markers => "markers",
            NodeKind::Sequence => "seq",
        })
    }
}

/// A completed node, as reported to [`EventHandler::on_node_end`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeEnd {
    pub kind: NodeKind,
    /// Tier priority; 0 for sequences.
    pub priority: usize,
    /// Operator or marker tokens of the node, in input order.
    pub operators: Vec<Token>,
    pub child_count: usize,
}

/// Callbacks of the streaming API. All methods default to doing nothing.
pub trait EventHandler {
    fn on_base(&mut self, _token: Token) {}
    fn on_open(&mut self, _token: Token) {}
    fn on_close(&mut self, _token: Token) {}
    fn on_node_end(&mut self, _node: NodeEnd) {}
    fn on_end(&mut self) {}
}

/// Ignores every event; use it to only decide acceptance.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoEvents;

impl EventHandler for NoEvents {}

/// Where a parse error happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    /// Index of the offending token; the token count at end of input.
    pub index: usize,
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{}:{}: unexpected {}, {}", .position.line, .position.column, describe_found(.found), describe_expected(.expected, *.end_allowed))]
    Unexpected {
        position: Position,
        /// `None` at end of input.
        found: Option<Token>,
        /// Tokens that would have let the parse continue, in declaration
        /// order.
        expected: Vec<String>,
        /// Whether the input could have ended here.
        end_allowed: bool,
    },
    #[error("{}:{}: token {} is not classified by the grammar", .position.line, .position.column, .token)]
    UnclassifiedToken { position: Position, token: Token },
}

impl ParseError {
    pub fn position(&self) -> Position {
        match self {
            ParseError::Unexpected { position, .. } | ParseError::UnclassifiedToken { position, .. } => {
                *position
            }
        }
    }
}

fn describe_found(found: &Option<Token>) -> String {
    match found {
        Some(t) => t.to_string(),
        None => "end of input".to_string(),
    }
}

fn describe_expected(expected: &[String], end_allowed: bool) -> String {
    match (expected.is_empty(), end_allowed) {
        (true, true) => "expected end of input".to_string(),
        (true, false) => "no continuation possible".to_string(),
        (false, false) => format!("expected one of {}", expected.join(", ")),
        (false, true) => format!("expected one of {} or end of input", expected.join(", ")),
    }
}

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Item {
    T(u32),
    /// `tail` marks the recursive `D` inside `D -> E_1 D`, whose items
    /// belong to the enclosing sequence.
    N { nt: u32, tail: bool },
    Close,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FrameKind {
    Sequence,
    Operator(OperatorKind, usize),
    Markers(usize),
}

#[derive(Debug)]
struct CompiledProduction {
    /// Body in reverse, ready to be pushed.
    body: Vec<Item>,
    frame: Option<FrameKind>,
}

/// A reusable parser for one tier grammar.
#[derive(Debug)]
pub struct Parser {
    grammar: TierGrammar,
    tables: GrammarTables,
    term_ids: HashMap<String, u32>,
    terms: Vec<String>,
    classes: Vec<TermClass>,
    productions: Vec<CompiledProduction>,
    /// `nonterminals × (terminals + 1)`; the last column is `$`.
    cells: Vec<u32>,
    width: usize,
    start: u32,
}

/// Builds a parser (generated grammar, table and classification) for `g`.
pub fn build_parser(g: &TierGrammar) -> Result<Parser, TableError> {
    Parser::new(g)
}

impl Parser {
    pub fn new(g: &TierGrammar) -> Result<Parser, TableError> {
        let tables = GrammarTables::build(g)?;
        let cfg = &tables.cfg;
        let terms: Vec<String> = cfg.terminals().to_vec();
        let term_ids: HashMap<String, u32> = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let index = g.class_index();
        let classes = terms.iter().map(|t| index[t.as_str()]).collect();

        let nts = cfg.nonterminals();
        let nt_ids: HashMap<Nonterminal, u32> =
            nts.iter().enumerate().map(|(i, nt)| (*nt, i as u32)).collect();

        let productions = cfg
            .productions()
            .iter()
            .map(|p| {
                let body = p
                    .body
                    .iter()
                    .rev()
                    .map(|s| match s {
                        Symbol::Terminal(t) => Item::T(term_ids[t]),
                        Symbol::Nonterminal(nt) => Item::N {
                            nt: nt_ids[nt],
                            tail: p.head == Nonterminal::D && *nt == Nonterminal::D,
                        },
                    })
                    .collect();
                let frame = match p.head {
                    Nonterminal::D => Some(FrameKind::Sequence),
                    Nonterminal::Q(i) => Some(FrameKind::Markers(i)),
                    Nonterminal::E(i) => {
                        let kind = g.operator_tiers[i - 1].kind;
                        let applies_prefix = matches!(p.body.first(), Some(Symbol::Terminal(_)));
                        (kind != OperatorKind::Prefix || applies_prefix)
                            .then_some(FrameKind::Operator(kind, i))
                    }
                    _ => None,
                };
                CompiledProduction { body, frame }
            })
            .collect();

        let width = terms.len() + 1;
        let mut cells = vec![NONE; nts.len() * width];
        for ((nt, la), &prod) in tables.table.cells() {
            let col = match la {
                Lookahead::Terminal(t) => term_ids[t] as usize,
                Lookahead::End => terms.len(),
            };
            cells[nt_ids[nt] as usize * width + col] = prod as u32;
        }

        Ok(Parser {
            grammar: g.clone(),
            start: nt_ids[&Nonterminal::S],
            tables,
            term_ids,
            terms,
            classes,
            productions,
            cells,
            width,
        })
    }

    pub fn grammar(&self) -> &TierGrammar {
        &self.grammar
    }

    pub fn tables(&self) -> &GrammarTables {
        &self.tables
    }

    /// Terminal index used by [`Session::push_terminal`].
    pub fn terminal_id(&self, name: &str) -> Option<usize> {
        self.term_ids.get(name).map(|&i| i as usize)
    }

    pub fn terminals(&self) -> &[String] {
        &self.terms
    }

    /// Starts an incremental parse.
    pub fn session(&self) -> Session<'_> {
        Session {
            parser: self,
            stack: vec![Item::N {
                nt: self.start,
                tail: false,
            }],
            frames: Vec::new(),
            trees: 0,
            consumed: 0,
            end: (0, 1, 1),
            error: None,
        }
    }

    /// Parses a complete token list into its tier parse tree.
    pub fn parse(&self, tokens: &[Token]) -> Result<TierTree, ParseError> {
        let mut builder = TreeBuilder::default();
        self.parse_events(tokens, &mut builder)?;
        Ok(builder.finish())
    }

    /// Streams events for `tokens` into `handler`. No events follow an
    /// error.
    pub fn parse_events<H: EventHandler>(
        &self,
        tokens: &[Token],
        handler: &mut H,
    ) -> Result<(), ParseError> {
        let mut session = self.session();
        for tok in tokens {
            session.push(tok.clone(), handler)?;
        }
        session.finish(handler)
    }

    /// Acceptance of a string of terminal names.
    pub fn accepts<T: AsRef<str>>(&self, tokens: &[T]) -> bool {
        let mut r = self.recognizer();
        tokens.iter().all(|t| r.push(t.as_ref())) && r.accepts_end()
    }
}

#[derive(Debug, Clone)]
struct Frame {
    kind: FrameKind,
    /// Completed trees before the frame opened.
    base: usize,
    operators: Vec<Token>,
}

/// An in-progress parse. Feed tokens with [`push`](Self::push) and close
/// with [`finish`](Self::finish). Memory is bounded by the parse stack plus
/// the operator tokens of the nodes still open.
#[derive(Debug, Clone)]
pub struct Session<'p> {
    parser: &'p Parser,
    stack: Vec<Item>,
    frames: Vec<Frame>,
    /// Completed trees that the event stream has produced and not yet
    /// folded into a parent node.
    trees: usize,
    consumed: usize,
    /// Offset, line and column just past the last token.
    end: (usize, usize, usize),
    error: Option<ParseError>,
}

impl<'p> Session<'p> {
    /// Number of tokens consumed so far.
    pub fn consumed(&self) -> usize {
        self.consumed
    }

    pub fn push<H: EventHandler>(&mut self, token: Token, handler: &mut H) -> Result<(), ParseError> {
        if let Some(e) = &self.error {
            return Err(e.clone());
        }
        match self.parser.term_ids.get(&token.name) {
            Some(&id) => self.push_terminal(id as usize, token, handler),
            None => {
                let err = ParseError::UnclassifiedToken {
                    position: self.token_position(&token),
                    token,
                };
                self.error = Some(err.clone());
                Err(err)
            }
        }
    }

    /// Like [`push`](Self::push) with the terminal index already resolved
    /// (see [`Parser::terminal_id`]).
    pub fn push_terminal<H: EventHandler>(
        &mut self,
        id: usize,
        token: Token,
        handler: &mut H,
    ) -> Result<(), ParseError> {
        if let Some(e) = &self.error {
            return Err(e.clone());
        }
        let result = self.step(id, Some(token), handler);
        if let Err(e) = &result {
            self.error = Some(e.clone());
        }
        result
    }

    /// Ends the input. Fires `on_end` on success.
    pub fn finish<H: EventHandler>(&mut self, handler: &mut H) -> Result<(), ParseError> {
        if let Some(e) = &self.error {
            return Err(e.clone());
        }
        match self.step(self.parser.terms.len(), None, handler) {
            Ok(()) => {
                handler.on_end();
                Ok(())
            }
            Err(e) => {
                self.error = Some(e.clone());
                Err(e)
            }
        }
    }

    fn step<H: EventHandler>(
        &mut self,
        la: usize,
        token: Option<Token>,
        handler: &mut H,
    ) -> Result<(), ParseError> {
        let parser = self.parser;
        loop {
            let Some(item) = self.stack.pop() else {
                return match token {
                    None => Ok(()),
                    Some(tok) => Err(self.unexpected(Some(tok))),
                };
            };
            match item {
                Item::T(t) => {
                    if t as usize == la {
                        let tok = token.expect("terminal matched a real token");
                        self.shift(la, tok, handler);
                        return Ok(());
                    }
                    self.stack.push(item);
                    return Err(self.unexpected(token));
                }
                Item::Close => self.close_frame(handler),
                Item::N { nt, tail } => {
                    let cell = parser.cells[nt as usize * parser.width + la];
                    if cell == NONE {
                        self.stack.push(item);
                        return Err(self.unexpected(token));
                    }
                    let prod = &parser.productions[cell as usize];
                    match if tail { None } else { prod.frame } {
                        // Empty input reports nothing but `on_end`.
                        Some(FrameKind::Sequence) if prod.body.is_empty() && self.consumed == 0 && token.is_none() => {}
                        Some(FrameKind::Sequence) if prod.body.is_empty() => {
                            handler.on_node_end(NodeEnd {
                                kind: NodeKind::Sequence,
                                priority: 0,
                                operators: Vec::new(),
                                child_count: 0,
                            });
                            self.trees += 1;
                        }
                        Some(kind) => {
                            self.stack.push(Item::Close);
                            self.frames.push(Frame {
                                kind,
                                base: self.trees,
                                operators: Vec::new(),
                            });
                        }
                        None => {}
                    }
                    self.stack.extend_from_slice(&prod.body);
                }
            }
        }
    }

    fn shift<H: EventHandler>(&mut self, id: usize, tok: Token, handler: &mut H) {
        self.consumed += 1;
        let (line, column) = tok.end_position();
        self.end = (tok.span.end, line, column);
        match self.parser.classes[id] {
            TermClass::Base => {
                self.trees += 1;
                handler.on_base(tok);
            }
            TermClass::Open => handler.on_open(tok),
            TermClass::Close => handler.on_close(tok),
            TermClass::Marker(_)
            | TermClass::Prefix(_)
            | TermClass::Postfix(_)
            | TermClass::Connective(_) => self
                .frames
                .last_mut()
                .expect("operators are shifted inside their node")
                .operators
                .push(tok),
            TermClass::Unclassified => unreachable!("table only holds classified terminals"),
        }
    }

    fn close_frame<H: EventHandler>(&mut self, handler: &mut H) {
        let frame = self.frames.pop().expect("close marker without frame");
        let children = self.trees - frame.base;
        let (kind, priority) = match frame.kind {
            FrameKind::Sequence if children >= 2 => (NodeKind::Sequence, 0),
            FrameKind::Sequence => return,
            _ if frame.operators.is_empty() => return,
            FrameKind::Operator(OperatorKind::Prefix, i) => (NodeKind::Prefix, i),
            FrameKind::Operator(OperatorKind::Postfix, i) => (NodeKind::Postfix, i),
            FrameKind::Operator(OperatorKind::Connective, i) => (NodeKind::Connective, i),
            FrameKind::Markers(i) => (NodeKind::Markers, i),
        };
        debug_assert!(match kind {
            NodeKind::Prefix | NodeKind::Postfix => children == 1,
            NodeKind::Connective | NodeKind::Markers => children == frame.operators.len() + 1,
            NodeKind::Sequence => true,
        });
        self.trees = frame.base + 1;
        handler.on_node_end(NodeEnd {
            kind,
            priority,
            operators: frame.operators,
            child_count: children,
        });
    }

    fn token_position(&self, tok: &Token) -> Position {
        Position {
            index: self.consumed,
            offset: tok.span.start,
            line: tok.span.line,
            column: tok.span.column,
        }
    }

    fn unexpected(&self, found: Option<Token>) -> ParseError {
        let position = match &found {
            Some(tok) => self.token_position(tok),
            None => Position {
                index: self.consumed,
                offset: self.end.0,
                line: self.end.1,
                column: self.end.2,
            },
        };
        let expected = (0..self.parser.terms.len())
            .filter(|&t| self.viable(t))
            .map(|t| self.parser.terms[t].clone())
            .collect();
        ParseError::Unexpected {
            position,
            found,
            expected,
            end_allowed: self.viable(self.parser.terms.len()),
        }
    }

    fn viable(&self, la: usize) -> bool {
        let mut stack = self.stack.clone();
        self.parser.advance(&mut stack, la)
    }
}

impl Parser {
    /// Expands `stack` until lookahead `la` is consumed. Returns false when
    /// `la` cannot be consumed; `stack` is then unspecified.
    fn advance(&self, stack: &mut Vec<Item>, la: usize) -> bool {
        while let Some(item) = stack.pop() {
            match item {
                Item::T(t) => return t as usize == la,
                Item::Close => {}
                Item::N { nt, .. } => {
                    let cell = self.cells[nt as usize * self.width + la];
                    if cell == NONE {
                        return false;
                    }
                    stack.extend_from_slice(&self.productions[cell as usize].body);
                }
            }
        }
        la == self.terms.len()
    }

    /// Starts an acceptance-only parse.
    pub fn recognizer(&self) -> Recognizer<'_> {
        Recognizer {
            parser: self,
            stack: vec![Item::N {
                nt: self.start,
                tail: false,
            }],
            dead: false,
        }
    }
}

/// A parse that only tracks acceptance. It holds the bare prediction stack,
/// so cloning it to explore several continuations is cheap.
#[derive(Debug, Clone)]
pub struct Recognizer<'p> {
    parser: &'p Parser,
    stack: Vec<Item>,
    dead: bool,
}

impl Recognizer<'_> {
    /// Consumes the terminal with index `id` (see [`Parser::terminal_id`]).
    /// Returns false once the input can no longer be completed.
    pub fn push_id(&mut self, id: usize) -> bool {
        if !self.dead {
            self.dead = id >= self.parser.terms.len() || !self.parser.advance(&mut self.stack, id);
        }
        !self.dead
    }

    pub fn push(&mut self, name: &str) -> bool {
        match self.parser.terminal_id(name) {
            Some(id) => self.push_id(id),
            None => {
                self.dead = true;
                false
            }
        }
    }

    /// Whether the input may end here.
    pub fn accepts_end(&self) -> bool {
        !self.dead && self.parser.advance(&mut self.stack.clone(), self.parser.terms.len())
    }

    pub fn is_dead(&self) -> bool {
        self.dead
    }
}

#[derive(Debug)]
enum Slot {
    Tree(TierTree),
    Open(Token),
}

/// Rebuilds a [`TierTree`] from the event stream.
#[derive(Debug, Default)]
pub struct TreeBuilder {
    stack: Vec<Slot>,
}

impl TreeBuilder {
    fn pop_tree(&mut self) -> TierTree {
        match self.stack.pop() {
            Some(Slot::Tree(t)) => t,
            other => panic!("event stream out of order: expected a tree, found {other:?}"),
        }
    }

    fn pop_trees(&mut self, n: usize) -> Vec<TierTree> {
        let mut out: Vec<TierTree> = (0..n).map(|_| self.pop_tree()).collect();
        out.reverse();
        out
    }

    /// The finished tree; `Empty` if no event arrived. Panics on a stream
    /// that leaves more than one tree.
    pub fn finish(mut self) -> TierTree {
        if self.stack.is_empty() {
            return TierTree::Empty;
        }
        let tree = self.pop_tree();
        assert!(self.stack.is_empty(), "event stream left unfinished nodes");
        tree
    }
}

impl EventHandler for TreeBuilder {
    fn on_base(&mut self, token: Token) {
        self.stack.push(Slot::Tree(TierTree::Base(token)));
    }

    fn on_open(&mut self, token: Token) {
        self.stack.push(Slot::Open(token));
    }

    fn on_close(&mut self, close: Token) {
        let child = self.pop_tree();
        let Some(Slot::Open(open)) = self.stack.pop() else {
            panic!("event stream out of order: closing bracket without opener");
        };
        self.stack.push(Slot::Tree(TierTree::Bracket {
            open,
            child: Box::new(child),
            close,
        }));
    }

    fn on_node_end(&mut self, node: NodeEnd) {
        let mut children = self.pop_trees(node.child_count);
        let priority = node.priority;
        let mut ops = node.operators;
        let tree = match node.kind {
            NodeKind::Sequence if children.is_empty() => TierTree::Empty,
            NodeKind::Sequence => TierTree::Sequence(children),
            NodeKind::Prefix => TierTree::Prefix {
                priority,
                operator: ops.pop().expect("prefix operator"),
                child: Box::new(children.pop().expect("prefix operand")),
            },
            NodeKind::Postfix => TierTree::Postfix {
                priority,
                child: Box::new(children.pop().expect("postfix operand")),
                operator: ops.pop().expect("postfix operator"),
            },
            NodeKind::Connective => TierTree::Connective {
                priority,
                children,
                operators: ops,
            },
            NodeKind::Markers => TierTree::Markers {
                priority,
                children,
                markers: ops,
            },
        };
        self.stack.push(Slot::Tree(tree));
    }
}
