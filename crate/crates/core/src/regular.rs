//! The language of a tier grammar as a regular expression over terminals,
//! with the start symbol `S` standing in for bracketed contents.
//!
//! The expression is built from the inside out: alternatives of base items
//! and bracketed `S`, wrapped once per operator tier from the highest
//! priority down, starred into item sequences, then wrapped once per marker
//! tier. Grammars without brackets never mention `S`, so their expression
//! is a plain regular expression.

use std::collections::HashMap;
use std::fmt;

use regex_automata::dfa::{dense, Automaton, StartKind};
use regex_automata::util::primitives::StateID;
use regex_automata::util::start;
use regex_automata::Anchored;
use regex_syntax::hir::{HirKind, Literal};
use thiserror::Error;

use crate::grammar::{GrammarError, OperatorKind, TierGrammar};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RegexAst {
    Literal(String),
    /// The start symbol, which generates the contents of brackets.
    NonterminalRef,
    Concat(Vec<RegexAst>),
    Alt(Vec<RegexAst>),
    Star(Box<RegexAst>),
    EmptyString,
}

#[derive(Debug, Error)]
pub enum RegularError {
    #[error(transparent)]
    InvalidGrammar(#[from] GrammarError),
    #[error("grammar has brackets; its language need not be regular")]
    HasBrackets,
    #[error("token `{0}` is not a single literal character")]
    NotSingleChar(String),
    #[error("regular expression does not compile: {0}")]
    Compile(String),
}

fn alt_of<'a>(names: impl IntoIterator<Item = &'a String>) -> RegexAst {
    let mut items: Vec<RegexAst> = names.into_iter().cloned().map(RegexAst::Literal).collect();
    if items.len() == 1 {
        items.pop().unwrap()
    } else {
        RegexAst::Alt(items)
    }
}

/// `R (X R)*`
fn separated(r: RegexAst, seps: RegexAst) -> RegexAst {
    RegexAst::Concat(vec![
        r.clone(),
        RegexAst::Star(Box::new(RegexAst::Concat(vec![seps, r]))),
    ])
}

/// Terminals of a set in token declaration order.
fn ordered<'a>(g: &'a TierGrammar, set: &std::collections::BTreeSet<String>) -> Vec<&'a String> {
    g.tokens
        .iter()
        .map(|t| &t.name)
        .filter(|n| set.contains(*n))
        .collect()
}

/// The body of the single production `S -> body` describing the language.
pub fn to_regular_cfg(g: &TierGrammar) -> Result<RegexAst, RegularError> {
    g.ensure_valid()?;
    let mut atoms: Vec<RegexAst> = ordered(g, &g.base)
        .into_iter()
        .cloned()
        .map(RegexAst::Literal)
        .collect();
    if g.has_brackets() {
        atoms.push(RegexAst::Concat(vec![
            alt_of(ordered(g, &g.open)),
            RegexAst::NonterminalRef,
            alt_of(ordered(g, &g.close)),
        ]));
    }
    // With no atoms the item language is empty and stays empty through the
    // operator tiers; only the empty sequence survives.
    let mut item = match atoms.len() {
        0 => None,
        1 => atoms.pop(),
        _ => Some(RegexAst::Alt(atoms)),
    };
    if let Some(r) = item.as_mut() {
        for tier in g.operator_tiers.iter().rev() {
            let ops = alt_of(ordered(g, &tier.terminals));
            let inner = std::mem::replace(r, RegexAst::EmptyString);
            *r = match tier.kind {
                OperatorKind::Postfix => {
                    let mut choices = vec![RegexAst::EmptyString];
                    match ops {
                        RegexAst::Alt(v) => choices.extend(v),
                        one => choices.push(one),
                    }
                    RegexAst::Concat(vec![inner, RegexAst::Alt(choices)])
                }
                OperatorKind::Prefix => RegexAst::Concat(vec![RegexAst::Star(Box::new(ops)), inner]),
                OperatorKind::Connective => separated(inner, ops),
            };
        }
    }
    let mut r = match item {
        Some(r) => RegexAst::Star(Box::new(r)),
        None => RegexAst::EmptyString,
    };
    for tier in g.marker_tiers.iter().rev() {
        r = separated(r, alt_of(ordered(g, tier)));
    }
    Ok(r)
}

/// The language of a bracket-free grammar as a regular expression.
pub fn to_regex(g: &TierGrammar) -> Result<RegexAst, RegularError> {
    g.ensure_valid()?;
    if g.has_brackets() {
        return Err(RegularError::HasBrackets);
    }
    to_regular_cfg(g)
}

impl RegexAst {
    pub fn contains_nonterminal(&self) -> bool {
        match self {
            RegexAst::NonterminalRef => true,
            RegexAst::Literal(_) | RegexAst::EmptyString => false,
            RegexAst::Concat(v) | RegexAst::Alt(v) => v.iter().any(RegexAst::contains_nonterminal),
            RegexAst::Star(r) => r.contains_nonterminal(),
        }
    }

    /// Renders with token names mapped through `atom` and concatenation
    /// joined by `sep`. Parentheses appear only where precedence needs them;
    /// an alternation that starts with the empty string prints as `X?`.
    pub fn render_with(&self, atom: &dyn Fn(&str) -> String, sep: &str) -> String {
        let mut out = String::new();
        self.write(atom, sep, &mut out);
        out
    }

    fn precedence(&self) -> u8 {
        match self {
            RegexAst::Alt(v) if v.first() == Some(&RegexAst::EmptyString) => 3,
            RegexAst::Alt(_) => 1,
            RegexAst::Concat(_) => 2,
            _ => 3,
        }
    }

    fn write_at(&self, min: u8, atom: &dyn Fn(&str) -> String, sep: &str, out: &mut String) {
        if self.precedence() < min {
            out.push('(');
            self.write(atom, sep, out);
            out.push(')');
        } else {
            self.write(atom, sep, out);
        }
    }

    fn write(&self, atom: &dyn Fn(&str) -> String, sep: &str, out: &mut String) {
        match self {
            RegexAst::Literal(name) => out.push_str(&atom(name)),
            RegexAst::NonterminalRef => out.push('S'),
            RegexAst::EmptyString => out.push_str("()"),
            RegexAst::Concat(items) => {
                for (i, r) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(sep);
                    }
                    r.write_at(2, atom, sep, out);
                }
            }
            RegexAst::Alt(items) if items.first() == Some(&RegexAst::EmptyString) => {
                let rest = &items[1..];
                match rest {
                    [] => out.push_str("()"),
                    [one] => one.write_at(3, atom, sep, out),
                    _ => {
                        out.push('(');
                        RegexAst::Alt(rest.to_vec()).write(atom, sep, out);
                        out.push(')');
                    }
                }
                if !rest.is_empty() {
                    out.push('?');
                }
            }
            RegexAst::Alt(items) => {
                for (i, r) in items.iter().enumerate() {
                    if i > 0 {
                        out.push('|');
                    }
                    r.write_at(2, atom, sep, out);
                }
            }
            RegexAst::Star(r) => {
                r.write_at(3, atom, sep, out);
                out.push('*');
            }
        }
    }
}

impl fmt::Display for RegexAst {
    /// Token names as atoms separated by spaces, e.g. `W (COMMA W)*`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_with(&|n| n.to_string(), " "))
    }
}

/// The single character a pattern matches, if it matches exactly one.
fn single_char(pattern: &str) -> Option<char> {
    let hir = regex_syntax::parse(pattern).ok()?;
    match hir.kind() {
        HirKind::Literal(Literal(bytes)) => {
            let s = std::str::from_utf8(bytes).ok()?;
            let mut chars = s.chars();
            let c = chars.next()?;
            chars.next().is_none().then_some(c)
        }
        _ => None,
    }
}

/// Renders a bracket-free grammar's expression over input characters.
/// Every classified token's pattern must be a single literal character.
pub fn to_char_regex(g: &TierGrammar) -> Result<String, RegularError> {
    let ast = to_regex(g)?;
    let mut chars = HashMap::new();
    for def in &g.tokens {
        if g.classify(&def.name) == crate::grammar::TermClass::Unclassified {
            continue;
        }
        let c = single_char(&def.pattern).ok_or_else(|| RegularError::NotSingleChar(def.name.clone()))?;
        chars.insert(def.name.as_str(), c);
    }
    Ok(ast.render_with(&|n| regex_syntax::escape(&chars[n].to_string()), ""))
}

/// A compiled token-level matcher for a bracket-free grammar.
///
/// Tokens are fed one at a time through an automaton, so a caller walking
/// many strings with shared prefixes can reuse states.
#[derive(Debug, Clone)]
pub struct TokenRegex {
    dfa: dense::DFA<Vec<u32>>,
    bytes: HashMap<String, u8>,
    start: StateID,
}

/// A matcher state; copyable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchState(StateID);

impl TokenRegex {
    pub fn new(g: &TierGrammar) -> Result<TokenRegex, RegularError> {
        let ast = to_regex(g)?;
        let names = g.terminals();
        if names.len() > 255 {
            return Err(RegularError::Compile("more than 255 terminals".into()));
        }
        let bytes: HashMap<String, u8> = names
            .into_iter()
            .enumerate()
            .map(|(i, n)| (n, i as u8 + 1))
            .collect();
        let pattern = ast.render_with(&|n| format!(r"\x{:02X}", bytes[n]), "");
        let dfa = dense::Builder::new()
            .configure(dense::Config::new().start_kind(StartKind::Anchored))
            .syntax(regex_automata::util::syntax::Config::new().unicode(false).utf8(false))
            .build(&pattern)
            .map_err(|e| RegularError::Compile(e.to_string()))?;
        let start = dfa
            .start_state(&start::Config::new().anchored(Anchored::Yes))
            .map_err(|e| RegularError::Compile(e.to_string()))?;
        Ok(TokenRegex { dfa, bytes, start })
    }

    pub fn start(&self) -> MatchState {
        MatchState(self.start)
    }

    /// Advances by one token. Unknown tokens lead to the dead state.
    pub fn step(&self, state: MatchState, name: &str) -> MatchState {
        match self.bytes.get(name) {
            Some(&b) => MatchState(self.dfa.next_state(state.0, b)),
            None => MatchState(self.dfa.next_state(state.0, 0)),
        }
    }

    /// Whether no continuation can match any more.
    pub fn is_dead(&self, state: MatchState) -> bool {
        self.dfa.is_dead_state(state.0)
    }

    /// Whether the tokens fed so far form a complete match.
    pub fn is_accepting(&self, state: MatchState) -> bool {
        let eoi = self.dfa.next_eoi_state(state.0);
        self.dfa.is_match_state(eoi)
    }

    pub fn is_match<T: AsRef<str>>(&self, tokens: &[T]) -> bool {
        let mut s = self.start();
        for t in tokens {
            s = self.step(s, t.as_ref());
            if self.is_dead(s) {
                return false;
            }
        }
        self.is_accepting(s)
    }
}
