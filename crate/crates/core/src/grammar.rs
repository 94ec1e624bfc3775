//! Tier grammars: terminal classes, priority tiers and the JSON grammar file.
//!
//! A tier grammar has no productions. It assigns every (non-skip) token to
//! one of seven classes: base terminals, opening brackets, closing brackets,
//! markers, postfixes, prefixes and connectives. Markers are split into
//! marker tiers; postfixes, prefixes and connectives share one ladder of
//! operator tiers where each tier holds exactly one kind of operator.
//! Tier 1 is the loosest binding (outermost) level.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexer::OTHER;

/// Version number written to and accepted from grammar files.
pub const FORMAT_VERSION: u64 = 1;

/// A lexical definition: token name plus the pattern that recognizes it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenDef {
    pub name: String,
    pub pattern: String,
    /// Discarded after lexing (whitespace, comments).
    #[serde(default)]
    pub skip: bool,
}

impl TokenDef {
    pub fn new(name: impl Into<String>, pattern: impl Into<String>) -> Self {
        TokenDef {
            name: name.into(),
            pattern: pattern.into(),
            skip: false,
        }
    }

    pub fn skipped(name: impl Into<String>, pattern: impl Into<String>) -> Self {
        TokenDef {
            skip: true,
            ..TokenDef::new(name, pattern)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Prefix,
    Postfix,
    Connective,
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatorKind::Prefix => "prefix",
            OperatorKind::Postfix => "postfix",
            OperatorKind::Connective => "connective",
        })
    }
}

/// One operator priority level. A tier holds a single kind of operator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorTier {
    pub kind: OperatorKind,
    pub terminals: BTreeSet<String>,
}

impl OperatorTier {
    pub fn new<I, S>(kind: OperatorKind, terminals: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        OperatorTier {
            kind,
            terminals: terminals.into_iter().map(Into::into).collect(),
        }
    }
}

/// The class (and priority, where applicable) of a single token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TermClass {
    Base,
    Open,
    Close,
    Marker(usize),
    Prefix(usize),
    Postfix(usize),
    Connective(usize),
    Unclassified,
}

impl TermClass {
    fn for_operator(kind: OperatorKind, priority: usize) -> TermClass {
        match kind {
            OperatorKind::Prefix => TermClass::Prefix(priority),
            OperatorKind::Postfix => TermClass::Postfix(priority),
            OperatorKind::Connective => TermClass::Connective(priority),
        }
    }
}

impl fmt::Display for TermClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermClass::Base => f.write_str("base"),
            TermClass::Open => f.write_str("open"),
            TermClass::Close => f.write_str("close"),
            TermClass::Marker(i) => write!(f, "marker tier {i}"),
            TermClass::Prefix(i) => write!(f, "prefix tier {i}"),
            TermClass::Postfix(i) => write!(f, "postfix tier {i}"),
            TermClass::Connective(i) => write!(f, "connective tier {i}"),
            TermClass::Unclassified => f.write_str("unclassified"),
        }
    }
}

/// Identifies a tier in diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TierRef {
    Marker(usize),
    Operator(usize),
}

impl fmt::Display for TierRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TierRef::Marker(i) => write!(f, "marker tier {i}"),
            TierRef::Operator(i) => write!(f, "operator tier {i}"),
        }
    }
}

/// A broken grammar invariant, as reported by [`TierGrammar::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarViolation {
    #[error("token `{name}` is declared more than once")]
    DuplicateToken { name: String },
    #[error("token `{name}` has an empty name or pattern")]
    EmptyDefinition { name: String },
    #[error("`{name}` is classified but not declared as a token")]
    UndeclaredToken { name: String },
    #[error("skip token `{name}` cannot be classified")]
    SkipTokenClassified { name: String },
    #[error("token `{name}` is in both {first} and {second}")]
    DisjointnessViolation {
        name: String,
        first: TermClass,
        second: TermClass,
    },
    #[error("opening and closing bracket classes must be both empty or both non-empty")]
    UnbalancedBracketClasses,
    #[error("{tier} is empty")]
    EmptyTier { tier: TierRef },
}

#[derive(Debug, Error)]
pub enum GrammarError {
    #[error("malformed grammar document: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("unsupported grammar format version {0} (expected {FORMAT_VERSION})")]
    UnsupportedVersion(u64),
    #[error("invalid grammar: {}", join_violations(.0))]
    Invalid(Vec<GrammarViolation>),
    #[error("`{0}` is not a classified non-base token")]
    UnknownToken(String),
}

impl GrammarError {
    /// The violations behind an `Invalid` error, empty otherwise.
    pub fn violations(&self) -> &[GrammarViolation] {
        match self {
            GrammarError::Invalid(v) => v,
            _ => &[],
        }
    }
}

fn join_violations(v: &[GrammarViolation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// A tier grammar: token definitions plus the class assignment.
///
/// The struct is plain data; [`validate`](Self::validate) reports whether the
/// class invariants hold, and everything that consumes a grammar validates it
/// first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TierGrammar {
    pub tokens: Vec<TokenDef>,
    pub base: BTreeSet<String>,
    pub open: BTreeSet<String>,
    pub close: BTreeSet<String>,
    /// Index 0 is marker priority 1 (outermost grouping).
    pub marker_tiers: Vec<BTreeSet<String>>,
    /// Index 0 is operator priority 1 (loosest binding).
    pub operator_tiers: Vec<OperatorTier>,
}

fn names<I, S>(items: I) -> BTreeSet<String>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    items.into_iter().map(Into::into).collect()
}

impl TierGrammar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_token(mut self, name: &str, pattern: &str) -> Self {
        self.tokens.push(TokenDef::new(name, pattern));
        self
    }

    pub fn with_skip_token(mut self, name: &str, pattern: &str) -> Self {
        self.tokens.push(TokenDef::skipped(name, pattern));
        self
    }

    pub fn with_base<I, S>(mut self, items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.base.extend(names(items));
        self
    }

    pub fn with_brackets<I, J, S, T>(mut self, open: I, close: J) -> Self
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        self.open.extend(names(open));
        self.close.extend(names(close));
        self
    }

    /// Appends a marker tier one priority above the current highest.
    pub fn with_marker_tier<I, S>(mut self, items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.marker_tiers.push(names(items));
        self
    }

    /// Appends an operator tier one priority above the current highest.
    pub fn with_operator_tier<I, S>(mut self, kind: OperatorKind, items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.operator_tiers.push(OperatorTier::new(kind, items));
        self
    }

    /// Number of marker tiers (the highest marker priority).
    pub fn marker_tier_count(&self) -> usize {
        self.marker_tiers.len()
    }

    /// Number of operator tiers (the highest operator priority).
    pub fn operator_tier_count(&self) -> usize {
        self.operator_tiers.len()
    }

    pub fn has_brackets(&self) -> bool {
        !self.open.is_empty() || !self.close.is_empty()
    }

    /// Operator terminals of the given kind at `priority` (1-based); empty
    /// when the tier has another kind or does not exist.
    pub fn operators(&self, kind: OperatorKind, priority: usize) -> Option<&BTreeSet<String>> {
        self.operator_tiers
            .get(priority.checked_sub(1)?)
            .filter(|t| t.kind == kind)
            .map(|t| &t.terminals)
    }

    /// Every class assignment as `(token, class)`, in class order.
    pub fn assignments(&self) -> impl Iterator<Item = (&str, TermClass)> + '_ {
        let base = self.base.iter().map(|t| (t.as_str(), TermClass::Base));
        let open = self.open.iter().map(|t| (t.as_str(), TermClass::Open));
        let close = self.close.iter().map(|t| (t.as_str(), TermClass::Close));
        let markers = self
            .marker_tiers
            .iter()
            .enumerate()
            .flat_map(|(i, tier)| tier.iter().map(move |t| (t.as_str(), TermClass::Marker(i + 1))));
        let operators = self.operator_tiers.iter().enumerate().flat_map(|(i, tier)| {
            tier.terminals
                .iter()
                .map(move |t| (t.as_str(), TermClass::for_operator(tier.kind, i + 1)))
        });
        base.chain(open).chain(close).chain(markers).chain(operators)
    }

    /// Returns the class of `name`, or `Unclassified` for unknown names.
    pub fn classify(&self, name: &str) -> TermClass {
        self.assignments()
            .find(|(t, _)| *t == name)
            .map(|(_, c)| c)
            .unwrap_or(TermClass::Unclassified)
    }

    /// A lookup table from token name to class. Built in one pass; use this
    /// instead of repeated [`classify`](Self::classify) calls.
    pub fn class_index(&self) -> HashMap<&str, TermClass> {
        self.assignments().collect()
    }

    /// Classified terminals in token declaration order. Classified names
    /// without a declaration (only possible in invalid grammars) follow in
    /// class order.
    pub fn terminals(&self) -> Vec<String> {
        let index = self.class_index();
        let mut out: Vec<String> = self
            .tokens
            .iter()
            .filter(|t| index.contains_key(t.name.as_str()))
            .map(|t| t.name.clone())
            .collect();
        for (name, _) in self.assignments() {
            if !out.iter().any(|t| t == name) {
                out.push(name.to_string());
            }
        }
        out
    }

    /// Checks every class invariant. An empty report means the grammar is
    /// valid.
    pub fn validate(&self) -> Vec<GrammarViolation> {
        let mut report = Vec::new();

        let mut declared: HashMap<&str, &TokenDef> = HashMap::new();
        for def in &self.tokens {
            if def.name.is_empty() || def.pattern.is_empty() {
                report.push(GrammarViolation::EmptyDefinition {
                    name: def.name.clone(),
                });
            }
            if declared.insert(def.name.as_str(), def).is_some() {
                report.push(GrammarViolation::DuplicateToken {
                    name: def.name.clone(),
                });
            }
        }

        let mut seen: HashMap<&str, TermClass> = HashMap::new();
        for (name, class) in self.assignments() {
            match seen.get(name) {
                Some(&first) => report.push(GrammarViolation::DisjointnessViolation {
                    name: name.to_string(),
                    first,
                    second: class,
                }),
                None => {
                    seen.insert(name, class);
                    match declared.get(name) {
                        None => report.push(GrammarViolation::UndeclaredToken {
                            name: name.to_string(),
                        }),
                        Some(def) if def.skip => {
                            report.push(GrammarViolation::SkipTokenClassified {
                                name: name.to_string(),
                            })
                        }
                        Some(_) => {}
                    }
                }
            }
        }

        if self.open.is_empty() != self.close.is_empty() {
            report.push(GrammarViolation::UnbalancedBracketClasses);
        }
        for (i, tier) in self.marker_tiers.iter().enumerate() {
            if tier.is_empty() {
                report.push(GrammarViolation::EmptyTier {
                    tier: TierRef::Marker(i + 1),
                });
            }
        }
        for (i, tier) in self.operator_tiers.iter().enumerate() {
            if tier.terminals.is_empty() {
                report.push(GrammarViolation::EmptyTier {
                    tier: TierRef::Operator(i + 1),
                });
            }
        }
        report
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Returns `Ok(())` or an `Invalid` error carrying the full report.
    pub fn ensure_valid(&self) -> Result<(), GrammarError> {
        let report = self.validate();
        if report.is_empty() {
            Ok(())
        } else {
            Err(GrammarError::Invalid(report))
        }
    }

    /// Reclassifies `moves` as base terminals.
    ///
    /// Tiers left empty are dropped and the remaining tiers renumbered
    /// densely in their original order. Every string of the original
    /// language in which the demoted brackets are balanced stays in the
    /// language of the result, which is what makes parsing with an
    /// incomplete grammar safe.
    pub fn demote<I, S>(&self, moves: I) -> Result<TierGrammar, GrammarError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.ensure_valid()?;
        let mut out = self.clone();
        for m in moves {
            let name = m.as_ref();
            let removed = match self.classify(name) {
                TermClass::Base | TermClass::Unclassified => false,
                TermClass::Open => out.open.remove(name),
                TermClass::Close => out.close.remove(name),
                TermClass::Marker(i) => out.marker_tiers[i - 1].remove(name),
                TermClass::Prefix(i) | TermClass::Postfix(i) | TermClass::Connective(i) => {
                    out.operator_tiers[i - 1].terminals.remove(name)
                }
            };
            if !removed {
                return Err(GrammarError::UnknownToken(name.to_string()));
            }
            out.base.insert(name.to_string());
        }
        out.marker_tiers.retain(|t| !t.is_empty());
        out.operator_tiers.retain(|t| !t.terminals.is_empty());
        out.ensure_valid()?;
        Ok(out)
    }

    /// The grammar used for lenient input: `OTHER` (the name lenient lexing
    /// gives to unmatched text) becomes a base terminal. A grammar that
    /// already declares `OTHER` is returned unchanged.
    pub fn with_implicit_other(&self) -> TierGrammar {
        let mut out = self.clone();
        if !out.tokens.iter().any(|t| t.name == OTHER) {
            // Never matches; lenient lexing produces OTHER tokens itself.
            out.tokens.push(TokenDef::new(OTHER, r"[^\s\S]"));
            out.base.insert(OTHER.to_string());
        }
        out
    }

    /// Serializes to the grammar file format. Sets are written sorted.
    pub fn to_json(&self) -> String {
        let doc = GrammarDoc {
            version: FORMAT_VERSION,
            tokens: self.tokens.clone(),
            base: self.base.clone(),
            open: self.open.clone(),
            close: self.close.clone(),
            marker_tiers: self.marker_tiers.clone(),
            operator_tiers: self.operator_tiers.clone(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("grammar serializes");
        s.push('\n');
        s
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GrammarDoc {
    version: u64,
    tokens: Vec<TokenDef>,
    #[serde(default)]
    base: BTreeSet<String>,
    #[serde(default)]
    open: BTreeSet<String>,
    #[serde(default)]
    close: BTreeSet<String>,
    #[serde(default)]
    marker_tiers: Vec<BTreeSet<String>>,
    #[serde(default)]
    operator_tiers: Vec<OperatorTier>,
}

/// Reads a grammar document and validates it.
pub fn load_grammar(document: &str) -> Result<TierGrammar, GrammarError> {
    let doc: GrammarDoc = serde_json::from_str(document)?;
    if doc.version != FORMAT_VERSION {
        return Err(GrammarError::UnsupportedVersion(doc.version));
    }
    let g = TierGrammar {
        tokens: doc.tokens,
        base: doc.base,
        open: doc.open,
        close: doc.close,
        marker_tiers: doc.marker_tiers,
        operator_tiers: doc.operator_tiers,
    };
    g.ensure_valid()?;
    Ok(g)
}
