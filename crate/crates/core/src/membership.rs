//! Membership by local conditions, without the parse table.
//!
//! A token string is in the language of a tier grammar exactly when
//!
//! 1. its brackets are balanced (any opener matches any closer),
//! 2. every postfix follows a base token, a closing bracket or a postfix of
//!    higher priority,
//! 3. every prefix precedes a base token, an opening bracket or a prefix of
//!    the same or higher priority,
//! 4. every connective follows what a postfix may follow, and precedes a
//!    base token, an opening bracket or a prefix of higher priority.
//!
//! Markers may appear anywhere. The check is one left-to-right pass with a
//! bracket counter.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::grammar::{TermClass, TierGrammar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    BracketBalance,
    PostfixContext,
    PrefixContext,
    ConnectiveLeft,
    ConnectiveRight,
    UnclassifiedToken,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// The leftmost failing condition of a rejected string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub condition: Condition,
    /// Index of the offending token; the string length when brackets are
    /// still open at the end.
    pub index: usize,
    pub explanation: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}: {}", self.condition, self.index, self.explanation)
    }
}

impl std::error::Error for Violation {}

/// Checks `tokens` (anything naming a terminal, such as
/// [`Token`](crate::Token) or `&str`) against `g`.
pub fn check<T: AsRef<str>>(g: &TierGrammar, tokens: &[T]) -> Result<(), Violation> {
    Checker::new(g).check(tokens)
}

/// Bracket balance alone, over all brackets of `g`.
pub fn check_balance<T: AsRef<str>>(g: &TierGrammar, tokens: &[T]) -> Result<(), Violation> {
    check_balance_of(tokens, &g.open, &g.close)
}

/// Bracket balance over the given opener and closer names; other tokens
/// are ignored.
pub fn check_balance_of<T: AsRef<str>>(
    tokens: &[T],
    open: &BTreeSet<String>,
    close: &BTreeSet<String>,
) -> Result<(), Violation> {
    let mut depth = 0usize;
    for (i, t) in tokens.iter().enumerate() {
        let name = t.as_ref();
        if open.contains(name) {
            depth += 1;
        } else if close.contains(name) {
            if depth == 0 {
                return Err(unmatched_close(i, name));
            }
            depth -= 1;
        }
    }
    match depth {
        0 => Ok(()),
        n => Err(unclosed(tokens.len(), n)),
    }
}

fn unmatched_close(index: usize, name: &str) -> Violation {
    Violation {
        condition: Condition::BracketBalance,
        index,
        explanation: format!("closing bracket {name} has no matching opener"),
    }
}

fn unclosed(index: usize, depth: usize) -> Violation {
    Violation {
        condition: Condition::BracketBalance,
        index,
        explanation: format!("{depth} bracket(s) still open at end of input"),
    }
}

/// A reusable checker with the grammar's classification precomputed.
#[derive(Debug, Clone)]
pub struct Checker {
    classes: HashMap<String, TermClass>,
}

impl Checker {
    pub fn new(g: &TierGrammar) -> Checker {
        Checker {
            classes: g
                .assignments()
                .map(|(name, class)| (name.to_string(), class))
                .collect(),
        }
    }

    pub fn classify(&self, name: &str) -> TermClass {
        self.classes.get(name).copied().unwrap_or(TermClass::Unclassified)
    }

    pub fn check<T: AsRef<str>>(&self, tokens: &[T]) -> Result<(), Violation> {
        let classes: Vec<TermClass> = tokens.iter().map(|t| self.classify(t.as_ref())).collect();
        check_classes(&classes).map_err(|v| describe(v, tokens))
    }

    pub fn accepts<T: AsRef<str>>(&self, tokens: &[T]) -> bool {
        let classes: Vec<TermClass> = tokens.iter().map(|t| self.classify(t.as_ref())).collect();
        check_classes(&classes).is_ok()
    }
}

/// A violation before token names are filled in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawViolation {
    pub condition: Condition,
    pub index: usize,
    /// Bracket depth at the end, for unclosed brackets.
    pub depth: usize,
}

fn may_precede_postfix(prev: Option<TermClass>, priority: usize) -> bool {
    matches!(prev, Some(TermClass::Base | TermClass::Close))
        || matches!(prev, Some(TermClass::Postfix(j)) if j > priority)
}

fn may_follow_prefix(next: Option<TermClass>, min_priority: usize) -> bool {
    matches!(next, Some(TermClass::Base | TermClass::Open))
        || matches!(next, Some(TermClass::Prefix(j)) if j >= min_priority)
}

/// The conditions over a string of classes. Returns the leftmost violation.
pub fn check_classes(classes: &[TermClass]) -> Result<(), RawViolation> {
    let raw = |condition, index| RawViolation {
        condition,
        index,
        depth: 0,
    };
    let mut depth = 0usize;
    for (i, &class) in classes.iter().enumerate() {
        let prev = i.checked_sub(1).map(|j| classes[j]);
        let next = classes.get(i + 1).copied();
        match class {
            TermClass::Base | TermClass::Marker(_) => {}
            TermClass::Open => depth += 1,
            TermClass::Close => {
                if depth == 0 {
                    return Err(raw(Condition::BracketBalance, i));
                }
                depth -= 1;
            }
            TermClass::Postfix(p) => {
                if !may_precede_postfix(prev, p) {
                    return Err(raw(Condition::PostfixContext, i));
                }
            }
            TermClass::Prefix(p) => {
                if !may_follow_prefix(next, p) {
                    return Err(raw(Condition::PrefixContext, i));
                }
            }
            TermClass::Connective(p) => {
                if !may_precede_postfix(prev, p) {
                    return Err(raw(Condition::ConnectiveLeft, i));
                }
                if !may_follow_prefix(next, p + 1) {
                    return Err(raw(Condition::ConnectiveRight, i));
                }
            }
            TermClass::Unclassified => return Err(raw(Condition::UnclassifiedToken, i)),
        }
    }
    match depth {
        0 => Ok(()),
        depth => Err(RawViolation {
            condition: Condition::BracketBalance,
            index: classes.len(),
            depth,
        }),
    }
}

fn describe<T: AsRef<str>>(v: RawViolation, tokens: &[T]) -> Violation {
    let name = |i: usize| tokens.get(i).map_or("end of input", |t| t.as_ref());
    let neighbour = |i: Option<usize>| match i {
        None => "start of input".to_string(),
        Some(i) => name(i).to_string(),
    };
    let i = v.index;
    let before = neighbour(i.checked_sub(1));
    let after = neighbour(Some(i + 1));
    let explanation = match v.condition {
        Condition::BracketBalance if i == tokens.len() => return unclosed(i, v.depth),
        Condition::BracketBalance => return unmatched_close(i, name(i)),
        Condition::PostfixContext => format!(
            "postfix {} follows {before}; it must follow a base token, closing bracket or postfix of higher priority",
            name(i)
        ),
        Condition::PrefixContext => format!(
            "prefix {} precedes {after}; it must precede a base token, opening bracket or prefix of the same or higher priority",
            name(i)
        ),
        Condition::ConnectiveLeft => format!(
            "connective {} follows {before}; it must follow a base token, closing bracket or postfix of higher priority",
            name(i)
        ),
        Condition::ConnectiveRight => format!(
            "connective {} precedes {after}; it must precede a base token, opening bracket or prefix of higher priority",
            name(i)
        ),
        Condition::UnclassifiedToken => format!("token {} is not classified by the grammar", name(i)),
    };
    Violation {
        condition: v.condition,
        index: i,
        explanation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn at(g: &TierGrammar, s: &[&str]) -> Option<(Condition, usize)> {
        check(g, s).err().map(|v| (v.condition, v.index))
    }

    #[test]
    fn expr_examples() {
        let g = fixtures::g_expr();
        assert_eq!(at(&g, &["MINUS", "LPAR", "NUM", "RPAR"]), None);
        assert_eq!(
            at(&g, &["NUM", "PLUS", "PLUS", "NUM"]),
            Some((Condition::ConnectiveRight, 1))
        );
        assert_eq!(at(&g, &["LPAR", "NUM"]), Some((Condition::BracketBalance, 2)));
        assert_eq!(at(&g, &["PLUS", "NUM"]), Some((Condition::ConnectiveLeft, 0)));
        assert_eq!(at(&g, &["NUM", "MINUS"]), Some((Condition::PrefixContext, 1)));
        assert_eq!(at(&g, &["NUM", "FOO"]), Some((Condition::UnclassifiedToken, 1)));
        // A prefix of higher priority may follow a connective; a lower one
        // may not.
        assert_eq!(at(&g, &["NUM", "STAR", "MINUS", "NUM"]), None);
    }

    #[test]
    fn postfix_priorities() {
        let g = fixtures::g_post();
        assert_eq!(at(&g, &["W", "Q", "BANG"]), None);
        assert_eq!(at(&g, &["W", "BANG", "Q"]), Some((Condition::PostfixContext, 2)));
        assert_eq!(at(&g, &["BANG"]), Some((Condition::PostfixContext, 0)));
    }

    #[test]
    fn markers_are_free() {
        let g = fixtures::g_csv();
        for s in [&["COMMA", "COMMA"][..], &["NL"], &["FIELD", "NL", "COMMA", "FIELD"], &[]] {
            assert_eq!(at(&g, s), None);
        }
    }

    #[test]
    fn balance() {
        let g = fixtures::g_dyck();
        assert!(check_balance(&g, &["L", "R", "L", "R"]).is_ok());
        assert!(check_balance::<&str>(&g, &[]).is_ok());
        let v = check_balance(&g, &["R", "L"]).unwrap_err();
        assert_eq!((v.condition, v.index), (Condition::BracketBalance, 0));
        assert_eq!(at(&g, &["L", "L", "R"]), Some((Condition::BracketBalance, 3)));
    }

    #[test]
    fn leftmost_violation_wins() {
        let g = fixtures::g_expr();
        assert_eq!(at(&g, &["RPAR", "PLUS"]), Some((Condition::BracketBalance, 0)));
        assert_eq!(
            at(&g, &["NUM", "PLUS", "RPAR", "MINUS"]),
            Some((Condition::ConnectiveRight, 1))
        );
    }

    #[test]
    fn display_format() {
        let v = check(&fixtures::g_expr(), &["NUM", "PLUS", "PLUS", "NUM"]).unwrap_err();
        assert!(v.to_string().starts_with("ConnectiveRight@1: connective PLUS precedes PLUS"));
    }

    #[test]
    fn demoted_brackets_widen_the_language() {
        let g = fixtures::g_expr();
        // Two items in a row are a sequence, so this is already a member.
        assert!(check(&g, &["NUM", "LPAR", "NUM", "RPAR"]).is_ok());
        let s = ["NUM", "RPAR", "LPAR"];
        assert!(check(&g, &s).is_err());
        assert!(check(&g.demote(["LPAR", "RPAR"]).unwrap(), &s).is_ok());
    }
}
