//! FIRST, FOLLOW and LAST sets of the generated grammar written down from
//! the terminal classes alone, for comparison with the fixed-point
//! computation.

use std::collections::BTreeSet;

use crate::grammar::{OperatorKind, TierGrammar};
use crate::tables::{GrammarTables, Lookahead, Nonterminal};

fn prefixes_from(g: &TierGrammar, from: usize) -> impl Iterator<Item = &String> {
    g.operator_tiers
        .iter()
        .enumerate()
        .filter(move |(j, t)| j + 1 >= from && t.kind == OperatorKind::Prefix)
        .flat_map(|(_, t)| &t.terminals)
}

fn operators_below(g: &TierGrammar, kind: OperatorKind, below: usize) -> impl Iterator<Item = &String> {
    g.operator_tiers
        .iter()
        .take(below.saturating_sub(1))
        .filter(move |t| t.kind == kind)
        .flat_map(|t| &t.terminals)
}

fn markers_below(g: &TierGrammar, below: usize) -> impl Iterator<Item = &String> {
    g.marker_tiers.iter().take(below.saturating_sub(1)).flatten()
}

fn lookaheads<'a>(items: impl IntoIterator<Item = &'a String>, end: bool) -> BTreeSet<Lookahead> {
    let mut out: BTreeSet<Lookahead> = items.into_iter().map(|t| Lookahead::terminal(t)).collect();
    if end {
        out.insert(Lookahead::End);
    }
    out
}

/// `FIRST(E_i)`: base terminals, openers and prefixes of priority `i` or
/// higher.
pub fn first_e(g: &TierGrammar, i: usize) -> BTreeSet<String> {
    g.base
        .iter()
        .chain(&g.open)
        .chain(prefixes_from(g, i))
        .cloned()
        .collect()
}

/// `FIRST(E_1 D)`: base terminals, openers and all prefixes.
pub fn first_e1_d(g: &TierGrammar) -> BTreeSet<String> {
    first_e(g, 1)
}

/// `LAST(E_i)`: base terminals, closers and postfixes of priority `i` or
/// higher.
pub fn last_e(g: &TierGrammar, i: usize) -> BTreeSet<String> {
    let postfixes = g
        .operator_tiers
        .iter()
        .enumerate()
        .filter(|(j, t)| j + 1 >= i && t.kind == OperatorKind::Postfix)
        .flat_map(|(_, t)| &t.terminals);
    g.base.iter().chain(&g.close).chain(postfixes).cloned().collect()
}

/// `FOLLOW(G_i)` and `FOLLOW(L_i)`: connectives and postfixes of lower
/// priority, all markers, base terminals, both bracket kinds, all prefixes
/// and the end of input.
pub fn follow_g_l(g: &TierGrammar, i: usize) -> BTreeSet<Lookahead> {
    let items = operators_below(g, OperatorKind::Connective, i)
        .chain(g.marker_tiers.iter().flatten())
        .chain(&g.base)
        .chain(&g.open)
        .chain(&g.close)
        .chain(prefixes_from(g, 1))
        .chain(operators_below(g, OperatorKind::Postfix, i));
    lookaheads(items, true)
}

/// `FOLLOW(R_i)`: closers, markers of lower priority and the end of input.
pub fn follow_r(g: &TierGrammar, i: usize) -> BTreeSet<Lookahead> {
    lookaheads(g.close.iter().chain(markers_below(g, i)), true)
}

/// `FOLLOW(D)`: closers, all markers and the end of input.
pub fn follow_d(g: &TierGrammar) -> BTreeSet<Lookahead> {
    lookaheads(g.close.iter().chain(g.marker_tiers.iter().flatten()), true)
}

/// Compares every closed form that applies to `g` with the computed sets
/// and describes the first mismatch.
pub fn check_closed_forms(g: &TierGrammar, t: &GrammarTables) -> Result<(), String> {
    fn same<T: Ord + std::fmt::Debug>(what: String, got: &BTreeSet<T>, want: &BTreeSet<T>) -> Result<(), String> {
        if got == want {
            Ok(())
        } else {
            Err(format!("{what}: computed {got:?}, expected {want:?}"))
        }
    }
    let has_items = t.cfg.has_nonterminal(Nonterminal::C);
    if has_items {
        for i in 1..=g.operator_tier_count().max(1) {
            let e = Nonterminal::E(i);
            if !t.cfg.has_nonterminal(e) {
                continue;
            }
            same(format!("FIRST({e})"), t.first.get(e), &first_e(g, i))?;
            same(format!("LAST({e})"), t.last.get(e), &last_e(g, i))?;
            if t.first.is_nullable(e) {
                return Err(format!("{e} is nullable"));
            }
        }
        // Without operator tiers the item nonterminal is `C` itself.
        if g.operator_tier_count() == 0 {
            same("FIRST(C)".into(), t.first.get(Nonterminal::C), &first_e(g, 1))?;
            same("LAST(C)".into(), t.last.get(Nonterminal::C), &last_e(g, 1))?;
        }
        let item_list = t
            .cfg
            .alternatives(Nonterminal::D)
            .map(|(_, p)| &p.body)
            .find(|b| !b.is_empty())
            .ok_or("D has no item alternative")?;
        let (first, _) = t.first.of_sequence(item_list);
        same("FIRST(E_1 D)".into(), &first, &first_e1_d(g))?;
        for (idx, tier) in g.operator_tiers.iter().enumerate() {
            let i = idx + 1;
            let helper = match tier.kind {
                OperatorKind::Postfix => Nonterminal::G(i),
                OperatorKind::Connective => Nonterminal::L(i),
                OperatorKind::Prefix => continue,
            };
            same(format!("FOLLOW({helper})"), t.follow.get(helper), &follow_g_l(g, i))?;
        }
    }
    for i in 1..=g.marker_tier_count() {
        let r = Nonterminal::R(i);
        same(format!("FOLLOW({r})"), t.follow.get(r), &follow_r(g, i))?;
    }
    same("FOLLOW(D)".into(), t.follow.get(Nonterminal::D), &follow_d(g))
}
