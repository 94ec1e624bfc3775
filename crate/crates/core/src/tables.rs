//! The context-free grammar behind a tier grammar, its FIRST/FOLLOW/LAST
//! sets and the LL(1) predictive table.
//!
//! Every tier grammar expands to the same nonterminal schema:
//!
//! ```text
//! S   -> Q_1                          (S -> D without markers)
//! Q_i -> Q_{i+1} R_i                  (Q_q -> D R_q)
//! R_i -> ε | m Q_{i+1} R_i            (R_q -> ε | m D R_q)
//! D   -> ε | E_1 D                    (E_1 is C without operators)
//! E_i -> E_{i+1} G_i                  postfix tier,    G_i -> ε | s
//! E_i -> E_{i+1} | p E_i              prefix tier
//! E_i -> E_{i+1} L_i                  connective tier, L_i -> ε | c E_{i+1} L_i
//! C   -> A | B,  A -> b,  B -> F S H,  F -> r,  H -> e
//! ```
//!
//! where the top operator tier refers to `C` instead of `E_{k+1}`. Empty
//! classes drop the corresponding alternatives: no base terminals removes
//! `A`, no brackets removes `B`, `F` and `H`, and when both are missing no
//! item can be formed at all, so `C`, every `E_i`, `G_i`, `L_i` and the
//! `D -> E_1 D` alternative are left out.
//!
//! The sets are computed with the generic fixed-point algorithms; nothing
//! here assumes the closed forms that hold for tier grammars.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::grammar::{GrammarError, OperatorKind, TierGrammar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Nonterminal {
    S,
    A,
    B,
    C,
    D,
    F,
    H,
    E(usize),
    G(usize),
    L(usize),
    Q(usize),
    R(usize),
}

impl fmt::Display for Nonterminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Nonterminal::*;
        match self {
            S => f.write_str("S"),
            A => f.write_str("A"),
            B => f.write_str("B"),
            C => f.write_str("C"),
            D => f.write_str("D"),
            F => f.write_str("F"),
            H => f.write_str("H"),
            E(i) => write!(f, "E_{i}"),
            G(i) => write!(f, "G_{i}"),
            L(i) => write!(f, "L_{i}"),
            Q(i) => write!(f, "Q_{i}"),
            R(i) => write!(f, "R_{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Terminal(String),
    Nonterminal(Nonterminal),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Terminal(t) => f.write_str(t),
            Symbol::Nonterminal(n) => n.fmt(f),
        }
    }
}

/// A table column: a terminal or the end-of-input marker `$`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lookahead {
    Terminal(String),
    End,
}

impl Lookahead {
    pub fn terminal(name: &str) -> Self {
        Lookahead::Terminal(name.to_string())
    }
}

impl fmt::Display for Lookahead {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lookahead::Terminal(t) => f.write_str(t),
            Lookahead::End => f.write_str("$"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Production {
    pub head: Nonterminal,
    /// Empty for ε.
    pub body: Vec<Symbol>,
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.head, render_body(&self.body))
    }
}

fn render_body(body: &[Symbol]) -> String {
    if body.is_empty() {
        "ε".to_string()
    } else {
        body.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
    }
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error(transparent)]
    InvalidGrammar(#[from] GrammarError),
    /// Two productions compete for one cell. Tier grammars are LL(1), so
    /// this can only be a bug in the template instantiation.
    #[error("internal LL(1) conflict at ({nonterminal}, {lookahead}): productions {first} and {second}")]
    InternalConflict {
        nonterminal: Nonterminal,
        lookahead: Lookahead,
        first: usize,
        second: usize,
    },
}

/// Productions generated from a tier grammar. The start symbol is `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg {
    productions: Vec<Production>,
    terminals: Vec<String>,
}

impl Cfg {
    /// Builds a grammar from raw productions. Used by tests that exercise
    /// the generic algorithms; tier grammars go through [`generate_cfg`].
    pub fn from_productions(productions: Vec<Production>, terminals: Vec<String>) -> Self {
        Cfg {
            productions,
            terminals,
        }
    }

    pub fn start(&self) -> Nonterminal {
        Nonterminal::S
    }

    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    /// Terminals in token declaration order.
    pub fn terminals(&self) -> &[String] {
        &self.terminals
    }

    /// Nonterminals in order of their first production.
    pub fn nonterminals(&self) -> Vec<Nonterminal> {
        let mut out: Vec<Nonterminal> = Vec::new();
        for p in &self.productions {
            if !out.contains(&p.head) {
                out.push(p.head);
            }
        }
        out
    }

    pub fn alternatives(&self, nt: Nonterminal) -> impl Iterator<Item = (usize, &Production)> {
        self.productions
            .iter()
            .enumerate()
            .filter(move |(_, p)| p.head == nt)
    }

    pub fn has_nonterminal(&self, nt: Nonterminal) -> bool {
        self.productions.iter().any(|p| p.head == nt)
    }
}

impl fmt::Display for Cfg {
    /// One line per nonterminal: `A -> X Y | ε`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for nt in self.nonterminals() {
            let alts: Vec<String> = self.alternatives(nt).map(|(_, p)| render_body(&p.body)).collect();
            writeln!(f, "{nt} -> {}", alts.join(" | "))?;
        }
        Ok(())
    }
}

/// Instantiates the production templates for `g`.
pub fn generate_cfg(g: &TierGrammar) -> Result<Cfg, TableError> {
    g.ensure_valid()?;
    use Nonterminal::*;

    let terminals = g.terminals();
    let order: HashMap<&str, usize> = terminals
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let ordered = |set: &BTreeSet<String>| -> Vec<String> {
        let mut v: Vec<String> = set.iter().cloned().collect();
        v.sort_by_key(|t| order[t.as_str()]);
        v
    };
    let t = |s: &str| Symbol::Terminal(s.to_string());
    let n = Symbol::Nonterminal;

    let q = g.marker_tier_count();
    let k = g.operator_tier_count();
    let has_item = !g.base.is_empty() || g.has_brackets();
    let mut out = Vec::new();
    let mut push = |head, body| out.push(Production { head, body });

    push(S, vec![n(if q > 0 { Q(1) } else { D })]);

    for i in 1..=q {
        let next = if i < q { Q(i + 1) } else { D };
        push(Q(i), vec![n(next), n(R(i))]);
        push(R(i), vec![]);
        for m in ordered(&g.marker_tiers[i - 1]) {
            push(R(i), vec![t(&m), n(next), n(R(i))]);
        }
    }

    push(D, vec![]);
    if has_item {
        push(D, vec![n(if k > 0 { E(1) } else { C }), n(D)]);

        for (idx, tier) in g.operator_tiers.iter().enumerate() {
            let i = idx + 1;
            let next = if i < k { E(i + 1) } else { C };
            let ops = ordered(&tier.terminals);
            match tier.kind {
                OperatorKind::Postfix => {
                    push(E(i), vec![n(next), n(G(i))]);
                    push(G(i), vec![]);
                    for s in ops {
                        push(G(i), vec![t(&s)]);
                    }
                }
                OperatorKind::Prefix => {
                    push(E(i), vec![n(next)]);
                    for p in ops {
                        push(E(i), vec![t(&p), n(E(i))]);
                    }
                }
                OperatorKind::Connective => {
                    push(E(i), vec![n(next), n(L(i))]);
                    push(L(i), vec![]);
                    for c in ops {
                        push(L(i), vec![t(&c), n(next), n(L(i))]);
                    }
                }
            }
        }

        if !g.base.is_empty() {
            push(C, vec![n(A)]);
        }
        if g.has_brackets() {
            push(C, vec![n(B)]);
        }
        for b in ordered(&g.base) {
            push(A, vec![t(&b)]);
        }
        if g.has_brackets() {
            push(B, vec![n(F), n(S), n(H)]);
            for r in ordered(&g.open) {
                push(F, vec![t(&r)]);
            }
            for e in ordered(&g.close) {
                push(H, vec![t(&e)]);
            }
        }
    }

    Ok(Cfg {
        productions: out,
        terminals,
    })
}

/// FIRST sets (or LAST sets, see [`last_sets`]) with nullability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstSets {
    sets: BTreeMap<Nonterminal, BTreeSet<String>>,
    nullable: BTreeSet<Nonterminal>,
}

impl FirstSets {
    pub fn get(&self, nt: Nonterminal) -> &BTreeSet<String> {
        static EMPTY: BTreeSet<String> = BTreeSet::new();
        self.sets.get(&nt).unwrap_or(&EMPTY)
    }

    pub fn is_nullable(&self, nt: Nonterminal) -> bool {
        self.nullable.contains(&nt)
    }

    /// FIRST of a symbol string and whether it derives ε.
    pub fn of_sequence(&self, body: &[Symbol]) -> (BTreeSet<String>, bool) {
        let mut out = BTreeSet::new();
        for sym in body {
            match sym {
                Symbol::Terminal(t) => {
                    out.insert(t.clone());
                    return (out, false);
                }
                Symbol::Nonterminal(nt) => {
                    out.extend(self.get(*nt).iter().cloned());
                    if !self.is_nullable(*nt) {
                        return (out, false);
                    }
                }
            }
        }
        (out, true)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Nonterminal, &BTreeSet<String>)> {
        self.sets.iter()
    }
}

fn first_fixed_point(cfg: &Cfg, reversed: bool) -> FirstSets {
    let mut sets = FirstSets {
        sets: cfg
            .nonterminals()
            .into_iter()
            .map(|nt| (nt, BTreeSet::new()))
            .collect(),
        nullable: BTreeSet::new(),
    };
    let mut changed = true;
    while changed {
        changed = false;
        for p in cfg.productions() {
            let body: Vec<Symbol> = if reversed {
                p.body.iter().rev().cloned().collect()
            } else {
                p.body.clone()
            };
            let (first, nullable) = sets.of_sequence(&body);
            let entry = sets.sets.entry(p.head).or_default();
            let before = entry.len();
            entry.extend(first);
            changed |= entry.len() != before;
            if nullable {
                changed |= sets.nullable.insert(p.head);
            }
        }
    }
    sets
}

/// Least fixed point of the FIRST equations, with nullability.
pub fn first_sets(cfg: &Cfg) -> FirstSets {
    first_fixed_point(cfg, false)
}

/// The mirror image of FIRST: terminals that can end a derivation.
pub fn last_sets(cfg: &Cfg) -> FirstSets {
    first_fixed_point(cfg, true)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FollowSets {
    sets: BTreeMap<Nonterminal, BTreeSet<Lookahead>>,
}

impl FollowSets {
    pub fn get(&self, nt: Nonterminal) -> &BTreeSet<Lookahead> {
        static EMPTY: BTreeSet<Lookahead> = BTreeSet::new();
        self.sets.get(&nt).unwrap_or(&EMPTY)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Nonterminal, &BTreeSet<Lookahead>)> {
        self.sets.iter()
    }
}

/// Least fixed point of the FOLLOW equations; `$` follows `S`.
pub fn follow_sets(cfg: &Cfg, first: &FirstSets) -> FollowSets {
    let mut sets: BTreeMap<Nonterminal, BTreeSet<Lookahead>> = cfg
        .nonterminals()
        .into_iter()
        .map(|nt| (nt, BTreeSet::new()))
        .collect();
    sets.entry(cfg.start()).or_default().insert(Lookahead::End);
    let mut changed = true;
    while changed {
        changed = false;
        for p in cfg.productions() {
            for (i, sym) in p.body.iter().enumerate() {
                let Symbol::Nonterminal(nt) = sym else { continue };
                let (rest_first, rest_nullable) = first.of_sequence(&p.body[i + 1..]);
                let mut add: BTreeSet<Lookahead> =
                    rest_first.into_iter().map(Lookahead::Terminal).collect();
                if rest_nullable {
                    add.extend(sets.get(&p.head).into_iter().flatten().cloned());
                }
                let entry = sets.entry(*nt).or_default();
                let before = entry.len();
                entry.extend(add);
                changed |= entry.len() != before;
            }
        }
    }
    FollowSets { sets }
}

/// The predictive table: `(nonterminal, lookahead) -> production index`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ll1Table {
    cells: BTreeMap<(Nonterminal, Lookahead), usize>,
}

impl Ll1Table {
    pub fn get(&self, nt: Nonterminal, la: &Lookahead) -> Option<usize> {
        self.cells.get(&(nt, la.clone())).copied()
    }

    /// Lookaheads with an entry in the row of `nt`.
    pub fn expected(&self, nt: Nonterminal) -> BTreeSet<Lookahead> {
        self.cells
            .keys()
            .filter(|(n, _)| *n == nt)
            .map(|(_, la)| la.clone())
            .collect()
    }

    pub fn cells(&self) -> impl Iterator<Item = (&(Nonterminal, Lookahead), &usize)> {
        self.cells.iter()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Builds the standard LL(1) table. A cell claimed by two productions is an
/// [`TableError::InternalConflict`].
pub fn build_ll1_table(
    cfg: &Cfg,
    first: &FirstSets,
    follow: &FollowSets,
) -> Result<Ll1Table, TableError> {
    let mut cells: BTreeMap<(Nonterminal, Lookahead), usize> = BTreeMap::new();
    for (idx, p) in cfg.productions().iter().enumerate() {
        let (body_first, nullable) = first.of_sequence(&p.body);
        let mut lookaheads: BTreeSet<Lookahead> =
            body_first.into_iter().map(Lookahead::Terminal).collect();
        if nullable {
            lookaheads.extend(follow.get(p.head).iter().cloned());
        }
        for la in lookaheads {
            if let Some(&prev) = cells.get(&(p.head, la.clone())) {
                return Err(TableError::InternalConflict {
                    nonterminal: p.head,
                    lookahead: la,
                    first: prev,
                    second: idx,
                });
            }
            cells.insert((p.head, la), idx);
        }
    }
    Ok(Ll1Table { cells })
}

/// Everything derived from one tier grammar.
#[derive(Debug, Clone)]
pub struct GrammarTables {
    pub cfg: Cfg,
    pub first: FirstSets,
    pub follow: FollowSets,
    pub last: FirstSets,
    pub table: Ll1Table,
}

impl GrammarTables {
    pub fn build(g: &TierGrammar) -> Result<Self, TableError> {
        let cfg = generate_cfg(g)?;
        let first = first_sets(&cfg);
        let follow = follow_sets(&cfg, &first);
        let last = last_sets(&cfg);
        let table = build_ll1_table(&cfg, &first, &follow)?;
        Ok(GrammarTables {
            cfg,
            first,
            follow,
            last,
            table,
        })
    }

    /// Productions followed by FIRST and FOLLOW per nonterminal, as plain
    /// text. Set members are listed in token declaration order.
    pub fn render(&self) -> String {
        let order: HashMap<&str, usize> = self
            .cfg
            .terminals()
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i))
            .collect();
        let terms = |set: &mut dyn Iterator<Item = &String>| {
            let mut v: Vec<String> = set.cloned().collect();
            v.sort_by_key(|t| order.get(t.as_str()).copied().unwrap_or(usize::MAX));
            v
        };
        let mut out = String::new();
        out.push_str(&self.cfg.to_string());
        out.push('\n');
        for nt in self.cfg.nonterminals() {
            let first = terms(&mut self.first.get(nt).iter());
            let nullable = if self.first.is_nullable(nt) { ", ε" } else { "" };
            out.push_str(&format!("FIRST({nt}) = {{{}{nullable}}}\n", first.join(", ")));
        }
        out.push('\n');
        for nt in self.cfg.nonterminals() {
            let follow = self.follow.get(nt);
            let mut items =
                terms(&mut follow.iter().filter_map(|la| match la {
                    Lookahead::Terminal(t) => Some(t),
                    Lookahead::End => None,
                }));
            if follow.contains(&Lookahead::End) {
                items.push("$".to_string());
            }
            out.push_str(&format!("FOLLOW({nt}) = {{{}}}\n", items.join(", ")));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use Nonterminal::*;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn follow(items: &[&str]) -> BTreeSet<Lookahead> {
        items
            .iter()
            .map(|s| match *s {
                "$" => Lookahead::End,
                t => Lookahead::terminal(t),
            })
            .collect()
    }

    fn lines(cfg: &Cfg) -> Vec<String> {
        cfg.to_string().lines().map(str::to_string).collect()
    }

    #[test]
    fn expr_productions() {
        let cfg = generate_cfg(&fixtures::g_expr()).unwrap();
        assert_eq!(
            lines(&cfg),
            [
                "S -> D",
                "D -> ε | E_1 D",
                "E_1 -> E_2 L_1",
                "L_1 -> ε | PLUS E_2 L_1",
                "E_2 -> E_3 L_2",
                "L_2 -> ε | STAR E_3 L_2",
                "E_3 -> C | MINUS E_3",
                "C -> A | B",
                "A -> NUM | ID",
                "B -> F S H",
                "F -> LPAR",
                "H -> RPAR",
            ]
        );
    }

    #[test]
    fn csv_productions() {
        let cfg = generate_cfg(&fixtures::g_csv()).unwrap();
        assert_eq!(
            lines(&cfg),
            [
                "S -> Q_1",
                "Q_1 -> Q_2 R_1",
                "R_1 -> ε | NL Q_2 R_1",
                "Q_2 -> D R_2",
                "R_2 -> ε | COMMA D R_2",
                "D -> ε | C D",
                "C -> A",
                "A -> FIELD",
            ]
        );
    }

    #[test]
    fn dyck_productions() {
        let cfg = generate_cfg(&fixtures::g_dyck()).unwrap();
        assert_eq!(
            lines(&cfg),
            ["S -> D", "D -> ε | C D", "C -> B", "B -> F S H", "F -> L", "H -> R"]
        );
    }

    #[test]
    fn no_items_means_no_operator_productions() {
        let g = TierGrammar::new()
            .with_token("M", "m")
            .with_token("P", "p")
            .with_marker_tier(["M"])
            .with_operator_tier(OperatorKind::Prefix, ["P"]);
        let cfg = generate_cfg(&g).unwrap();
        assert_eq!(
            lines(&cfg),
            ["S -> Q_1", "Q_1 -> D R_1", "R_1 -> ε | M D R_1", "D -> ε"]
        );
        assert!(GrammarTables::build(&g).is_ok());
    }

    #[test]
    fn invalid_grammar_rejected() {
        let g = TierGrammar::new().with_token("X", "x").with_base(["X", "Y"]);
        assert!(matches!(generate_cfg(&g), Err(TableError::InvalidGrammar(_))));
    }

    #[test]
    fn expr_first_sets() {
        let t = GrammarTables::build(&fixtures::g_expr()).unwrap();
        let expected = set(&["NUM", "ID", "LPAR", "MINUS"]);
        assert_eq!(t.first.get(E(3)), &expected);
        assert_eq!(t.first.get(E(1)), &expected);
        assert!(!t.first.is_nullable(A));
        assert!(t.first.is_nullable(D));
    }

    #[test]
    fn csv_first_sets() {
        let t = GrammarTables::build(&fixtures::g_csv()).unwrap();
        assert!(t.first.is_nullable(D));
        assert!(t.first.is_nullable(R(2)));
        assert_eq!(t.first.get(D), &set(&["FIELD"]));
    }

    #[test]
    fn follow_examples() {
        let t = GrammarTables::build(&fixtures::g_csv()).unwrap();
        assert_eq!(t.follow.get(R(2)), &follow(&["NL", "$"]));

        let t = GrammarTables::build(&fixtures::g_expr()).unwrap();
        assert_eq!(t.follow.get(D), &follow(&["RPAR", "$"]));
        // Another item may follow directly (D -> E_1 D), so L_1 is followed
        // by everything that can start E_1 as well as by RPAR and $.
        assert_eq!(
            t.follow.get(L(1)),
            &follow(&["NUM", "ID", "LPAR", "MINUS", "RPAR", "$"])
        );
    }

    #[test]
    fn last_examples() {
        let t = GrammarTables::build(&fixtures::g_expr()).unwrap();
        assert_eq!(t.last.get(E(3)), &set(&["NUM", "ID", "RPAR"]));
        assert_eq!(t.last.get(A), &set(&["NUM", "ID"]));

        let t = GrammarTables::build(&fixtures::g_post()).unwrap();
        assert_eq!(t.last.get(E(1)), &set(&["W", "BANG", "Q"]));
    }

    #[test]
    fn table_cells() {
        let g = fixtures::g_expr();
        let t = GrammarTables::build(&g).unwrap();
        let body_of = |nt, la: &str| {
            let idx = t.table.get(nt, &Lookahead::terminal(la)).unwrap();
            t.cfg.productions()[idx].to_string()
        };
        assert_eq!(body_of(E(3), "MINUS"), "E_3 -> MINUS E_3");
        assert_eq!(body_of(E(3), "NUM"), "E_3 -> C");
        assert_eq!(t.table.get(E(3), &Lookahead::terminal("PLUS")), None);

        let t = GrammarTables::build(&fixtures::g_csv()).unwrap();
        let idx = t.table.get(R(2), &Lookahead::terminal("NL")).unwrap();
        assert!(t.cfg.productions()[idx].body.is_empty());
    }

    #[test]
    fn generic_algorithms_detect_conflicts() {
        // X -> a | a b is not LL(1).
        let a = || Symbol::Terminal("a".into());
        let cfg = Cfg::from_productions(
            vec![
                Production { head: S, body: vec![a()] },
                Production { head: S, body: vec![a(), Symbol::Terminal("b".into())] },
            ],
            vec!["a".into(), "b".into()],
        );
        let first = first_sets(&cfg);
        let follow = follow_sets(&cfg, &first);
        assert!(matches!(
            build_ll1_table(&cfg, &first, &follow),
            Err(TableError::InternalConflict { first: 0, second: 1, .. })
        ));
    }

    #[test]
    fn render_is_deterministic() {
        let g = fixtures::g_expr();
        let a = GrammarTables::build(&g).unwrap();
        let b = GrammarTables::build(&g).unwrap();
        assert_eq!(a.table, b.table);
        let text = a.render();
        assert_eq!(text, b.render());
        assert!(text.contains("FIRST(E_1) = {NUM, ID, LPAR, MINUS}\n"));
        assert!(text.contains("FOLLOW(D) = {RPAR, $}\n"));
    }
}
