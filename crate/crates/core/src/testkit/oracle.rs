//! General context-free parsing over a [`Cfg`], used as an independent
//! check of the predictive parser: an incremental Earley recognizer, an
//! exhaustive derivation counter, and the conversion of raw derivation
//! trees into tier parse trees.

use std::collections::HashMap;

use crate::grammar::{OperatorKind, TierGrammar};
use crate::lexer::Token;
use crate::tables::{Cfg, Nonterminal, Symbol};
use crate::tree::TierTree;

/// Nonterminals that derive the empty string, computed directly.
fn nullable_set(cfg: &Cfg) -> HashMap<Nonterminal, bool> {
    let mut nullable: HashMap<Nonterminal, bool> =
        cfg.nonterminals().into_iter().map(|n| (n, false)).collect();
    loop {
        let mut changed = false;
        for p in cfg.productions() {
            if nullable[&p.head] {
                continue;
            }
            let all = p.body.iter().all(|s| match s {
                Symbol::Terminal(_) => false,
                Symbol::Nonterminal(n) => nullable[n],
            });
            if all {
                nullable.insert(p.head, true);
                changed = true;
            }
        }
        if !changed {
            return nullable;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct EarleyItem {
    prod: u32,
    dot: u32,
    origin: u32,
}

/// An Earley recognizer that consumes one token at a time and can undo the
/// last token, so that a depth-first walk over many strings shares work on
/// common prefixes.
#[derive(Debug, Clone)]
pub struct EarleyRecognizer<'c> {
    cfg: &'c Cfg,
    nullable: HashMap<Nonterminal, bool>,
    by_head: HashMap<Nonterminal, Vec<u32>>,
    sets: Vec<Vec<EarleyItem>>,
}

impl<'c> EarleyRecognizer<'c> {
    pub fn new(cfg: &'c Cfg) -> Self {
        let mut by_head: HashMap<Nonterminal, Vec<u32>> = HashMap::new();
        for (i, p) in cfg.productions().iter().enumerate() {
            by_head.entry(p.head).or_default().push(i as u32);
        }
        let mut r = EarleyRecognizer {
            cfg,
            nullable: nullable_set(cfg),
            by_head,
            sets: Vec::new(),
        };
        let start: Vec<EarleyItem> = r.by_head[&cfg.start()]
            .iter()
            .map(|&prod| EarleyItem {
                prod,
                dot: 0,
                origin: 0,
            })
            .collect();
        let set = r.close(start, 0);
        r.sets.push(set);
        r
    }

    fn next_symbol(&self, item: &EarleyItem) -> Option<&'c Symbol> {
        self.cfg.productions()[item.prod as usize]
            .body
            .get(item.dot as usize)
    }

    /// Prediction and completion over a kernel at position `pos`.
    fn close(&self, kernel: Vec<EarleyItem>, pos: u32) -> Vec<EarleyItem> {
        let mut items = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut work = kernel;
        while let Some(item) = work.pop() {
            if !seen.insert(item) {
                continue;
            }
            items.push(item);
            match self.next_symbol(&item) {
                Some(Symbol::Nonterminal(n)) => {
                    for &prod in self.by_head.get(n).into_iter().flatten() {
                        work.push(EarleyItem {
                            prod,
                            dot: 0,
                            origin: pos,
                        });
                    }
                    if self.nullable[n] {
                        work.push(EarleyItem {
                            dot: item.dot + 1,
                            ..item
                        });
                    }
                }
                Some(Symbol::Terminal(_)) => {}
                None => {
                    let head = self.cfg.productions()[item.prod as usize].head;
                    let waiting: Vec<EarleyItem> = if item.origin == pos {
                        items.clone()
                    } else {
                        self.sets[item.origin as usize].clone()
                    };
                    for w in waiting {
                        if matches!(self.next_symbol(&w), Some(Symbol::Nonterminal(n)) if *n == head) {
                            work.push(EarleyItem { dot: w.dot + 1, ..w });
                        }
                    }
                    // Items added later at this position that wait for
                    // `head` are advanced when they are processed, since a
                    // nullable `head` is skipped at prediction time and a
                    // non-nullable one cannot complete with origin `pos`.
                }
            }
        }
        items
    }

    /// Consumes a token; returns whether some continuation may still
    /// succeed.
    pub fn push(&mut self, terminal: &str) -> bool {
        let pos = self.sets.len() as u32;
        let last = self.sets.last().expect("at least the initial set");
        let kernel: Vec<EarleyItem> = last
            .iter()
            .filter(|i| matches!(self.next_symbol(i), Some(Symbol::Terminal(t)) if t == terminal))
            .map(|i| EarleyItem { dot: i.dot + 1, ..*i })
            .collect();
        let set = if kernel.is_empty() {
            Vec::new()
        } else {
            self.close(kernel, pos)
        };
        let alive = !set.is_empty();
        self.sets.push(set);
        alive
    }

    /// Undoes the last [`push`](Self::push).
    pub fn pop(&mut self) {
        assert!(self.sets.len() > 1, "nothing to pop");
        self.sets.pop();
    }

    pub fn is_alive(&self) -> bool {
        !self.sets.last().unwrap().is_empty()
    }

    /// Whether the tokens pushed so far form a sentence.
    pub fn accepts(&self) -> bool {
        let start = self.cfg.start();
        self.sets.last().unwrap().iter().any(|i| {
            i.origin == 0
                && self.next_symbol(i).is_none()
                && self.cfg.productions()[i.prod as usize].head == start
        })
    }

    pub fn len(&self) -> usize {
        self.sets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A derivation tree of the context-free grammar, with leaves referring to
/// token positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CfgTree {
    Leaf(usize),
    Node {
        head: Nonterminal,
        production: usize,
        children: Vec<CfgTree>,
    },
}

/// Result of [`oracle_parse`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    /// Number of derivation trees, capped at 2.
    pub count: u8,
    /// One derivation tree when `count > 0`.
    pub tree: Option<CfgTree>,
}

struct SpanCounter<'a> {
    cfg: &'a Cfg,
    tokens: &'a [&'a str],
    by_head: HashMap<Nonterminal, Vec<usize>>,
    symbol_memo: HashMap<(Nonterminal, usize, usize), Option<u8>>,
    seq_memo: HashMap<(usize, usize, usize, usize), u8>,
}

impl SpanCounter<'_> {
    fn symbol(&mut self, sym: &Symbol, i: usize, j: usize) -> u8 {
        match sym {
            Symbol::Terminal(t) => u8::from(j == i + 1 && self.tokens[i] == t),
            Symbol::Nonterminal(n) => self.nonterminal(*n, i, j),
        }
    }

    fn nonterminal(&mut self, n: Nonterminal, i: usize, j: usize) -> u8 {
        match self.symbol_memo.get(&(n, i, j)) {
            Some(Some(c)) => return *c,
            // Re-entered while counting the same span: a cycle, which
            // contributes no finite derivation.
            Some(None) => return 0,
            None => {}
        }
        self.symbol_memo.insert((n, i, j), None);
        let prods = self.by_head.get(&n).cloned().unwrap_or_default();
        let mut total = 0u8;
        for p in prods {
            total = total.saturating_add(self.sequence(p, 0, i, j)).min(2);
        }
        self.symbol_memo.insert((n, i, j), Some(total));
        total
    }

    /// Derivations of `body[k..]` of production `p` spanning `i..j`.
    fn sequence(&mut self, p: usize, k: usize, i: usize, j: usize) -> u8 {
        let body = &self.cfg.productions()[p].body;
        if k == body.len() {
            return u8::from(i == j);
        }
        if let Some(&c) = self.seq_memo.get(&(p, k, i, j)) {
            return c;
        }
        let mut total = 0u8;
        for m in i..=j {
            let sym = body[k].clone();
            let first = self.symbol(&sym, i, m);
            if first == 0 {
                continue;
            }
            let rest = self.sequence(p, k + 1, m, j);
            total = total.saturating_add(first.saturating_mul(rest)).min(2);
        }
        self.seq_memo.insert((p, k, i, j), total);
        total
    }

    fn build_symbol(&mut self, sym: &Symbol, i: usize, j: usize) -> CfgTree {
        match sym {
            Symbol::Terminal(_) => CfgTree::Leaf(i),
            Symbol::Nonterminal(n) => {
                let prods = self.by_head[n].clone();
                for p in prods {
                    if self.sequence(p, 0, i, j) > 0 {
                        return CfgTree::Node {
                            head: *n,
                            production: p,
                            children: self.build_sequence(p, 0, i, j),
                        };
                    }
                }
                unreachable!("build called on an underivable span")
            }
        }
    }

    fn build_sequence(&mut self, p: usize, k: usize, i: usize, j: usize) -> Vec<CfgTree> {
        let body = self.cfg.productions()[p].body.clone();
        if k == body.len() {
            return Vec::new();
        }
        for m in i..=j {
            if self.symbol(&body[k], i, m) > 0 && self.sequence(p, k + 1, m, j) > 0 {
                let mut out = vec![self.build_symbol(&body[k], i, m)];
                out.extend(self.build_sequence(p, k + 1, m, j));
                return out;
            }
        }
        unreachable!("build called on an underivable sequence")
    }
}

/// Counts the derivation trees of `tokens` in `cfg` (capped at 2) by
/// exhaustive span splitting, and returns one of them.
///
/// A nonterminal met again on the span it is being counted for is treated
/// as contributing nothing, which is exact for grammars whose derivations
/// never loop on a span (unit or empty cycles).
pub fn oracle_parse<T: AsRef<str>>(cfg: &Cfg, tokens: &[T]) -> OracleResult {
    let names: Vec<&str> = tokens.iter().map(AsRef::as_ref).collect();
    let mut by_head: HashMap<Nonterminal, Vec<usize>> = HashMap::new();
    for (i, p) in cfg.productions().iter().enumerate() {
        by_head.entry(p.head).or_default().push(i);
    }
    let mut counter = SpanCounter {
        cfg,
        tokens: &names,
        by_head,
        symbol_memo: HashMap::new(),
        seq_memo: HashMap::new(),
    };
    let start = Symbol::Nonterminal(cfg.start());
    let count = counter.symbol(&start, 0, names.len());
    let tree = (count > 0).then(|| counter.build_symbol(&start, 0, names.len()));
    OracleResult { count, tree }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sym {
    T(u16),
    N(u16),
}

#[derive(Debug, Clone, Default)]
struct Column {
    /// Derivation counts per nonterminal for spans ending here, indexed
    /// `nonterminal * width + start`.
    counts: Vec<u8>,
    /// Counts of production prefixes `body[..t]`, indexed
    /// `slot * width + start`.
    prefixes: Vec<u8>,
    /// Nonzero prefix entries as `(slot, count)`, grouped by start.
    nonzero: Vec<(u32, u8)>,
    /// Range of `nonzero` for each start.
    ranges: Vec<(u32, u32)>,
    /// Whether each nonterminal derives some string that the span is a
    /// prefix of, indexed like `counts`.
    viable: Vec<bool>,
}

/// Derivation counting (capped at 2) that extends one token at a time.
///
/// Column `j` holds the counts of every nonterminal and every production
/// prefix over each span ending at `j`, so pushing a token costs one new
/// column and popping discards it. This gives the same counts as
/// [`oracle_parse`] at a fraction of the cost when many strings share
/// prefixes. It needs a grammar in which no nonterminal can reach itself
/// through leftmost symbols preceded only by nullable ones, which holds for
/// every grammar without left recursion.
#[derive(Debug, Clone)]
pub struct SpanChart<'c> {
    cfg: &'c Cfg,
    nt_ids: HashMap<Nonterminal, u16>,
    term_ids: HashMap<String, u16>,
    bodies: Vec<Vec<Sym>>,
    heads: Vec<u16>,
    slot_base: Vec<usize>,
    /// The symbol after each prefix slot, if the prefix is not the whole
    /// body.
    next: Vec<Option<Sym>>,
    slot_head: Vec<u16>,
    slots: usize,
    /// Productions with dependencies on the same span first.
    order: Vec<usize>,
    by_head: Vec<Vec<usize>>,
    tokens: Vec<u16>,
    columns: Vec<Column>,
    /// Popped columns kept for their buffers.
    spare: Vec<Column>,
    start: usize,
}

impl<'c> SpanChart<'c> {
    /// Panics if the grammar is left-recursive (see the type docs).
    pub fn new(cfg: &'c Cfg) -> Self {
        let nts = cfg.nonterminals();
        let nt_ids: HashMap<Nonterminal, u16> =
            nts.iter().enumerate().map(|(i, n)| (*n, i as u16)).collect();
        let term_ids: HashMap<String, u16> = cfg
            .terminals()
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u16))
            .collect();
        let nullable = nullable_set(cfg);
        let mut bodies = Vec::new();
        let mut heads = Vec::new();
        let mut slot_base = Vec::new();
        let mut slots = 0;
        let mut by_head = vec![Vec::new(); nts.len()];
        // Edges from a head to the symbols it needs on the same span.
        let mut deps: Vec<Vec<u16>> = vec![Vec::new(); nts.len()];
        for (pi, p) in cfg.productions().iter().enumerate() {
            let h = nt_ids[&p.head];
            let body: Vec<Sym> = p
                .body
                .iter()
                .map(|s| match s {
                    Symbol::Terminal(t) => Sym::T(term_ids[t]),
                    Symbol::Nonterminal(n) => Sym::N(nt_ids[n]),
                })
                .collect();
            for s in &p.body {
                if let Symbol::Nonterminal(n) = s {
                    deps[h as usize].push(nt_ids[n]);
                }
                let nullable_here = match s {
                    Symbol::Terminal(_) => false,
                    Symbol::Nonterminal(n) => nullable[n],
                };
                if !nullable_here {
                    break;
                }
            }
            heads.push(h);
            slot_base.push(slots);
            slots += body.len();
            bodies.push(body);
            by_head[h as usize].push(pi);
        }

        // Depth-first topological order of nonterminals over `deps`.
        let mut state = vec![0u8; nts.len()];
        let mut topo = Vec::new();
        fn visit(x: usize, deps: &[Vec<u16>], state: &mut [u8], topo: &mut Vec<usize>, nts: &[Nonterminal]) {
            match state[x] {
                2 => return,
                1 => panic!("{} reaches itself on the same span; grammar is left-recursive", nts[x]),
                _ => {}
            }
            state[x] = 1;
            for &y in &deps[x] {
                visit(y as usize, deps, state, topo, nts);
            }
            state[x] = 2;
            topo.push(x);
        }
        for x in 0..nts.len() {
            visit(x, &deps, &mut state, &mut topo, &nts);
        }
        let order = topo.iter().flat_map(|&x| by_head[x].iter().copied()).collect();
        let next = bodies
            .iter()
            .flat_map(|b: &Vec<Sym>| (1..=b.len()).map(|t| b.get(t).copied()))
            .collect();
        let slot_head = bodies
            .iter()
            .zip(&heads)
            .flat_map(|(b, &h): (&Vec<Sym>, &u16)| std::iter::repeat_n(h, b.len()))
            .collect();

        let mut chart = SpanChart {
            cfg,
            nt_ids,
            term_ids,
            bodies,
            heads,
            slot_base,
            next,
            slot_head,
            slots,
            order,
            by_head,
            tokens: Vec::new(),
            columns: Vec::new(),
            spare: Vec::new(),
            start: 0,
        };
        chart.start = chart.nt_ids[&cfg.start()] as usize;
        chart.push_column();
        chart
    }

    /// Computes the column for the current end position into `col`.
    ///
    /// A prefix `body[..t]` over `(i, j)` splits as `body[..t-1]` over
    /// `(i, k)` and `body[t-1]` over `(k, j)`. Splits with `i < k < j` use
    /// the nonzero prefix entries kept with each earlier column; the two
    /// boundary splits involve spans ending here and are resolved in
    /// dependency order. Viability splits the same way, with the last
    /// symbol only partly covered.
    fn fill_column(&self, col: &mut Column) {
        let j = self.tokens.len();
        let w = j + 1;
        let nts = self.by_head.len();
        col.counts.clear();
        col.counts.resize(nts * w, 0);
        col.prefixes.clear();
        col.prefixes.resize(self.slots * w, 0);
        col.viable.clear();
        col.viable.resize(nts * w, false);
        col.nonzero.clear();
        col.ranges.clear();
        col.ranges.resize(w, (0, 0));
        let mut inner = vec![0u16; self.slots];
        for x in 0..nts {
            col.viable[x * w + j] = true;
        }
        for i in (0..=j).rev() {
            inner.fill(0);
            for k in i + 1..j {
                let prev = &self.columns[k];
                let (from, to) = prev.ranges[i];
                for &(slot, left) in &prev.nonzero[from as usize..to as usize] {
                    let Some(sym) = self.next[slot as usize] else { continue };
                    let (right, viable) = match sym {
                        Sym::N(y) => (col.counts[y as usize * w + k], col.viable[y as usize * w + k]),
                        Sym::T(a) => {
                            let hit = k + 1 == j && self.tokens[k] == a;
                            (u8::from(hit), hit)
                        }
                    };
                    inner[slot as usize + 1] += u16::from(left) * u16::from(right);
                    if viable {
                        col.viable[self.slot_head[slot as usize] as usize * w + i] = true;
                    }
                }
            }
            for &p in &self.order {
                let base = self.slot_base[p];
                let head = self.heads[p] as usize;
                // Count of the prefix of length `t` over `(i, j)`.
                let mut val = u8::from(i == j);
                let mut viable = false;
                for (t, sym) in self.bodies[p].iter().enumerate() {
                    let mut sum = inner[base + t];
                    // Split at k = i: the prefix of length t covers (i, i).
                    let left = if t == 0 {
                        1
                    } else if i == j {
                        val
                    } else {
                        self.columns[i].prefixes[(base + t - 1) * (i + 1) + i]
                    };
                    if left > 0 {
                        let (right, v) = match *sym {
                            Sym::T(a) => {
                                let hit = i + 1 == j && self.tokens[i] == a;
                                (u8::from(hit), hit)
                            }
                            Sym::N(y) => (col.counts[y as usize * w + i], col.viable[y as usize * w + i]),
                        };
                        sum += u16::from(left) * u16::from(right);
                        viable |= v;
                    }
                    // Split at k = j > i: the symbol covers (j, j).
                    if i < j && val > 0 {
                        viable = true;
                        if let Sym::N(y) = *sym {
                            sum += u16::from(val) * u16::from(col.counts[y as usize * w + j]);
                        }
                    }
                    val = sum.min(2) as u8;
                    col.prefixes[(base + t) * w + i] = val;
                }
                let c = &mut col.counts[head * w + i];
                *c = (*c + val).min(2);
                if viable || val > 0 {
                    col.viable[head * w + i] = true;
                }
            }
            let from = col.nonzero.len() as u32;
            for slot in 0..self.slots {
                let v = col.prefixes[slot * w + i];
                if v > 0 {
                    col.nonzero.push((slot as u32, v));
                }
            }
            col.ranges[i] = (from, col.nonzero.len() as u32);
        }
    }

    fn push_column(&mut self) {
        let mut col = self.spare.pop().unwrap_or_default();
        self.fill_column(&mut col);
        self.columns.push(col);
    }

    /// Appends a terminal by name; unknown names match nothing.
    pub fn push(&mut self, terminal: &str) {
        let id = self.term_ids.get(terminal).copied().unwrap_or(u16::MAX);
        self.tokens.push(id);
        self.push_column();
    }

    /// Appends the terminal with index `id` in [`Cfg::terminals`].
    pub fn push_id(&mut self, id: usize) {
        self.tokens.push(id as u16);
        self.push_column();
    }

    pub fn pop(&mut self) {
        assert!(!self.tokens.is_empty(), "nothing to pop");
        self.tokens.pop();
        let col = self.columns.pop().expect("column per token");
        self.spare.push(col);
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn count_of(&self, x: usize, i: usize, j: usize) -> u8 {
        self.columns[j].counts[x * (j + 1) + i]
    }

    fn prefix_count(&self, p: usize, t: usize, i: usize, k: usize) -> u8 {
        if t == 0 {
            return u8::from(i == k);
        }
        self.columns[k].prefixes[(self.slot_base[p] + t - 1) * (k + 1) + i]
    }

    /// Derivations of the whole string pushed so far, capped at 2.
    pub fn count(&self) -> u8 {
        self.count_of(self.start, 0, self.tokens.len())
    }

    /// Whether some string starting with the tokens pushed so far is
    /// derivable.
    pub fn is_viable(&self) -> bool {
        let j = self.tokens.len();
        self.columns[j].viable[self.start * (j + 1)]
    }

    /// One derivation tree of the whole string, if any.
    pub fn tree(&self) -> Option<CfgTree> {
        (self.count() > 0).then(|| self.build(self.start, 0, self.tokens.len()))
    }

    fn build(&self, x: usize, i: usize, j: usize) -> CfgTree {
        let p = self.by_head[x]
            .iter()
            .copied()
            .find(|&p| self.prefix_count(p, self.bodies[p].len(), i, j) > 0)
            .expect("a production derives the span");
        let mut children = Vec::new();
        self.build_prefix(p, self.bodies[p].len(), i, j, &mut children);
        CfgTree::Node {
            head: self.cfg.productions()[p].head,
            production: p,
            children,
        }
    }

    fn build_prefix(&self, p: usize, t: usize, i: usize, j: usize, out: &mut Vec<CfgTree>) {
        if t == 0 {
            return;
        }
        for k in i..=j {
            if self.prefix_count(p, t - 1, i, k) == 0 {
                continue;
            }
            let ok = match self.bodies[p][t - 1] {
                Sym::T(a) => k + 1 == j && self.tokens[k] == a,
                Sym::N(x) => self.count_of(x as usize, k, j) > 0,
            };
            if ok {
                self.build_prefix(p, t - 1, i, k, out);
                out.push(match self.bodies[p][t - 1] {
                    Sym::T(_) => CfgTree::Leaf(k),
                    Sym::N(x) => self.build(x as usize, k, j),
                });
                return;
            }
        }
        unreachable!("a split derives the prefix")
    }
}

/// Turns a derivation tree of the grammar generated for `g` into a tier
/// parse tree: bracket productions become bracket nodes, realized
/// operators and markers become operator and marker nodes (merging all
/// operators of one chain), item lists become sequences, and every other
/// nonterminal is dropped in favour of its children.
pub fn convert_cfg_tree(g: &TierGrammar, tree: &CfgTree, tokens: &[Token]) -> TierTree {
    Converter { g, tokens }.convert(tree)
}

struct Converter<'a> {
    g: &'a TierGrammar,
    tokens: &'a [Token],
}

impl Converter<'_> {
    fn leaf(&self, t: &CfgTree) -> Token {
        match t {
            CfgTree::Leaf(i) => self.tokens[*i].clone(),
            // F and H wrap a single terminal.
            CfgTree::Node { children, .. } => self.leaf(&children[0]),
        }
    }

    fn convert(&self, t: &CfgTree) -> TierTree {
        let CfgTree::Node {
            head, children, ..
        } = t
        else {
            unreachable!("leaves are handled by their parents")
        };
        match head {
            Nonterminal::A => TierTree::Base(self.leaf(&children[0])),
            Nonterminal::B => TierTree::Bracket {
                open: self.leaf(&children[0]),
                child: Box::new(self.convert(&children[1])),
                close: self.leaf(&children[2]),
            },
            Nonterminal::S | Nonterminal::C => self.convert(&children[0]),
            Nonterminal::D => {
                let mut items = Vec::new();
                let mut cur = t;
                while let CfgTree::Node { children, .. } = cur {
                    match children.as_slice() {
                        [] => break,
                        [e, rest] => {
                            items.push(self.convert(e));
                            cur = rest;
                        }
                        _ => unreachable!("D has two alternatives"),
                    }
                }
                match items.len() {
                    0 => TierTree::Empty,
                    1 => items.pop().unwrap(),
                    _ => TierTree::Sequence(items),
                }
            }
            Nonterminal::E(i) => {
                let kind = self.g.operator_tiers[i - 1].kind;
                match (kind, children.as_slice()) {
                    (OperatorKind::Prefix, [CfgTree::Leaf(p), operand]) => TierTree::Prefix {
                        priority: *i,
                        operator: self.tokens[*p].clone(),
                        child: Box::new(self.convert(operand)),
                    },
                    (OperatorKind::Prefix, [next]) => self.convert(next),
                    (OperatorKind::Postfix, [next, g]) => match g {
                        CfgTree::Node { children, .. } if !children.is_empty() => TierTree::Postfix {
                            priority: *i,
                            child: Box::new(self.convert(next)),
                            operator: self.leaf(&children[0]),
                        },
                        _ => self.convert(next),
                    },
                    (OperatorKind::Connective, [first, chain]) => {
                        let (rest, operators) = self.chain(chain);
                        if operators.is_empty() {
                            self.convert(first)
                        } else {
                            let mut children = vec![self.convert(first)];
                            children.extend(rest);
                            TierTree::Connective {
                                priority: *i,
                                children,
                                operators,
                            }
                        }
                    }
                    _ => unreachable!("unexpected E production shape"),
                }
            }
            Nonterminal::Q(i) => {
                let [first, chain] = children.as_slice() else {
                    unreachable!("Q has one production")
                };
                let (rest, markers) = self.chain(chain);
                if markers.is_empty() {
                    self.convert(first)
                } else {
                    let mut children = vec![self.convert(first)];
                    children.extend(rest);
                    TierTree::Markers {
                        priority: *i,
                        children,
                        markers,
                    }
                }
            }
            other => unreachable!("{other} is handled by its parent"),
        }
    }

    /// Flattens `L -> c X L | ε` (or `R -> m X R | ε`) into operands and
    /// separators.
    fn chain(&self, mut t: &CfgTree) -> (Vec<TierTree>, Vec<Token>) {
        let mut operands = Vec::new();
        let mut seps = Vec::new();
        while let CfgTree::Node { children, .. } = t {
            match children.as_slice() {
                [] => break,
                [sep, operand, rest] => {
                    seps.push(self.leaf(sep));
                    operands.push(self.convert(operand));
                    t = rest;
                }
                _ => unreachable!("chain productions have three symbols"),
            }
        }
        (operands, seps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::lexer::tokens_from_names;
    use crate::tables::generate_cfg;

    #[test]
    fn counts() {
        let cfg = generate_cfg(&fixtures::g_expr()).unwrap();
        assert_eq!(oracle_parse(&cfg, &["NUM", "PLUS", "NUM"]).count, 1);
        assert_eq!(oracle_parse(&cfg, &["PLUS"]).count, 0);
        for g in fixtures::all() {
            let cfg = generate_cfg(&g).unwrap();
            assert_eq!(oracle_parse::<&str>(&cfg, &[]).count, 1);
        }
    }

    #[test]
    fn ambiguity_is_counted() {
        use crate::tables::Production;
        let t = |s: &str| Symbol::Terminal(s.into());
        let n = Symbol::Nonterminal;
        // S -> S S | a
        let cfg = Cfg::from_productions(
            vec![
                Production {
                    head: Nonterminal::S,
                    body: vec![n(Nonterminal::S), n(Nonterminal::S)],
                },
                Production {
                    head: Nonterminal::S,
                    body: vec![t("a")],
                },
            ],
            vec!["a".into()],
        );
        assert_eq!(oracle_parse(&cfg, &["a", "a"]).count, 1);
        assert_eq!(oracle_parse(&cfg, &["a", "a", "a"]).count, 2);
    }

    #[test]
    fn converted_tree() {
        let g = fixtures::g_expr();
        let cfg = generate_cfg(&g).unwrap();
        let toks = tokens_from_names(&["NUM", "PLUS", "NUM", "STAR", "NUM"]);
        let raw = oracle_parse(&cfg, &toks).tree.unwrap();
        let tree = convert_cfg_tree(&g, &raw, &toks);
        assert_eq!(
            tree,
            TierTree::Connective {
                priority: 1,
                children: vec![
                    TierTree::Base(toks[0].clone()),
                    TierTree::Connective {
                        priority: 2,
                        children: vec![TierTree::Base(toks[2].clone()), TierTree::Base(toks[4].clone())],
                        operators: vec![toks[3].clone()],
                    },
                ],
                operators: vec![toks[1].clone()],
            }
        );
    }

    #[test]
    fn csv_conversion_keeps_empty_fields() {
        let g = fixtures::g_csv();
        let cfg = generate_cfg(&g).unwrap();
        let toks = tokens_from_names(&["FIELD", "COMMA", "COMMA", "NL", "FIELD"]);
        let raw = oracle_parse(&cfg, &toks).tree.unwrap();
        let tree = convert_cfg_tree(&g, &raw, &toks);
        assert_eq!(
            tree,
            TierTree::Markers {
                priority: 1,
                children: vec![
                    TierTree::Markers {
                        priority: 2,
                        children: vec![TierTree::Base(toks[0].clone()), TierTree::Empty, TierTree::Empty],
                        markers: vec![toks[1].clone(), toks[2].clone()],
                    },
                    TierTree::Base(toks[4].clone()),
                ],
                markers: vec![toks[3].clone()],
            }
        );
    }

    #[test]
    fn span_chart_agrees_with_memoized_counter() {
        use crate::testkit::{random_grammars, GrammarFuzzConfig, StringSampler, Bias};
        let mut grammars = fixtures::all();
        grammars.extend(random_grammars(&GrammarFuzzConfig::default().with_seed(5), 30));
        for (n, g) in grammars.iter().enumerate() {
            let cfg = generate_cfg(g).unwrap();
            let mut sampler = StringSampler::new(g, n as u64);
            for k in 0..60 {
                let bias = [Bias::Member, Bias::Mutate, Bias::Uniform][k % 3];
                let w = sampler.sample(7, bias);
                let mut chart = SpanChart::new(&cfg);
                for t in &w {
                    chart.push(t);
                }
                let memo = oracle_parse(&cfg, &w);
                assert_eq!(chart.count(), memo.count, "{w:?}");
                let mut earley = EarleyRecognizer::new(&cfg);
                for t in &w {
                    earley.push(t);
                }
                assert_eq!(chart.is_viable(), earley.is_alive(), "{w:?}");
                assert_eq!(chart.tree(), memo.tree, "{w:?}");
                while !chart.is_empty() {
                    chart.pop();
                }
                assert_eq!(chart.count(), 1);
            }
        }
    }

    #[test]
    fn span_chart_counts_ambiguity() {
        use crate::tables::Production;
        let t = |s: &str| Symbol::Terminal(s.into());
        let n = Symbol::Nonterminal;
        // S -> A A, A -> a | a a
        let cfg = Cfg::from_productions(
            vec![
                Production {
                    head: Nonterminal::S,
                    body: vec![n(Nonterminal::A), n(Nonterminal::A)],
                },
                Production {
                    head: Nonterminal::A,
                    body: vec![t("a")],
                },
                Production {
                    head: Nonterminal::A,
                    body: vec![t("a"), t("a")],
                },
            ],
            vec!["a".into()],
        );
        let mut chart = SpanChart::new(&cfg);
        let counts: Vec<u8> = (0..5)
            .map(|_| {
                chart.push("a");
                chart.count()
            })
            .collect();
        assert_eq!(counts, [0, 1, 2, 1, 0]);
        assert_eq!(oracle_parse(&cfg, &["a", "a", "a"]).count, 2);
    }

    #[test]
    fn earley_incremental() {
        let cfg = generate_cfg(&fixtures::g_dyck()).unwrap();
        let mut e = EarleyRecognizer::new(&cfg);
        assert!(e.accepts());
        assert!(e.push("L"));
        assert!(!e.accepts());
        assert!(e.push("R"));
        assert!(e.accepts());
        assert!(!e.push("R"));
        assert!(!e.is_alive());
        e.pop();
        assert!(e.accepts() && e.len() == 2);
    }
}
