//! Seeded generators of random valid grammars and of token strings.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grammar::{OperatorKind, OperatorTier, TierGrammar, TokenDef};
use crate::tables::{generate_cfg, Cfg, Nonterminal, Symbol};

/// Bounds for [`random_grammar`].
#[derive(Debug, Clone, PartialEq)]
pub struct GrammarFuzzConfig {
    /// Most terminals in any one class or tier (at least 1).
    pub max_per_class: usize,
    pub max_marker_tiers: usize,
    pub max_operator_tiers: usize,
    /// Cap on the number of classified terminals overall; `None` for no cap
    /// beyond the per-class bounds.
    pub max_total: Option<usize>,
    /// Relative weights of prefix, postfix and connective tiers.
    pub kind_weights: [u32; 3],
    /// Probability that the grammar has brackets.
    pub bracket_probability: f64,
    /// Probability that the base class is empty.
    pub empty_base_probability: f64,
    pub seed: u64,
}

impl Default for GrammarFuzzConfig {
    fn default() -> Self {
        GrammarFuzzConfig {
            max_per_class: 4,
            max_marker_tiers: 3,
            max_operator_tiers: 3,
            max_total: None,
            kind_weights: [1, 1, 1],
            bracket_probability: 0.5,
            empty_base_probability: 0.1,
            seed: 0,
        }
    }
}

impl GrammarFuzzConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn bracket_free(mut self) -> Self {
        self.bracket_probability = 0.0;
        self
    }

    pub fn with_max_total(mut self, total: usize) -> Self {
        self.max_total = Some(total);
        self
    }
}

/// Characters used as single-character token patterns.
const PATTERN_CHARS: &str = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Base,
    Open,
    Close,
    Marker(usize),
    Operator(usize),
}

/// One grammar drawn with the configured seed.
pub fn random_grammar(cfg: &GrammarFuzzConfig) -> TierGrammar {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    draw_grammar(cfg, &mut rng)
}

/// `n` grammars from one random stream seeded with `cfg.seed`.
pub fn random_grammars(cfg: &GrammarFuzzConfig, n: usize) -> Vec<TierGrammar> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..n).map(|_| draw_grammar(cfg, &mut rng)).collect()
}

fn draw_grammar(cfg: &GrammarFuzzConfig, rng: &mut ChaCha8Rng) -> TierGrammar {
    let per_class = cfg.max_per_class.max(1);
    let total_cap = cfg.max_total.unwrap_or(usize::MAX).max(1);

    // Every slot needs one terminal; drop slots until the minimum fits.
    let mut slots = Vec::new();
    if !rng.gen_bool(cfg.empty_base_probability.clamp(0.0, 1.0)) {
        slots.push(Slot::Base);
    }
    if rng.gen_bool(cfg.bracket_probability.clamp(0.0, 1.0)) {
        slots.push(Slot::Open);
        slots.push(Slot::Close);
    }
    let markers = rng.gen_range(0..=cfg.max_marker_tiers);
    let operators = rng.gen_range(0..=cfg.max_operator_tiers);
    slots.extend((0..markers).map(Slot::Marker));
    slots.extend((0..operators).map(Slot::Operator));
    while slots.len() > total_cap {
        let i = rng.gen_range(0..slots.len());
        match slots[i] {
            Slot::Open | Slot::Close => slots.retain(|s| !matches!(s, Slot::Open | Slot::Close)),
            _ => {
                slots.remove(i);
            }
        }
    }
    if slots.is_empty() {
        slots.push(Slot::Base);
    }

    let mut counts: Vec<usize> = vec![1; slots.len()];
    let budget = total_cap.min(per_class * slots.len());
    let extra = rng.gen_range(0..=budget - slots.len());
    for _ in 0..extra {
        let open: Vec<usize> = (0..slots.len()).filter(|&i| counts[i] < per_class).collect();
        match open.choose(rng) {
            Some(&i) => counts[i] += 1,
            None => break,
        }
    }

    let mut chars: Vec<char> = PATTERN_CHARS.chars().collect();
    chars.shuffle(rng);
    let mut chars = chars.into_iter();

    let mut tokens: Vec<TokenDef> = Vec::new();
    let mut g = TierGrammar::new();
    let mut marker_sets: Vec<BTreeSet<String>> = vec![BTreeSet::new(); markers];
    let mut operator_sets: Vec<BTreeSet<String>> = vec![BTreeSet::new(); operators];
    let kinds: Vec<OperatorKind> = (0..operators).map(|_| draw_kind(cfg, rng)).collect();
    for (slot, &count) in slots.iter().zip(&counts) {
        for j in 0..count {
            let name = match slot {
                Slot::Base => format!("B{j}"),
                Slot::Open => format!("L{j}"),
                Slot::Close => format!("R{j}"),
                Slot::Marker(i) => format!("M{}_{j}", i + 1),
                Slot::Operator(i) => {
                    let tag = match kinds[*i] {
                        OperatorKind::Prefix => 'P',
                        OperatorKind::Postfix => 'S',
                        OperatorKind::Connective => 'C',
                    };
                    format!("{tag}{}_{j}", i + 1)
                }
            };
            let c = chars.next().expect("enough pattern characters");
            tokens.push(TokenDef::new(name.clone(), regex_syntax::escape(&c.to_string())));
            match slot {
                Slot::Base => {
                    g.base.insert(name);
                }
                Slot::Open => {
                    g.open.insert(name);
                }
                Slot::Close => {
                    g.close.insert(name);
                }
                Slot::Marker(i) => {
                    marker_sets[*i].insert(name);
                }
                Slot::Operator(i) => {
                    operator_sets[*i].insert(name);
                }
            }
        }
    }
    // Tiers whose slot was dropped are skipped; the rest keep their order.
    g.marker_tiers = marker_sets.into_iter().filter(|s| !s.is_empty()).collect();
    g.operator_tiers = operator_sets
        .into_iter()
        .zip(kinds)
        .filter(|(s, _)| !s.is_empty())
        .map(|(terminals, kind)| OperatorTier { kind, terminals })
        .collect();
    // Shuffle declaration order so that nothing depends on it.
    tokens.shuffle(rng);
    g.tokens = tokens;
    debug_assert!(g.is_valid(), "generated grammar must validate: {:?}", g.validate());
    g
}

fn draw_kind(cfg: &GrammarFuzzConfig, rng: &mut ChaCha8Rng) -> OperatorKind {
    let [p, s, c] = cfg.kind_weights;
    let total = (p + s + c).max(1);
    let x = rng.gen_range(0..total);
    if x < p {
        OperatorKind::Prefix
    } else if x < p + s {
        OperatorKind::Postfix
    } else {
        OperatorKind::Connective
    }
}

/// How [`StringSampler::sample`] picks strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bias {
    /// Each token uniformly from the grammar's terminals.
    Uniform,
    /// A random member of the language.
    Member,
    /// A member with one token replaced, inserted or deleted.
    Mutate,
}

/// Draws token strings for one grammar.
#[derive(Debug, Clone)]
pub struct StringSampler {
    terminals: Vec<String>,
    cfg: Cfg,
    min_len: HashMap<Nonterminal, usize>,
    rng: ChaCha8Rng,
}

impl StringSampler {
    pub fn new(g: &TierGrammar, seed: u64) -> StringSampler {
        let cfg = generate_cfg(g).expect("sampler needs a valid grammar");
        let min_len = min_lengths(&cfg);
        StringSampler {
            terminals: g.terminals(),
            cfg,
            min_len,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// A string of at most `max_len` tokens.
    pub fn sample(&mut self, max_len: usize, bias: Bias) -> Vec<String> {
        match bias {
            Bias::Uniform => {
                let n = self.rng.gen_range(0..=max_len);
                (0..n)
                    .map(|_| self.terminals.choose(&mut self.rng).unwrap().clone())
                    .collect()
            }
            Bias::Member => {
                let budget = self.rng.gen_range(0..=max_len);
                self.derive(budget)
            }
            Bias::Mutate => {
                let budget = self.rng.gen_range(0..=max_len);
                let mut s = self.derive(budget);
                let t = self.terminals.choose(&mut self.rng).unwrap().clone();
                if s.is_empty() {
                    if max_len > 0 {
                        s.push(t);
                    }
                    return s;
                }
                let i = self.rng.gen_range(0..s.len());
                match self.rng.gen_range(0..3) {
                    1 => {
                        s.remove(i);
                    }
                    2 if s.len() < max_len => s.insert(i, t),
                    _ => s[i] = t,
                }
                s
            }
        }
    }

    /// A random leftmost derivation whose yield has at most `budget`
    /// tokens.
    fn derive(&mut self, budget: usize) -> Vec<String> {
        let mut out = Vec::new();
        let mut stack = vec![Symbol::Nonterminal(self.cfg.start())];
        // Tokens still owed to the symbols on the stack.
        let mut committed = self.min_len[&self.cfg.start()];
        while let Some(sym) = stack.pop() {
            match sym {
                Symbol::Terminal(t) => {
                    out.push(t);
                    committed -= 1;
                }
                Symbol::Nonterminal(n) => {
                    let own = self.min_len[&n];
                    let room = budget - out.len() - committed;
                    let fits: Vec<usize> = self
                        .cfg
                        .alternatives(n)
                        .filter(|(_, p)| self.body_min(&p.body) <= own + room)
                        .map(|(i, _)| i)
                        .collect();
                    let &choice = fits.choose(&mut self.rng).expect("the shortest alternative fits");
                    let body = self.cfg.productions()[choice].body.clone();
                    committed = committed - own + self.body_min(&body);
                    stack.extend(body.into_iter().rev());
                }
            }
        }
        out
    }

    fn body_min(&self, body: &[Symbol]) -> usize {
        body.iter()
            .map(|s| match s {
                Symbol::Terminal(_) => 1,
                Symbol::Nonterminal(n) => self.min_len[n],
            })
            .sum()
    }
}

/// Length of the shortest yield of each nonterminal.
fn min_lengths(cfg: &Cfg) -> HashMap<Nonterminal, usize> {
    let mut m: HashMap<Nonterminal, usize> =
        cfg.nonterminals().into_iter().map(|n| (n, usize::MAX)).collect();
    loop {
        let mut changed = false;
        for p in cfg.productions() {
            let len = p.body.iter().try_fold(0usize, |acc, s| match s {
                Symbol::Terminal(_) => Some(acc + 1),
                Symbol::Nonterminal(n) => m[n].checked_add(acc).filter(|&v| v != usize::MAX),
            });
            if let Some(len) = len {
                if len < m[&p.head] {
                    m.insert(p.head, len);
                    changed = true;
                }
            }
        }
        if !changed {
            return m;
        }
    }
}
