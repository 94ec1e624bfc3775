//! Bounded enumeration of a tier language straight from its recursive rules:
//! base items, bracketed strings, operator applications per tier, item
//! sequences and marker groups, iterated until nothing new fits.

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::grammar::{GrammarError, OperatorKind, TierGrammar};

/// Largest length [`enumerate_language`] accepts.
pub const MAX_ENUMERATION_LEN: usize = 10;

#[derive(Debug, Error)]
pub enum EnumerateError {
    #[error("enumeration is limited to length {MAX_ENUMERATION_LEN}, got {0}")]
    LimitExceeded(usize),
    #[error(transparent)]
    InvalidGrammar(#[from] GrammarError),
}

type Word = Vec<u16>;

/// Strings bucketed by length.
#[derive(Debug, Clone)]
struct Bucketed {
    by_len: Vec<Vec<Word>>,
    all: HashSet<Word>,
}

impl Bucketed {
    fn new(max_len: usize) -> Self {
        Bucketed {
            by_len: vec![Vec::new(); max_len + 1],
            all: HashSet::new(),
        }
    }

    fn insert(&mut self, w: Word) -> bool {
        if self.all.insert(w.clone()) {
            self.by_len[w.len()].push(w);
            true
        } else {
            false
        }
    }

    fn extend_from(&mut self, other: &Bucketed) {
        for bucket in &other.by_len {
            for w in bucket {
                self.insert(w.clone());
            }
        }
    }

    fn len(&self) -> usize {
        self.all.len()
    }

    fn words(&self) -> impl Iterator<Item = &Word> {
        self.by_len.iter().flatten()
    }
}

struct Enumerator {
    max_len: usize,
    base: Vec<u16>,
    open: Vec<u16>,
    close: Vec<u16>,
    marker_tiers: Vec<Vec<u16>>,
    operator_tiers: Vec<(OperatorKind, Vec<u16>)>,
}

impl Enumerator {
    /// All `x s y` with `x` drawn from `frontier` and `y` from `operands`,
    /// for each separator `s` (or no separator when `seps` is `None`),
    /// closed under repetition.
    fn chains(&self, operands: &Bucketed, seps: Option<&[u16]>, seed: &Bucketed) -> Bucketed {
        let mut result = seed.clone();
        let mut frontier: Vec<Word> = seed.words().cloned().collect();
        let sep_len = usize::from(seps.is_some());
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for x in &frontier {
                let room = self.max_len.saturating_sub(x.len() + sep_len);
                if x.len() + sep_len > self.max_len {
                    continue;
                }
                for bucket in &operands.by_len[..=room] {
                    for y in bucket {
                        let mut joined = |sep: Option<u16>| {
                            let mut w = x.clone();
                            w.extend(sep);
                            w.extend_from_slice(y);
                            if result.insert(w.clone()) {
                                next.push(w);
                            }
                        };
                        match seps {
                            Some(seps) => seps.iter().for_each(|&s| joined(Some(s))),
                            None => joined(None),
                        }
                    }
                }
            }
            frontier = next;
        }
        result
    }

    /// One round of the rules given the current language approximation.
    fn round(&self, language: &Bucketed) -> Bucketed {
        // Base items and bracketed strings.
        let mut level = Bucketed::new(self.max_len);
        for &b in &self.base {
            level.insert(vec![b]);
        }
        for inner in language.words() {
            if inner.len() + 2 > self.max_len {
                continue;
            }
            for &r in &self.open {
                for &e in &self.close {
                    let mut w = vec![r];
                    w.extend_from_slice(inner);
                    w.push(e);
                    level.insert(w);
                }
            }
        }

        // Operator tiers from the tightest binding outwards. `level` holds
        // what the current tier may take as operands.
        for (kind, ops) in self.operator_tiers.iter().rev() {
            level = match kind {
                OperatorKind::Postfix => {
                    let mut out = level.clone();
                    for w in level.words() {
                        if w.len() < self.max_len {
                            for &s in ops {
                                let mut v = w.clone();
                                v.push(s);
                                out.insert(v);
                            }
                        }
                    }
                    out
                }
                OperatorKind::Prefix => {
                    // An operand of a prefix may itself carry prefixes of
                    // the same tier.
                    let mut out = level.clone();
                    let mut frontier: Vec<Word> = level.words().cloned().collect();
                    while !frontier.is_empty() {
                        let mut next = Vec::new();
                        for w in &frontier {
                            if w.len() < self.max_len {
                                for &p in ops {
                                    let mut v = vec![p];
                                    v.extend_from_slice(w);
                                    if out.insert(v.clone()) {
                                        next.push(v);
                                    }
                                }
                            }
                        }
                        frontier = next;
                    }
                    out
                }
                OperatorKind::Connective => self.chains(&level, Some(ops), &level),
            };
        }

        // Item sequences, including the empty one.
        let mut empty = Bucketed::new(self.max_len);
        empty.insert(Vec::new());
        let mut groups = self.chains(&level, None, &empty);

        // Marker tiers from the highest priority outwards.
        for markers in self.marker_tiers.iter().rev() {
            groups = self.chains(&groups, Some(markers), &groups);
        }
        groups
    }
}

/// Every member of the language of `g` of length at most `max_len`, as
/// token name strings.
pub fn enumerate_language(
    g: &TierGrammar,
    max_len: usize,
) -> Result<BTreeSet<Vec<String>>, EnumerateError> {
    let names = g.terminals();
    Ok(enumerate_ids(g, max_len)?
        .into_iter()
        .map(|w| w.into_iter().map(|i| names[i as usize].clone()).collect())
        .collect())
}

/// Like [`enumerate_language`], with terminals given as indices into
/// [`TierGrammar::terminals`].
pub fn enumerate_ids(g: &TierGrammar, max_len: usize) -> Result<HashSet<Vec<u16>>, EnumerateError> {
    if max_len > MAX_ENUMERATION_LEN {
        return Err(EnumerateError::LimitExceeded(max_len));
    }
    g.ensure_valid()?;
    let names = g.terminals();
    let ids = |set: &BTreeSet<String>| -> Vec<u16> {
        names
            .iter()
            .enumerate()
            .filter(|(_, n)| set.contains(*n))
            .map(|(i, _)| i as u16)
            .collect()
    };
    let e = Enumerator {
        max_len,
        base: ids(&g.base),
        open: ids(&g.open),
        close: ids(&g.close),
        marker_tiers: g.marker_tiers.iter().map(ids).collect(),
        operator_tiers: g
            .operator_tiers
            .iter()
            .map(|t| (t.kind, ids(&t.terminals)))
            .collect(),
    };
    let mut language = Bucketed::new(max_len);
    language.insert(Vec::new());
    loop {
        let next = e.round(&language);
        let before = language.len();
        language.extend_from(&next);
        if language.len() == before {
            return Ok(language.all);
        }
    }
}
