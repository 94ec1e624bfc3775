//! Oracles and generators for testing tier grammar tooling.
//!
//! Everything here is deliberately independent of the predictive parser:
//! [`enumerate_language`] applies the language rules directly,
//! [`oracle_parse`] and [`EarleyRecognizer`] are general context-free
//! parsers, and [`closed_forms`] writes the FIRST/FOLLOW sets down from the
//! terminal classes.

pub mod closed_forms;
mod enumerate;
mod fuzz;
mod invariants;
mod oracle;

pub use enumerate::{enumerate_ids, enumerate_language, EnumerateError, MAX_ENUMERATION_LEN};
pub use fuzz::{random_grammar, random_grammars, Bias, GrammarFuzzConfig, StringSampler};
pub use invariants::{check_tree_invariants, preserves_yield};
pub use oracle::{convert_cfg_tree, oracle_parse, CfgTree, EarleyRecognizer, OracleResult, SpanChart};

/// Depth-first walk over every string of length at most `max_len` over the
/// symbols `0..alphabet`, in length-lexicographic-by-prefix order.
///
/// `step` derives the state for a string from the state of its prefix, so
/// incremental recognizers share work across strings with a common prefix.
/// `visit` sees each string with its state. Returning `false` from `descend`
/// skips all proper extensions of a string.
pub fn walk_strings<S: Clone>(
    alphabet: usize,
    max_len: usize,
    root: S,
    step: &mut dyn FnMut(&S, usize) -> S,
    visit: &mut dyn FnMut(&[usize], &S),
    descend: &mut dyn FnMut(&[usize], &S) -> bool,
) {
    fn go<S: Clone>(
        alphabet: usize,
        max_len: usize,
        prefix: &mut Vec<usize>,
        state: &S,
        step: &mut dyn FnMut(&S, usize) -> S,
        visit: &mut dyn FnMut(&[usize], &S),
        descend: &mut dyn FnMut(&[usize], &S) -> bool,
    ) {
        visit(prefix, state);
        if prefix.len() == max_len || !descend(prefix, state) {
            return;
        }
        for a in 0..alphabet {
            let next = step(state, a);
            prefix.push(a);
            go(alphabet, max_len, prefix, &next, step, visit, descend);
            prefix.pop();
        }
    }
    go(alphabet, max_len, &mut Vec::new(), &root, step, visit, descend);
}
