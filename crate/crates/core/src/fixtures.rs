//! The grammars shipped with the crate, embedded at compile time.
//!
//! The same documents live under `crates/core/grammars/` for use with the
//! command-line tool.

use crate::grammar::{load_grammar, TierGrammar};

pub const G_EXPR_JSON: &str = include_str!("../grammars/g_expr.json");
pub const G_CSV_JSON: &str = include_str!("../grammars/g_csv.json");
pub const G_DYCK_JSON: &str = include_str!("../grammars/g_dyck.json");
pub const G_POST_JSON: &str = include_str!("../grammars/g_post.json");

/// Arithmetic-style expressions: `+` below `*`, prefix `-` binding tightest.
pub fn g_expr() -> TierGrammar {
    load_grammar(G_EXPR_JSON).expect("g_expr fixture is valid")
}

/// Comma-separated rows: newline markers group rows, commas group fields.
pub fn g_csv() -> TierGrammar {
    load_grammar(G_CSV_JSON).expect("g_csv fixture is valid")
}

/// Balanced parentheses; no base terminals at all.
pub fn g_dyck() -> TierGrammar {
    load_grammar(G_DYCK_JSON).expect("g_dyck fixture is valid")
}

/// Words with two postfix tiers, `!` (priority 1) and `?` (priority 2).
pub fn g_post() -> TierGrammar {
    load_grammar(G_POST_JSON).expect("g_post fixture is valid")
}

pub fn all() -> Vec<TierGrammar> {
    vec![g_expr(), g_csv(), g_dyck(), g_post()]
}
