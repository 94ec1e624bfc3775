//! Structural checks on tier parse trees.

use crate::grammar::{TermClass, TierGrammar};
use crate::lexer::Token;
use crate::tree::TierTree;

/// Operator priority of a node, or `None` for base and bracket nodes.
fn operator_priority(t: &TierTree) -> Option<usize> {
    match t {
        TierTree::Prefix { priority, .. }
        | TierTree::Postfix { priority, .. }
        | TierTree::Connective { priority, .. } => Some(*priority),
        _ => None,
    }
}

fn is_item_or_tighter(t: &TierTree, min: usize, prefix_min: usize) -> bool {
    match t {
        TierTree::Base(_) | TierTree::Bracket { .. } => true,
        TierTree::Prefix { priority, .. } => *priority >= prefix_min,
        TierTree::Postfix { .. } | TierTree::Connective { .. } => operator_priority(t) >= Some(min),
        _ => false,
    }
}

/// Checks the shape rules of tier parse trees against `g`. Returns the
/// first broken rule.
pub fn check_tree_invariants(g: &TierGrammar, tree: &TierTree) -> Result<(), String> {
    let class = |t: &Token| g.classify(&t.name);
    let expect = |ok: bool, what: &str| if ok { Ok(()) } else { Err(what.to_string()) };
    match tree {
        TierTree::Base(t) => expect(class(t) == TermClass::Base, "base leaf holds a non-base token"),
        TierTree::Bracket { open, child, close } => {
            expect(class(open) == TermClass::Open, "bracket opener is not an opening bracket")?;
            expect(class(close) == TermClass::Close, "bracket closer is not a closing bracket")?;
            check_tree_invariants(g, child)
        }
        TierTree::Prefix {
            priority,
            operator,
            child,
        } => {
            expect(class(operator) == TermClass::Prefix(*priority), "prefix operator priority")?;
            expect(
                is_item_or_tighter(child, priority + 1, *priority),
                "prefix operand binds looser than the prefix",
            )?;
            check_tree_invariants(g, child)
        }
        TierTree::Postfix {
            priority,
            child,
            operator,
        } => {
            expect(class(operator) == TermClass::Postfix(*priority), "postfix operator priority")?;
            expect(
                is_item_or_tighter(child, priority + 1, priority + 1),
                "postfix operand binds looser than the postfix",
            )?;
            check_tree_invariants(g, child)
        }
        TierTree::Connective {
            priority,
            children,
            operators,
        } => {
            expect(!operators.is_empty(), "connective node without operators")?;
            expect(children.len() == operators.len() + 1, "connective arity")?;
            for op in operators {
                expect(class(op) == TermClass::Connective(*priority), "connective priority")?;
            }
            for c in children {
                expect(
                    is_item_or_tighter(c, priority + 1, priority + 1),
                    "connective operand binds looser than the connective",
                )?;
                check_tree_invariants(g, c)?;
            }
            Ok(())
        }
        TierTree::Markers {
            priority,
            children,
            markers,
        } => {
            expect(!markers.is_empty(), "marker node without markers")?;
            expect(children.len() == markers.len() + 1, "marker group arity")?;
            for m in markers {
                expect(class(m) == TermClass::Marker(*priority), "marker priority")?;
            }
            for c in children {
                if let TierTree::Markers { priority: p, .. } = c {
                    expect(p > priority, "nested marker group is not of higher priority")?;
                }
                check_tree_invariants(g, c)?;
            }
            Ok(())
        }
        TierTree::Sequence(children) => {
            expect(children.len() >= 2, "sequence with fewer than two items")?;
            for c in children {
                expect(
                    is_item_or_tighter(c, 1, 1),
                    "sequence element is not an item",
                )?;
                check_tree_invariants(g, c)?;
            }
            Ok(())
        }
        TierTree::Empty => Ok(()),
    }
}

/// Whether the tree's tokens, in order, are exactly `tokens`.
pub fn preserves_yield(tree: &TierTree, tokens: &[Token]) -> bool {
    let got = tree.tokens();
    got.len() == tokens.len() && got.iter().zip(tokens).all(|(a, b)| *a == b)
}
