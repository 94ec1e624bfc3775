//! From text to trees and back.

use tiergram::lexer::OTHER;
use tiergram::testkit::{check_tree_invariants, preserves_yield};
use tiergram::{
    check, fixtures, lex_and_parse, render_tree, Condition, Error, LexMode, Lexer, ParseError, Parser, TierTree,
    TreeDoc, TreeFormat,
};

fn lex(g: &tiergram::TierGrammar, text: &str) -> Vec<tiergram::Token> {
    Lexer::new(&g.tokens).unwrap().tokenize(text, LexMode::Strict).unwrap()
}

#[test]
fn prefix_minus_then_product() {
    let g = fixtures::g_expr();
    let tree = lex_and_parse(&g, "-(2+3)*4").unwrap();
    let TierTree::Connective {
        priority,
        children,
        operators,
    } = &tree
    else {
        panic!("root is {}", tree.kind());
    };
    assert_eq!(*priority, 2);
    assert_eq!(operators.len(), 1);
    assert!(matches!(children[0], TierTree::Prefix { priority: 3, .. }));
    let json = render_tree(&tree, TreeFormat::Json);
    assert!(json.starts_with(r#"{"kind":"connective","priority":2,"#));
}

#[test]
fn dangling_operator_reports_expected_tokens() {
    let g = fixtures::g_expr();
    let err = lex_and_parse(&g, "2+").unwrap_err();
    assert_eq!(err.to_string(), "1:3: unexpected end of input, expected one of NUM, ID, LPAR, MINUS");
    let Error::Parse(ParseError::Unexpected { position, .. }) = err else {
        panic!("not a parse error");
    };
    assert_eq!(position.index, 2);
}

#[test]
fn positions_count_lines() {
    let g = fixtures::g_expr();
    let err = lex_and_parse(&g, "1 +\n  * 2").unwrap_err();
    assert!(err.to_string().starts_with("2:3: unexpected STAR"), "{err}");
}

#[test]
fn lexemes_survive_a_json_round_trip() {
    let g = fixtures::g_expr();
    for text in ["a * (b + -c) d", "", "((1))", "-x y z", "1*2*3+4"] {
        let tokens = lex(&g, text);
        let tree = Parser::new(&g).unwrap().parse(&tokens).unwrap();
        check_tree_invariants(&g, &tree).unwrap();
        assert!(preserves_yield(&tree, &tokens));
        let doc = TreeDoc::from_json(&render_tree(&tree, TreeFormat::Json)).unwrap();
        let joined: String = doc.lexemes().concat();
        let expected: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        assert_eq!(joined, expected);
    }
}

#[test]
fn csv_text_is_always_a_member() {
    let g = fixtures::g_csv();
    let text = "a,b,,c\n\n,x\nlast,";
    let tokens = lex(&g, text);
    assert!(check(&g, &tokens).is_ok());
    let tree = Parser::new(&g).unwrap().parse(&tokens).unwrap();
    assert!(matches!(tree, TierTree::Markers { priority: 1, .. }));
}

#[test]
fn lenient_input_parses_with_other_as_base() {
    let g = fixtures::g_expr();
    let text = "1 + $ * 2";
    assert!(matches!(lex_and_parse(&g, text), Err(Error::Lex(e)) if e.offset == 4));

    let lenient = g.with_implicit_other();
    let tokens = Lexer::new(&lenient.tokens).unwrap().tokenize(text, LexMode::Lenient).unwrap();
    assert_eq!(tokens[2].name, OTHER);
    let tree = Parser::new(&lenient).unwrap().parse(&tokens).unwrap();
    assert_eq!(
        render_tree(&tree, TreeFormat::Sexpr),
        r#"(connective:1 NUM="1" PLUS="+" (connective:2 OTHER="$" STAR="*" NUM="2"))"#
    );
}

#[test]
fn unclassified_tokens_are_rejected_everywhere() {
    let g = fixtures::g_expr();
    let tokens = Lexer::new(&g.tokens).unwrap().tokenize("# + 1", LexMode::Lenient).unwrap();
    let err = Parser::new(&g).unwrap().parse(&tokens).unwrap_err();
    assert!(matches!(err, ParseError::UnclassifiedToken { .. }), "{err}");
    assert_eq!(check(&g, &tokens).unwrap_err().condition, Condition::UnclassifiedToken);
    // The leftmost violation wins: here the operator before the stray token.
    let tokens = Lexer::new(&g.tokens).unwrap().tokenize("1 + #", LexMode::Lenient).unwrap();
    let v = check(&g, &tokens).unwrap_err();
    assert_eq!((v.condition, v.index), (Condition::ConnectiveRight, 1));
}

#[test]
fn rendering_is_deterministic() {
    let g = fixtures::g_post();
    let tokens = lex(&g, "wow?! such? doge!");
    let a = Parser::new(&g).unwrap().parse(&tokens).unwrap();
    let b = Parser::new(&g).unwrap().parse(&tokens).unwrap();
    for f in [TreeFormat::Json, TreeFormat::Sexpr] {
        assert_eq!(render_tree(&a, f), render_tree(&b, f));
    }
}
