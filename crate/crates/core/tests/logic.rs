mod common;

use common::{fixture, logic, rule_base, FIXTURES};
use dast_core::logic::{parse_logic_with, render_logic, LogicError, ParseOptions, SemanticLogic, Term};
use proptest::prelude::*;

#[test]
fn fixtures_round_trip() {
    for name in FIXTURES {
        let parsed = logic(name);
        let rendered = render_logic(&parsed);
        let reparsed = SemanticLogic::parse(&rendered).unwrap_or_else(|e| panic!("{name}: {e}\n{rendered}"));
        assert_eq!(reparsed, parsed, "{name}");
        assert_eq!(render_logic(&reparsed), rendered, "{name}: render is not a fixpoint");
        assert_eq!(reparsed.id(), parsed.id(), "{name}");
    }
}

#[test]
fn fixtures_pass_strict_mode() {
    for name in FIXTURES {
        parse_logic_with(&fixture(name), ParseOptions { strict: true }).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn semantic_logic_2_counts() {
    let stats = logic("semantic_logic_2.dsl").stats();
    assert_eq!(
        (
            stats.theory_count,
            stats.dependency_count,
            stats.model_element_count,
            stats.operator_count,
            stats.rule_count
        ),
        (11, 12, 14, 5, 13)
    );
}

#[test]
fn semantic_logic_1_alternatives_share_tags() {
    let l = logic("semantic_logic_1.dsl");
    let axiom_7: Vec<_> = l.rules().filter(|r| r.tag.as_deref() == Some("axiom-7")).collect();
    assert_eq!(axiom_7.len(), 7);
    let ids: Vec<u32> = axiom_7.iter().map(|r| r.id).collect();
    assert!(ids.windows(2).all(|w| w[1] == w[0] + 1), "alternatives get consecutive ids: {ids:?}");
    assert_eq!(l.stats().rule_count, 32);
}

#[test]
fn quantize_semantic_logic_2() {
    let l = logic("semantic_logic_2.dsl");
    let terms = l.quantize("#S").unwrap();
    assert_eq!(terms[0], l.parse_term("How(Ability(See(Unseen)))").unwrap());
    assert!(terms.contains(&l.parse_term("See <> Unseen").unwrap()));
}

#[test]
fn strict_mode_rejects_undeclared_symbols() {
    let src = "theory T:\n  intuitions: a\n  rule: a ==> b\n";
    assert!(SemanticLogic::parse(src).is_ok());
    match parse_logic_with(src, ParseOptions { strict: true }) {
        Err(LogicError::UndeclaredSymbol { line, symbol, .. }) => assert_eq!((line, symbol.as_str()), (3, "b")),
        other => panic!("expected undeclared symbol, got {other:?}"),
    }
}

#[test]
fn range_restriction() {
    let err = SemanticLogic::parse("theory T:\n  rule: a ==> f($X)\n").unwrap_err();
    assert!(matches!(err, LogicError::Invalid { line: 2, .. }), "{err:?}");
}

proptest! {
    #[test]
    fn generated_rule_bases_round_trip(src in rule_base()) {
        let parsed = SemanticLogic::parse(&src).unwrap();
        let reparsed = SemanticLogic::parse(&render_logic(&parsed)).unwrap();
        prop_assert_eq!(reparsed, parsed);
    }

    #[test]
    fn term_display_reparses(head in 0usize..3, atoms in prop::collection::vec(0usize..5, 1..4)) {
        let l = SemanticLogic::default();
        let args: Vec<Term> = atoms.iter().map(|i| Term::atom(&format!("p{i}"))).collect();
        let inner = Term::compound(&format!("h{head}"), args);
        let term = Term::infix("is-a", inner.clone(), Term::compound("Not", vec![inner]));
        prop_assert_eq!(l.parse_term(&term.to_string()).unwrap(), term);
    }
}
