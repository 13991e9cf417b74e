#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use dast_core::derive::{apply_rule, Lattice};
use dast_core::logic::{SemanticLogic, Substitution, Term};
use proptest::prelude::*;

pub const FIXTURES: [&str; 5] = [
    "chain.dsl",
    "chain_3.dsl",
    "five_sentences.dsl",
    "semantic_logic_1.dsl",
    "semantic_logic_2.dsl",
];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).expect("fixture readable")
}

pub fn logic(name: &str) -> SemanticLogic {
    SemanticLogic::parse(&fixture(name)).expect("fixture parses")
}

/// A linear chain `a0 ==> a1 ==> ... ==> aN` with `#S = a0`.
pub fn chain_source(n: usize) -> String {
    let atoms: Vec<String> = (0..=n).map(|i| format!("a{i}")).collect();
    let mut src = format!("define #S = a0\n\ntheory Chain:\n  intuitions: {}\n", atoms.join(", "));
    for i in 0..n {
        src.push_str(&format!("  rule: a{i} ==> a{}\n", i + 1));
    }
    src
}

/// One rule in a generated rule base. Every shape keeps the closure finite:
/// conclusions never nest deeper than the premise they came from.
#[derive(Debug, Clone)]
pub enum RuleShape {
    Atom { from: usize, to: usize },
    Pair { left: usize, right: usize, to: usize },
    Rename { from: usize, to: usize },
    Wrap { from: usize, head: usize, atom: usize },
    Relate { from: usize, to: usize },
}

impl RuleShape {
    fn render(&self) -> String {
        match self {
            RuleShape::Atom { from, to } => format!("p{from} ==> p{to}"),
            RuleShape::Pair { left, right, to } => format!("p{left} And p{right} ==> p{to}"),
            RuleShape::Rename { from, to } => format!("h{from}($X) ==> h{to}($X)"),
            RuleShape::Wrap { from, head, atom } => format!("p{from} ==> h{head}(p{atom})"),
            RuleShape::Relate { from, to } => format!("h{from}($X) ==> $X is-a p{to}"),
        }
    }
}

pub const ATOMS: usize = 5;
pub const HEADS: usize = 3;

pub fn rule_shape() -> impl Strategy<Value = RuleShape> {
    prop_oneof![
        (0..ATOMS, 0..ATOMS).prop_map(|(from, to)| RuleShape::Atom { from, to }),
        (0..ATOMS, 0..ATOMS, 0..ATOMS).prop_map(|(left, right, to)| RuleShape::Pair { left, right, to }),
        (0..HEADS, 0..HEADS).prop_map(|(from, to)| RuleShape::Rename { from, to }),
        (0..ATOMS, 0..HEADS, 0..ATOMS).prop_map(|(from, head, atom)| RuleShape::Wrap { from, head, atom }),
        (0..HEADS, 0..ATOMS).prop_map(|(from, to)| RuleShape::Relate { from, to }),
    ]
}

/// Rules spread round-robin over `theories` theories.
pub fn render_rule_base(rules: &[RuleShape], theories: usize) -> String {
    let mut src = String::new();
    for t in 0..theories {
        src.push_str(&format!("theory T{t}:\n"));
        if t == 0 {
            let atoms: Vec<String> = (0..ATOMS).map(|i| format!("p{i}")).collect();
            let heads: Vec<String> = (0..HEADS).map(|i| format!("h{i}")).collect();
            src.push_str(&format!("  intuitions: {}\n", atoms.join(", ")));
            src.push_str(&format!("  operators: {}\n", heads.join(", ")));
        }
        for (i, r) in rules.iter().enumerate() {
            if i % theories == t {
                src.push_str(&format!("  rule: {}\n", r.render()));
            }
        }
    }
    src
}

pub fn rule_base() -> impl Strategy<Value = String> {
    (prop::collection::vec(rule_shape(), 0..10), 1usize..4)
        .prop_map(|(rules, theories)| render_rule_base(&rules, theories))
}

pub fn initial_terms() -> impl Strategy<Value = Vec<Term>> {
    let term = prop_oneof![
        (0..ATOMS).prop_map(|i| Term::atom(&format!("p{i}"))),
        (0..HEADS, 0..ATOMS).prop_map(|(h, i)| Term::compound(&format!("h{h}"), vec![Term::atom(&format!("p{i}"))])),
        (0..HEADS, 0..HEADS, 0..ATOMS).prop_map(|(g, h, i)| {
            Term::compound(
                &format!("h{g}"),
                vec![Term::compound(&format!("h{h}"), vec![Term::atom(&format!("p{i}"))])],
            )
        }),
    ];
    prop::collection::btree_set(term, 1..4).prop_map(|s| s.into_iter().collect())
}

/// Every term some rule could produce from `memory`, found by joining premise
/// matches over all subterms independently of the engine.
pub fn one_step_consequences(logic: &SemanticLogic, memory: &BTreeSet<Term>) -> BTreeSet<Term> {
    let subterms: BTreeSet<&Term> = memory.iter().flat_map(|t| t.subterms()).collect();
    let mut out = BTreeSet::new();
    for rule in logic.rules() {
        let mut subs = vec![Substitution::new()];
        for premise in &rule.premises {
            let mut next = Vec::new();
            for sub in &subs {
                for target in &subterms {
                    let mut s = sub.clone();
                    if premise.match_into(target, &mut s) {
                        next.push(s);
                    }
                }
            }
            subs = next;
        }
        for sub in subs {
            if let Ok(terms) = apply_rule(rule, &sub) {
                out.extend(terms);
            }
        }
    }
    out
}

pub fn term_set(lattice: &Lattice) -> BTreeSet<Term> {
    lattice.terms().into_iter().cloned().collect()
}
