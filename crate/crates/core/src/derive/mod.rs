//! Forward chaining over a working memory of ground terms.
//!
//! Derivation runs in rounds. In each round every rule (ascending id) is matched
//! against the memory as it stood when the round began; terms produced during the
//! round become matchable in the next one. A firing that yields at least one new
//! term records a lattice node whose premises are the nodes that produced the
//! matched memory terms. Derivation stops at the first round that adds nothing.

mod lattice;

use std::collections::{BTreeSet, HashMap, HashSet};

pub use lattice::{Lattice, LatticeError, LatticeNode, NodeId};

use crate::logic::{InstantiateError, QuantizeError, Rule, SemanticLogic, Substitution, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivationLimits {
    /// Maximum number of rounds, counting the final round that adds nothing.
    pub max_iterations: usize,
    pub max_term_depth: usize,
}

impl Default for DerivationLimits {
    fn default() -> Self {
        DerivationLimits {
            max_iterations: 10_000,
            max_term_depth: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    Iterations(usize),
    TermDepth(usize),
}

impl std::fmt::Display for Limit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Limit::Iterations(n) => write!(f, "max_iterations={n}"),
            Limit::TermDepth(n) => write!(f, "max_term_depth={n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeriveError {
    #[error("derivation needs at least one initial term")]
    EmptyInitial,
    #[error("initial term `{0}` is not ground")]
    NonGround(Term),
    #[error("limit {limit} exceeded")]
    LimitExceeded { limit: Limit, partial: Box<Lattice> },
    #[error(transparent)]
    Quantize(#[from] QuantizeError),
    #[error("positive limits required")]
    BadLimits,
}

/// Every distinct substitution under which `pattern` equals a memory term or one of
/// its subterms. Order: memory insertion order, then preorder within each term.
pub fn match_term(pattern: &Term, memory: &[Term]) -> Vec<Substitution> {
    let mut out: Vec<Substitution> = Vec::new();
    for term in memory {
        for sub in term.subterms() {
            let mut s = Substitution::new();
            if pattern.match_into(sub, &mut s) && !out.contains(&s) {
                out.push(s);
            }
        }
    }
    out
}

/// Instantiate every conclusion of `rule` under `sub`.
pub fn apply_rule(rule: &Rule, sub: &Substitution) -> Result<Vec<Term>, InstantiateError> {
    rule.conclusions.iter().map(|c| c.instantiate(sub)).collect()
}

pub fn lattice_terms(lattice: &Lattice) -> BTreeSet<Term> {
    lattice.terms().into_iter().cloned().collect()
}

/// Quantize `text` under `logic` and derive its lattice.
pub fn derive_text(
    text: &str,
    logic: &SemanticLogic,
    limits: DerivationLimits,
) -> Result<Lattice, DeriveError> {
    let initial = logic.quantize(text)?;
    let mut lattice = derive(&initial, logic, limits).map_err(|e| match e {
        DeriveError::LimitExceeded { limit, mut partial } => {
            partial.text = text.to_string();
            DeriveError::LimitExceeded { limit, partial }
        }
        other => other,
    })?;
    lattice.text = text.to_string();
    Ok(lattice)
}

struct Memory {
    terms: Vec<Term>,
    producer: Vec<NodeId>,
    index: HashSet<Term>,
}

impl Memory {
    fn insert(&mut self, term: Term, node: NodeId) {
        self.index.insert(term.clone());
        self.terms.push(term);
        self.producer.push(node);
    }
}

pub fn derive(
    initial: &[Term],
    logic: &SemanticLogic,
    limits: DerivationLimits,
) -> Result<Lattice, DeriveError> {
    if limits.max_iterations == 0 || limits.max_term_depth == 0 {
        return Err(DeriveError::BadLimits);
    }
    if initial.is_empty() {
        return Err(DeriveError::EmptyInitial);
    }
    if let Some(t) = initial.iter().find(|t| !t.is_ground()) {
        return Err(DeriveError::NonGround(t.clone()));
    }

    let mut lattice = Lattice {
        text: String::new(),
        logic_id: logic.id(),
        nodes: Vec::new(),
    };
    let mut mem = Memory {
        terms: Vec::new(),
        producer: Vec::new(),
        index: HashSet::new(),
    };
    for t in initial {
        if t.depth() > limits.max_term_depth {
            return Err(DeriveError::LimitExceeded {
                limit: Limit::TermDepth(limits.max_term_depth),
                partial: Box::new(lattice),
            });
        }
        if mem.index.contains(t) {
            continue;
        }
        let id = lattice.nodes.len();
        lattice.nodes.push(LatticeNode {
            id,
            level: 1,
            rule: None,
            terms: vec![t.clone()],
            premises: Vec::new(),
        });
        mem.insert(t.clone(), id);
    }

    let rules: Vec<&Rule> = logic.rules().collect();
    for _round in 0..limits.max_iterations {
        let visible = mem.terms.len();
        let mut added = false;
        for rule in &rules {
            for (sub, producers) in rule_matches(rule, &mem, visible) {
                let Ok(produced) = apply_rule(rule, &sub) else {
                    // A head variable bound to a non-atom yields no well-formed term.
                    continue;
                };
                let mut fresh: Vec<Term> = Vec::new();
                for t in produced {
                    if t.depth() > limits.max_term_depth {
                        return Err(DeriveError::LimitExceeded {
                            limit: Limit::TermDepth(limits.max_term_depth),
                            partial: Box::new(lattice),
                        });
                    }
                    if !mem.index.contains(&t) && !fresh.contains(&t) {
                        fresh.push(t);
                    }
                }
                if fresh.is_empty() {
                    continue;
                }
                let level = 1 + producers
                    .iter()
                    .map(|&p| lattice.nodes[p].level)
                    .max()
                    .expect("rules have premises");
                let id = lattice.nodes.len();
                for t in &fresh {
                    mem.insert(t.clone(), id);
                }
                lattice.nodes.push(LatticeNode {
                    id,
                    level,
                    rule: Some(rule.id),
                    terms: fresh,
                    premises: producers,
                });
                added = true;
            }
        }
        if !added {
            return Ok(lattice);
        }
    }
    Err(DeriveError::LimitExceeded {
        limit: Limit::Iterations(limits.max_iterations),
        partial: Box::new(lattice),
    })
}

/// Joint matches of all premises of `rule` against the first `visible` memory terms,
/// each paired with the distinct producer nodes of the matched terms.
fn rule_matches(rule: &Rule, mem: &Memory, visible: usize) -> Vec<(Substitution, Vec<NodeId>)> {
    let mut partial: Vec<(Substitution, Vec<NodeId>)> = vec![(Substitution::new(), Vec::new())];
    for premise in &rule.premises {
        let mut next = Vec::new();
        for (sub, producers) in &partial {
            for i in 0..visible {
                for candidate in mem.terms[i].subterms() {
                    let mut s = sub.clone();
                    if premise.match_into(candidate, &mut s) {
                        let mut p = producers.clone();
                        if !p.contains(&mem.producer[i]) {
                            p.push(mem.producer[i]);
                        }
                        next.push((s, p));
                    }
                }
            }
        }
        partial = next;
        if partial.is_empty() {
            break;
        }
    }
    let mut seen: HashMap<Substitution, ()> = HashMap::new();
    partial
        .into_iter()
        .filter(|(s, _)| seen.insert(s.clone(), ()).is_none())
        .map(|(s, mut p)| {
            p.sort_unstable();
            (s, p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_logic;

    fn logic(src: &str) -> SemanticLogic {
        parse_logic(src).unwrap()
    }

    #[test]
    fn head_variable_match() {
        let pat = Term::compound("$A", vec![Term::atom("See")]);
        let mem = [Term::compound("How", vec![Term::atom("See")])];
        let subs = match_term(&pat, &mem);
        assert_eq!(subs.len(), 1);
        assert_eq!(subs[0].values().next(), Some(&Term::atom("How")));
    }

    #[test]
    fn no_match_and_subterm_match() {
        assert!(match_term(&Term::atom("Foo"), &[Term::atom("Bar")]).is_empty());
        let l = logic("define #S = How(Ability(See(Unseen)))\n");
        let mem = [l.expand(&Term::atom("#S")).unwrap()];
        let subs = match_term(&l.parse_term("See(Unseen)").unwrap(), &mem);
        assert_eq!(subs, vec![Substitution::new()]);
    }

    #[test]
    fn apply_rule_instantiates_in_order() {
        let l = logic("theory T:\nrule: $A ==> Wrapped($A) And Other($A)\n");
        let rule = l.rules().next().unwrap();
        let mut sub = Substitution::new();
        sub.insert(crate::logic::Var::new("A"), Term::atom("X"));
        let out = apply_rule(rule, &sub).unwrap();
        let shown: Vec<String> = out.iter().map(Term::to_string).collect();
        assert_eq!(shown, ["Wrapped(X)", "Other(X)"]);
    }

    #[test]
    fn chain_of_two_rules() {
        let l = logic("theory T:\nrule: a ==> b\nrule: b ==> c\n");
        let lat = derive(&[Term::atom("a")], &l, DerivationLimits::default()).unwrap();
        let levels: Vec<usize> = lat.nodes.iter().map(|n| n.level).collect();
        assert_eq!(levels, [1, 2, 3]);
        assert_eq!(lat.nodes[2].terms, vec![Term::atom("c")]);
        assert_eq!(lat.sinks(), vec![2]);
        lat.validate().unwrap();
    }

    #[test]
    fn no_rules_means_axioms_only() {
        let l = logic("theory T:\n");
        let init = [Term::atom("a"), Term::atom("b"), Term::atom("a")];
        let lat = derive(&init, &l, DerivationLimits::default()).unwrap();
        assert_eq!(lat.nodes.len(), 2);
        assert!(lat.nodes.iter().all(|n| n.level == 1 && n.rule.is_none()));
    }

    #[test]
    fn runaway_rule_trips_a_limit() {
        let l = logic("theory T:\nrule: $X ==> f($X)\n");
        let limits = DerivationLimits {
            max_iterations: 5,
            max_term_depth: 64,
        };
        match derive(&[Term::atom("a")], &l, limits) {
            Err(DeriveError::LimitExceeded { limit, partial }) => {
                assert_eq!(limit, Limit::Iterations(5));
                assert!(partial.nodes.len() > 1);
                partial.validate().unwrap();
            }
            other => panic!("unexpected {other:?}"),
        }
        let limits = DerivationLimits {
            max_iterations: 1000,
            max_term_depth: 4,
        };
        assert!(matches!(
            derive(&[Term::atom("a")], &l, limits),
            Err(DeriveError::LimitExceeded {
                limit: Limit::TermDepth(4),
                ..
            })
        ));
    }

    #[test]
    fn new_terms_wait_for_the_next_round() {
        // Rule 2 could fire on b in the same round if rounds were not breadth-first.
        let l = logic("theory T:\nrule: a ==> b\nrule: b ==> c\nrule: a ==> d\n");
        let lat = derive(&[Term::atom("a")], &l, DerivationLimits::default()).unwrap();
        let order: Vec<String> = lat.nodes.iter().map(|n| n.terms[0].to_string()).collect();
        assert_eq!(order, ["a", "b", "d", "c"]);
    }

    #[test]
    fn premises_are_producers_of_matched_terms() {
        let l = logic("theory T:\nrule: a And b ==> c\n");
        let init = [Term::atom("x"), Term::atom("a"), Term::atom("b")];
        let lat = derive(&init, &l, DerivationLimits::default()).unwrap();
        assert_eq!(lat.nodes[3].premises, vec![1, 2]);
    }

    #[test]
    fn json_round_trip() {
        let l = logic("theory T:\nrule: a ==> b is-a c\n");
        let lat = derive(&[Term::atom("a")], &l, DerivationLimits::default()).unwrap();
        let back = Lattice::from_json(&lat.to_json(), &l).unwrap();
        assert_eq!(back, lat);
    }
}
