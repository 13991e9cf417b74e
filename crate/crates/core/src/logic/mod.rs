//! Semantic Logic rule bases: theories of intuition symbols and symbol-generation rules.
//!
//! A rule base is read from a small line-oriented DSL (`parse_logic`) and can be
//! written back canonically (`render_logic`). Texts enter the system through
//! `quantize_text`, which turns a sentence into the initial working memory.

mod parser;
mod term;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub use parser::{parse_logic_with, ParseOptions};
pub use term::{Head, InstantiateError, Substitution, Symbol, Term, Var, AND, QUERY};

/// Infix operators known without declaration. `infix:` lines add more.
pub const BUILTIN_INFIX: [&str; 7] = ["is-a", "is-in", "<>", "=>", AND, "is-owned-to", "Need"];

/// Text symbol that a rule base uses for "the sentence under study".
pub const DEFAULT_TEXT_SYMBOL: &str = "#S";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: undeclared symbol `{symbol}` in theory `{theory}`")]
    UndeclaredSymbol {
        line: usize,
        symbol: String,
        theory: String,
    },
    #[error("cyclic binding through {symbol}")]
    CyclicBinding { symbol: String },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuantizeError {
    #[error("text `{0}` has no binding and mentions no intuition symbol")]
    NoMatch(String),
}

pub type RuleId = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: RuleId,
    pub theory: String,
    pub premises: Vec<Term>,
    pub conclusions: Vec<Term>,
    pub tag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theory {
    pub name: String,
    pub intuitions: Vec<Symbol>,
    pub operators: Vec<Symbol>,
    pub facts: Vec<Term>,
    pub rules: Vec<Rule>,
}

impl Theory {
    pub fn new(name: &str) -> Self {
        Theory {
            name: name.to_string(),
            intuitions: Vec::new(),
            operators: Vec::new(),
            facts: Vec::new(),
            rules: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SemanticLogic {
    pub theories: Vec<Theory>,
    pub bindings: BTreeMap<Symbol, Term>,
    /// User-declared infix operators, beyond [`BUILTIN_INFIX`].
    pub infix: Vec<Symbol>,
}

/// Parse a rule base without the undeclared-symbol check.
pub fn parse_logic(src: &str) -> Result<SemanticLogic, LogicError> {
    parse_logic_with(src, ParseOptions::default())
}

pub fn render_logic(logic: &SemanticLogic) -> String {
    logic.render()
}

pub fn logic_stats(logic: &SemanticLogic) -> LogicStats {
    logic.stats()
}

pub fn quantize_text(text: &str, logic: &SemanticLogic) -> Result<Vec<Term>, QuantizeError> {
    logic.quantize(text)
}

impl SemanticLogic {
    pub fn parse(src: &str) -> Result<Self, LogicError> {
        parse_logic(src)
    }

    /// Rules across all theories in ascending id order.
    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        let mut all: Vec<&Rule> = self.theories.iter().flat_map(|t| &t.rules).collect();
        all.sort_by_key(|r| r.id);
        all.into_iter()
    }

    pub fn rule(&self, id: RuleId) -> Option<&Rule> {
        self.theories.iter().flat_map(|t| &t.rules).find(|r| r.id == id)
    }

    pub fn theory(&self, name: &str) -> Option<&Theory> {
        self.theories.iter().find(|t| t.name == name)
    }

    pub fn infix_operators(&self) -> BTreeSet<String> {
        BUILTIN_INFIX
            .iter()
            .map(|s| s.to_string())
            .chain(self.infix.iter().map(|s| s.as_str().to_string()))
            .collect()
    }

    /// Parse a term in this rule base's operator vocabulary.
    pub fn parse_term(&self, src: &str) -> Result<Term, LogicError> {
        parser::parse_term_with(src, &self.infix_operators())
    }

    /// Short content hash of the canonical rendering.
    pub fn id(&self) -> String {
        let digest = Sha256::digest(self.render().as_bytes());
        digest[..8].iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    /// Expand text symbols through the bindings.
    pub fn expand(&self, term: &Term) -> Result<Term, LogicError> {
        term.expand_bindings(&self.bindings, &mut Vec::new())
            .map_err(|s| LogicError::CyclicBinding {
                symbol: s.as_str().to_string(),
            })
    }

    /// A copy of this rule base with `symbol` bound (or rebound) to `term`.
    pub fn with_binding(&self, symbol: &str, term: Term) -> Result<SemanticLogic, LogicError> {
        if !symbol.starts_with('#') || !parser::is_identifier(symbol) {
            return Err(LogicError::Invalid {
                line: 0,
                message: format!("`{symbol}` is not a text symbol"),
            });
        }
        if !term.is_ground() {
            return Err(LogicError::Invalid {
                line: 0,
                message: format!("binding for {symbol} must be ground"),
            });
        }
        let mut out = self.clone();
        out.bindings.insert(Symbol::new(symbol), term);
        for sym in out.bindings.keys() {
            let mut stack = vec![sym.clone()];
            out.bindings[sym]
                .expand_bindings(&out.bindings, &mut stack)
                .map_err(|s| LogicError::CyclicBinding {
                    symbol: s.as_str().to_string(),
                })?;
        }
        Ok(out)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if !self.infix.is_empty() {
            let _ = writeln!(out, "infix: {}", join(&self.infix));
        }
        for (sym, term) in &self.bindings {
            let _ = writeln!(out, "define {sym} = {term}");
        }
        for theory in &self.theories {
            if !out.is_empty() {
                out.push('\n');
            }
            let _ = writeln!(out, "theory {}:", theory.name);
            if !theory.intuitions.is_empty() {
                let _ = writeln!(out, "  intuitions: {}", join(&theory.intuitions));
            }
            if !theory.operators.is_empty() {
                let _ = writeln!(out, "  operators: {}", join(&theory.operators));
            }
            for fact in &theory.facts {
                let _ = writeln!(out, "  fact: {fact}");
            }
            for rule in &theory.rules {
                let tag = rule
                    .tag
                    .as_ref()
                    .map(|t| format!("[{t}]"))
                    .unwrap_or_default();
                let _ = writeln!(
                    out,
                    "  rule{tag}: {} ==> {}",
                    render_side(&rule.premises),
                    render_side(&rule.conclusions)
                );
            }
        }
        out
    }

    /// Initial working memory for a text: its quantized form followed by every theory fact.
    ///
    /// A text that is itself a bound text symbol (`#S2`) uses that binding; otherwise the
    /// rule base's own `#S` binding is used when present; otherwise the text's words are
    /// matched against declared intuition symbols.
    pub fn quantize(&self, text: &str) -> Result<Vec<Term>, QuantizeError> {
        let trimmed = text.trim();
        let bound = self
            .bindings
            .iter()
            .find(|(s, _)| s.as_str() == trimmed)
            .or_else(|| {
                self.bindings
                    .iter()
                    .find(|(s, _)| s.as_str() == DEFAULT_TEXT_SYMBOL)
            });
        let mut seeds: Vec<Term> = match bound {
            Some((sym, _)) => {
                vec![self
                    .expand(&Term::Atom(sym.clone()))
                    .expect("bindings validated acyclic")]
            }
            None => {
                let known: BTreeSet<&str> = self
                    .theories
                    .iter()
                    .flat_map(|t| &t.intuitions)
                    .map(Symbol::as_str)
                    .collect();
                let mut found = Vec::new();
                for word in text.split(|c: char| {
                    !(c.is_alphanumeric() || c == '-' || c == '_' || c == '↑')
                }) {
                    if known.contains(word) {
                        let t = Term::atom(word);
                        if !found.contains(&t) {
                            found.push(t);
                        }
                    }
                }
                found
            }
        };
        if seeds.is_empty() {
            return Err(QuantizeError::NoMatch(text.to_string()));
        }
        for fact in self.theories.iter().flat_map(|t| &t.facts) {
            let f = self.expand(fact).expect("bindings validated acyclic");
            if !seeds.contains(&f) {
                seeds.push(f);
            }
        }
        Ok(seeds)
    }

    pub fn stats(&self) -> LogicStats {
        let mut operators: BTreeSet<Symbol> = BTreeSet::new();
        let mut content: BTreeSet<Symbol> = BTreeSet::new();
        for t in &self.theories {
            operators.extend(t.operators.iter().cloned());
        }
        let mut mentions: Vec<BTreeSet<Symbol>> = Vec::new();
        for t in &self.theories {
            let mut mentioned = BTreeSet::new();
            let terms = t
                .facts
                .iter()
                .map(|f| self.expand(f).expect("bindings validated acyclic"))
                .chain(
                    t.rules
                        .iter()
                        .flat_map(|r| r.premises.iter().chain(&r.conclusions).cloned()),
                );
            for term in terms {
                term.content_symbols(&mut mentioned);
                term.infix_symbols(&mut operators);
            }
            content.extend(mentioned.iter().cloned());
            mentions.push(mentioned);
        }
        for term in self.bindings.values() {
            term.content_symbols(&mut content);
            term.infix_symbols(&mut operators);
        }
        let model_element_count = content
            .iter()
            .filter(|s| !s.is_text_symbol() && !operators.contains(*s))
            .count();

        let mut dependency_count = 0;
        for (i, mentioned) in mentions.iter().enumerate() {
            for (j, other) in self.theories.iter().enumerate() {
                if i != j && other.intuitions.iter().any(|s| mentioned.contains(s)) {
                    dependency_count += 1;
                }
            }
        }

        LogicStats {
            theory_count: self.theories.len(),
            dependency_count,
            model_element_count,
            operator_count: operators.len(),
            rule_count: self.theories.iter().map(|t| t.rules.len()).sum(),
        }
    }
}

/// Counts matching the header block a rule base reports about itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct LogicStats {
    pub theory_count: usize,
    pub dependency_count: usize,
    pub model_element_count: usize,
    pub operator_count: usize,
    pub rule_count: usize,
}

fn join(symbols: &[Symbol]) -> String {
    symbols
        .iter()
        .map(Symbol::as_str)
        .collect::<Vec<_>>()
        .join(", ")
}

fn render_side(terms: &[Term]) -> String {
    let wrap = terms.len() > 1;
    terms
        .iter()
        .map(|t| match t {
            Term::Infix { .. } if wrap || t.is_and() => format!("({t})"),
            _ => t.to_string(),
        })
        .collect::<Vec<_>>()
        .join(" And ")
}
