use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// An intuition, operator, or text symbol. Compared by exact string equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        debug_assert!(!name.is_empty() && !name.chars().any(char::is_whitespace));
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Text symbols (`#S`) stand for quantized sentences and are expanded through bindings.
    pub fn is_text_symbol(&self) -> bool {
        self.0.starts_with('#')
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

/// A meta-variable, stored without its `$` sigil.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Arc::from(name.trim_start_matches('$')))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "${}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Head {
    Symbol(Symbol),
    Var(Var),
}

impl fmt::Display for Head {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Head::Symbol(s) => s.fmt(f),
            Head::Var(v) => v.fmt(f),
        }
    }
}

/// Symbolic structure over intuitions. Ground terms live in working memory;
/// terms with variables are rule patterns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Atom(Symbol),
    Compound { head: Head, args: Vec<Term> },
    Infix { op: Symbol, left: Box<Term>, right: Box<Term> },
    Var(Var),
}

pub type Substitution = BTreeMap<Var, Term>;

impl Term {
    pub fn atom(name: &str) -> Term {
        Term::Atom(Symbol::new(name))
    }

    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn compound(head: &str, args: Vec<Term>) -> Term {
        let head = if let Some(v) = head.strip_prefix('$') {
            Head::Var(Var::new(v))
        } else {
            Head::Symbol(Symbol::new(head))
        };
        Term::Compound { head, args }
    }

    pub fn infix(op: &str, left: Term, right: Term) -> Term {
        Term::Infix {
            op: Symbol::new(op),
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Atom(_) => true,
            Term::Var(_) => false,
            Term::Compound { head, args } => {
                matches!(head, Head::Symbol(_)) && args.iter().all(Term::is_ground)
            }
            Term::Infix { left, right, .. } => left.is_ground() && right.is_ground(),
        }
    }

    /// Atoms and variables have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Term::Atom(_) | Term::Var(_) => 1,
            Term::Compound { args, .. } => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            Term::Infix { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Preorder walk over the term and its argument/operand subterms.
    /// Heads and infix operators are symbols, not subterms.
    pub fn subterms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            out.push(t);
            match t {
                Term::Compound { args, .. } => stack.extend(args.iter().rev()),
                Term::Infix { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
                Term::Atom(_) | Term::Var(_) => {}
            }
        }
        out
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Atom(_) => {}
            Term::Compound { head, args } => {
                if let Head::Var(v) = head {
                    out.insert(v.clone());
                }
                for a in args {
                    a.collect_vars(out);
                }
            }
            Term::Infix { left, right, .. } => {
                left.collect_vars(out);
                right.collect_vars(out);
            }
        }
    }

    /// Atom and head symbols (the "content" symbols), excluding infix operators.
    pub fn content_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Term::Atom(s) => {
                out.insert(s.clone());
            }
            Term::Var(_) => {}
            Term::Compound { head, args } => {
                if let Head::Symbol(s) = head {
                    out.insert(s.clone());
                }
                for a in args {
                    a.content_symbols(out);
                }
            }
            Term::Infix { left, right, .. } => {
                left.content_symbols(out);
                right.content_symbols(out);
            }
        }
    }

    pub fn infix_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Term::Atom(_) | Term::Var(_) => {}
            Term::Compound { args, .. } => {
                for a in args {
                    a.infix_symbols(out);
                }
            }
            Term::Infix { op, left, right } => {
                out.insert(op.clone());
                left.infix_symbols(out);
                right.infix_symbols(out);
            }
        }
    }

    /// All symbols: content symbols plus infix operators.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.content_symbols(&mut out);
        self.infix_symbols(&mut out);
        out
    }

    pub fn is_and(&self) -> bool {
        matches!(self, Term::Infix { op, .. } if op.as_str() == AND)
    }

    /// One-way matching of `self` (a pattern) against a ground `target`,
    /// extending `sub`. On failure `sub` may hold partial bindings; callers clone first.
    pub fn match_into(&self, target: &Term, sub: &mut Substitution) -> bool {
        match (self, target) {
            (Term::Var(v), _) => match sub.get(v) {
                Some(bound) => bound == target,
                None => {
                    sub.insert(v.clone(), target.clone());
                    true
                }
            },
            (Term::Atom(a), Term::Atom(b)) => a == b,
            (
                Term::Compound { head: ph, args: pa },
                Term::Compound { head: Head::Symbol(th), args: ta },
            ) => {
                if pa.len() != ta.len() {
                    return false;
                }
                let head_ok = match ph {
                    Head::Symbol(s) => s == th,
                    Head::Var(v) => match sub.get(v) {
                        Some(Term::Atom(s)) => s == th,
                        Some(_) => false,
                        None => {
                            sub.insert(v.clone(), Term::Atom(th.clone()));
                            true
                        }
                    },
                };
                head_ok && pa.iter().zip(ta).all(|(p, t)| p.match_into(t, sub))
            }
            (
                Term::Infix { op: po, left: pl, right: pr },
                Term::Infix { op: to, left: tl, right: tr },
            ) => po == to && pl.match_into(tl, sub) && pr.match_into(tr, sub),
            _ => false,
        }
    }

    /// Replace variables by their bindings.
    pub fn instantiate(&self, sub: &Substitution) -> Result<Term, InstantiateError> {
        Ok(match self {
            Term::Atom(_) => self.clone(),
            Term::Var(v) => sub
                .get(v)
                .cloned()
                .ok_or_else(|| InstantiateError::Unbound(v.clone()))?,
            Term::Compound { head, args } => {
                let head = match head {
                    Head::Symbol(_) => head.clone(),
                    Head::Var(v) => match sub.get(v) {
                        Some(Term::Atom(s)) => Head::Symbol(s.clone()),
                        Some(other) => {
                            return Err(InstantiateError::NonAtomHead(v.clone(), other.clone()))
                        }
                        None => return Err(InstantiateError::Unbound(v.clone())),
                    },
                };
                let args = args
                    .iter()
                    .map(|a| a.instantiate(sub))
                    .collect::<Result<_, _>>()?;
                Term::Compound { head, args }
            }
            Term::Infix { op, left, right } => Term::Infix {
                op: op.clone(),
                left: Box::new(left.instantiate(sub)?),
                right: Box::new(right.instantiate(sub)?),
            },
        })
    }

    /// Substitute text-symbol atoms with their bound terms, recursively.
    pub(crate) fn expand_bindings(
        &self,
        bindings: &BTreeMap<Symbol, Term>,
        stack: &mut Vec<Symbol>,
    ) -> Result<Term, Symbol> {
        Ok(match self {
            Term::Atom(s) if s.is_text_symbol() => match bindings.get(s) {
                Some(bound) => {
                    if stack.contains(s) {
                        return Err(s.clone());
                    }
                    stack.push(s.clone());
                    let expanded = bound.expand_bindings(bindings, stack)?;
                    stack.pop();
                    expanded
                }
                None => self.clone(),
            },
            Term::Atom(_) | Term::Var(_) => self.clone(),
            Term::Compound { head, args } => Term::Compound {
                head: head.clone(),
                args: args
                    .iter()
                    .map(|a| a.expand_bindings(bindings, stack))
                    .collect::<Result<_, _>>()?,
            },
            Term::Infix { op, left, right } => Term::Infix {
                op: op.clone(),
                left: Box::new(left.expand_bindings(bindings, stack)?),
                right: Box::new(right.expand_bindings(bindings, stack)?),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstantiateError {
    #[error("variable {0} is unbound")]
    Unbound(Var),
    #[error("head variable {0} is bound to non-atom `{1}`")]
    NonAtomHead(Var, Term),
}

pub const AND: &str = "And";
pub const QUERY: &str = "?";

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Atom(s) => s.fmt(f),
            Term::Var(v) => v.fmt(f),
            Term::Compound { head, args } => {
                write!(f, "{head}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    a.fmt(f)?;
                }
                f.write_str(")")
            }
            Term::Infix { op, left, right } => {
                write_operand(f, left)?;
                write!(f, " {op} ")?;
                write_operand(f, right)
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    if matches!(t, Term::Infix { .. }) {
        write!(f, "({t})")
    } else {
        fmt::Display::fmt(t, f)
    }
}
