//! Line-oriented reader for the rule-file format plus a recursive-descent
//! parser for the term grammar. See `docs/grammar.md` at the repository root.

use std::collections::{BTreeMap, BTreeSet};

use super::term::{Head, Symbol, Term, Var, AND, QUERY};
use super::{LogicError, Rule, SemanticLogic, Theory, BUILTIN_INFIX};

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Reject symbols that no theory declares as an intuition or operator.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Var(String),
    LParen,
    RParen,
    Comma,
    Pipe,
    Arrow,
    Eq,
    Query,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '↑'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '↑' || c == '-'
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let body = s.strip_prefix('#').unwrap_or(s);
    let mut chars = body.chars();
    matches!(chars.next(), Some(c) if is_ident_start(c)) && chars.all(is_ident_continue)
}

/// Cut a `#` comment. `#` begins a comment unless it leads a text symbol like `#S`.
fn strip_comment(line: &str) -> &str {
    let mut iter = line.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if c == '#' {
            let starts_symbol = matches!(iter.peek(), Some(&(_, n)) if is_ident_start(n));
            let prev_is_ident = line[..i].chars().next_back().is_some_and(is_ident_continue);
            if !starts_symbol || prev_is_ident {
                return &line[..i];
            }
        }
    }
    line
}

fn lex(src: &str, line: usize, col0: usize) -> Result<Vec<Spanned>, LogicError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        let simple = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '|' => Some(Tok::Pipe),
            '?' => Some(Tok::Query),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Spanned { tok, col });
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        if rest.starts_with("==>") {
            out.push(Spanned { tok: Tok::Arrow, col });
            i += 3;
        } else if rest.starts_with("=>") || rest.starts_with("<>") {
            out.push(Spanned { tok: Tok::Word(rest[..2].to_string()), col });
            i += 2;
        } else if c == '=' {
            out.push(Spanned { tok: Tok::Eq, col });
            i += 1;
        } else if c == '$' || c == '#' || is_ident_start(c) {
            let start = i;
            i += 1;
            if c != '$' && c != '#' || chars.get(i).is_some_and(|&n| is_ident_start(n)) {
                while i < chars.len() && is_ident_continue(chars[i]) {
                    i += 1;
                }
            }
            let word: String = chars[start..i].iter().collect();
            if c == '$' {
                if word.len() == 1 {
                    return Err(syntax(line, col, "expected variable name after `$`"));
                }
                out.push(Spanned { tok: Tok::Var(word[1..].to_string()), col });
            } else {
                if word == "#" {
                    return Err(syntax(line, col, "expected text symbol name after `#`"));
                }
                out.push(Spanned { tok: Tok::Word(word), col });
            }
        } else {
            return Err(syntax(line, col, &format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

fn syntax(line: usize, column: usize, message: &str) -> LogicError {
    LogicError::Syntax {
        line,
        column,
        message: message.to_string(),
    }
}

/// Shape of a side of a rule after splitting top-level `|` and `And`.
type Alternatives = Vec<Vec<Term>>;

struct TermParser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    line: usize,
    end_col: usize,
    infix: &'a BTreeSet<String>,
}

/// Operands, and each operator with its column.
type Chain = (Vec<Term>, Vec<(String, usize)>);

impl<'a> TermParser<'a> {
    fn new(src: &str, line: usize, col0: usize, infix: &'a BTreeSet<String>) -> Result<Self, LogicError> {
        let toks = lex(src, line, col0)?;
        Ok(TermParser {
            toks,
            pos: 0,
            line,
            end_col: col0 + src.chars().count(),
            infix,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |s| s.col)
    }

    fn err(&self, msg: &str) -> LogicError {
        syntax(self.line, self.col(), msg)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), LogicError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected {what}")))
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn infix_op(&self) -> Option<String> {
        match self.peek() {
            Some(Tok::Word(w)) if self.infix.contains(w) => Some(w.clone()),
            _ => None,
        }
    }

    /// operand (op operand)*, returning the pieces without combining them.
    fn chain(&mut self) -> Result<Chain, LogicError> {
        let mut operands = vec![self.operand()?];
        let mut ops = Vec::new();
        while let Some(op) = self.infix_op() {
            ops.push((op, self.col()));
            self.pos += 1;
            operands.push(self.operand()?);
        }
        Ok((operands, ops))
    }

    fn check_chain(&self, ops: &[(String, usize)]) -> Result<(), LogicError> {
        if ops.len() > 1 && ops.iter().any(|(o, _)| o != AND) {
            let col = ops[1].1;
            return Err(syntax(
                self.line,
                col,
                "infix operators have no precedence; add parentheses",
            ));
        }
        Ok(())
    }

    /// A full term: `And` chains fold left, other operators must be parenthesized when mixed.
    fn expr(&mut self) -> Result<Term, LogicError> {
        let (operands, ops) = self.chain()?;
        self.check_chain(&ops)?;
        let mut iter = operands.into_iter();
        let mut acc = iter.next().expect("chain yields one operand");
        for ((op, _), right) in ops.into_iter().zip(iter) {
            acc = Term::Infix {
                op: Symbol::new(&op),
                left: Box::new(acc),
                right: Box::new(right),
            };
        }
        Ok(acc)
    }

    /// Rule side: top-level `And` separates conjuncts instead of building a term.
    fn conjuncts(&mut self) -> Result<Vec<Term>, LogicError> {
        let (mut operands, ops) = self.chain()?;
        self.check_chain(&ops)?;
        match ops.first() {
            Some((op, _)) if op != AND => {
                let right = operands.pop().expect("two operands");
                let left = operands.pop().expect("two operands");
                Ok(vec![Term::Infix {
                    op: Symbol::new(op),
                    left: Box::new(left),
                    right: Box::new(right),
                }])
            }
            _ => Ok(operands),
        }
    }

    fn alternatives(&mut self) -> Result<Alternatives, LogicError> {
        let mut alts = vec![self.conjuncts()?];
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            alts.push(self.conjuncts()?);
        }
        Ok(alts)
    }

    fn args(&mut self) -> Result<Vec<Term>, LogicError> {
        self.expect(Tok::LParen, "`(`")?;
        if self.peek() == Some(&Tok::RParen) {
            return Err(self.err("empty argument list"));
        }
        let mut args = vec![self.expr()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            args.push(self.expr()?);
        }
        self.expect(Tok::RParen, "`,` or `)`")?;
        Ok(args)
    }

    fn operand(&mut self) -> Result<Term, LogicError> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Some(Tok::Query) => {
                self.pos += 1;
                let args = if self.peek() == Some(&Tok::LParen) {
                    self.args()?
                } else {
                    vec![self.operand()?]
                };
                Ok(Term::Compound {
                    head: Head::Symbol(Symbol::new(QUERY)),
                    args,
                })
            }
            Some(Tok::Var(name)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::LParen) {
                    let args = self.args()?;
                    Ok(Term::Compound {
                        head: Head::Var(Var::new(&name)),
                        args,
                    })
                } else {
                    Ok(Term::Var(Var::new(&name)))
                }
            }
            Some(Tok::Word(w)) => {
                if self.infix.contains(&w) {
                    return Err(self.err(&format!("operator `{w}` used where a term was expected")));
                }
                self.pos += 1;
                if self.peek() == Some(&Tok::LParen) {
                    let args = self.args()?;
                    Ok(Term::Compound {
                        head: Head::Symbol(Symbol::new(&w)),
                        args,
                    })
                } else {
                    Ok(Term::Atom(Symbol::new(&w)))
                }
            }
            Some(_) => Err(self.err("expected a term")),
            None => Err(self.err("unexpected end of line, expected a term")),
        }
    }

    fn finish(&self) -> Result<(), LogicError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }
}

/// Parse a single term using the given set of infix operator names.
pub(crate) fn parse_term_with(src: &str, infix: &BTreeSet<String>) -> Result<Term, LogicError> {
    let mut p = TermParser::new(src, 1, 1, infix)?;
    let t = p.expr()?;
    p.finish()?;
    Ok(t)
}

fn char_col(raw: &str, byte_offset: usize) -> usize {
    raw[..byte_offset].chars().count() + 1
}

struct Pending {
    line: usize,
    theory: String,
    term: Term,
}

fn parse_list(rest: &str, line: usize, col: usize, allow_query: bool) -> Result<Vec<Symbol>, LogicError> {
    let mut out = Vec::new();
    for item in rest.split(',') {
        let name = item.trim();
        if name.is_empty() {
            continue;
        }
        if !(is_identifier(name) || (allow_query && name == QUERY) || name == "=>" || name == "<>") {
            return Err(syntax(line, col, &format!("`{name}` is not a valid symbol")));
        }
        out.push(Symbol::new(name));
    }
    Ok(out)
}

/// `keyword:` (or `keyword[` for rules) at the start of a line.
fn keyword<'s>(line: &'s str, kw: &str) -> Option<&'s str> {
    let rest = line.strip_prefix(kw)?;
    let trimmed = rest.trim_start();
    if trimmed.starts_with(':') || (kw == "rule" && trimmed.starts_with('[')) {
        Some(trimmed)
    } else {
        None
    }
}

pub fn parse_logic_with(src: &str, opts: ParseOptions) -> Result<SemanticLogic, LogicError> {
    let lines: Vec<&str> = src.lines().collect();

    // Infix declarations apply to the whole file, so collect them first.
    let mut declared_infix: Vec<Symbol> = Vec::new();
    for (i, raw) in lines.iter().enumerate() {
        let content = strip_comment(raw);
        let trimmed = content.trim();
        if let Some(rest) = keyword(trimmed, "infix") {
            let col = char_col(raw, raw.find(rest).unwrap_or(0));
            for s in parse_list(&rest[1..], i + 1, col, false)? {
                if !declared_infix.contains(&s) && !BUILTIN_INFIX.contains(&s.as_str()) {
                    declared_infix.push(s);
                }
            }
        }
    }
    let mut infix: BTreeSet<String> = BUILTIN_INFIX.iter().map(|s| s.to_string()).collect();
    infix.extend(declared_infix.iter().map(|s| s.as_str().to_string()));

    let mut theories: Vec<Theory> = Vec::new();
    let mut bindings: BTreeMap<Symbol, Term> = BTreeMap::new();
    let mut binding_lines: BTreeMap<Symbol, usize> = BTreeMap::new();
    let mut pending: Vec<Pending> = Vec::new();
    let mut next_rule_id = 1u32;

    for (i, raw) in lines.iter().enumerate() {
        let lineno = i + 1;
        let content = strip_comment(raw);
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let col_of = |s: &str| -> usize {
            let byte = s.as_ptr() as usize - raw.as_ptr() as usize;
            char_col(raw, byte)
        };

        if let Some(rest) = trimmed.strip_prefix("theory") {
            if rest.starts_with(char::is_whitespace) {
                let name = rest.trim().trim_end_matches(':').trim();
                if !is_identifier(name) || name.starts_with('#') {
                    return Err(syntax(lineno, col_of(rest), "expected a theory name"));
                }
                if theories.iter().any(|t| t.name == name) {
                    return Err(LogicError::Invalid {
                        line: lineno,
                        message: format!("duplicate theory `{name}`"),
                    });
                }
                theories.push(Theory::new(name));
                continue;
            }
        }
        if keyword(trimmed, "infix").is_some() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("define") {
            if rest.starts_with(char::is_whitespace) {
                let body = rest.trim_start();
                let eq = body
                    .find('=')
                    .ok_or_else(|| syntax(lineno, col_of(body), "expected `#Symbol = term`"))?;
                let name = body[..eq].trim();
                if !name.starts_with('#') || !is_identifier(name) {
                    return Err(syntax(lineno, col_of(body), "expected a text symbol like `#S`"));
                }
                let term_src = &body[eq + 1..];
                let mut p = TermParser::new(term_src, lineno, col_of(term_src), &infix)?;
                let term = p.expr()?;
                p.finish()?;
                if !term.is_ground() {
                    return Err(LogicError::Invalid {
                        line: lineno,
                        message: format!("binding for {name} must be ground"),
                    });
                }
                let sym = Symbol::new(name);
                if bindings.insert(sym.clone(), term).is_some() {
                    return Err(LogicError::Invalid {
                        line: lineno,
                        message: format!("duplicate binding for {name}"),
                    });
                }
                binding_lines.insert(sym, lineno);
                continue;
            }
        }

        let Some(theory) = theories.last_mut() else {
            return Err(LogicError::Invalid {
                line: lineno,
                message: "declaration outside of a theory".to_string(),
            });
        };

        if let Some(rest) = keyword(trimmed, "intuitions") {
            for s in parse_list(&rest[1..], lineno, col_of(rest), false)? {
                if !theory.intuitions.contains(&s) {
                    theory.intuitions.push(s);
                }
            }
            continue;
        }
        if let Some(rest) = keyword(trimmed, "operators") {
            for s in parse_list(&rest[1..], lineno, col_of(rest), true)? {
                if !theory.operators.contains(&s) {
                    theory.operators.push(s);
                }
            }
            continue;
        }

        let (kind, body, tag) = if let Some(rest) = keyword(trimmed, "fact") {
            (Some(false), &rest[1..], None)
        } else if let Some(rest) = keyword(trimmed, "rule") {
            let (tag, after) = if let Some(inner) = rest.strip_prefix('[') {
                let close = inner
                    .find(']')
                    .ok_or_else(|| syntax(lineno, col_of(inner), "unterminated rule tag"))?;
                let tag = inner[..close].trim();
                if !is_identifier(tag) {
                    return Err(syntax(lineno, col_of(inner), "rule tag must be an identifier"));
                }
                (Some(tag.to_string()), inner[close + 1..].trim_start())
            } else {
                (None, rest)
            };
            let after = after
                .strip_prefix(':')
                .ok_or_else(|| syntax(lineno, col_of(after), "expected `:` after rule"))?;
            (Some(true), after, tag)
        } else {
            (None, trimmed, None)
        };

        let body_col = col_of(body);
        let toks = lex(body, lineno, body_col)?;
        let arrow = toks.iter().position(|t| t.tok == Tok::Arrow);
        let is_rule = match kind {
            Some(r) => r,
            None => arrow.is_some(),
        };

        if !is_rule {
            if let Some(a) = arrow {
                return Err(syntax(lineno, toks[a].col, "facts cannot contain `==>`"));
            }
            let mut p = TermParser::new(body, lineno, body_col, &infix)?;
            let term = p.expr()?;
            p.finish()?;
            if !term.is_ground() {
                return Err(LogicError::Invalid {
                    line: lineno,
                    message: format!("fact `{term}` contains variables"),
                });
            }
            pending.push(Pending {
                line: lineno,
                theory: theory.name.clone(),
                term: term.clone(),
            });
            theory.facts.push(term);
            continue;
        }

        let Some(a) = arrow else {
            return Err(syntax(lineno, body_col, "rule is missing `==>`"));
        };
        let mut lhs = TermParser {
            toks: toks[..a].to_vec(),
            pos: 0,
            line: lineno,
            end_col: toks[a].col,
            infix: &infix,
        };
        if lhs.at_end() {
            return Err(syntax(lineno, toks[a].col, "rule has no premises"));
        }
        let premises = lhs.conjuncts()?;
        if lhs.peek() == Some(&Tok::Pipe) {
            return Err(lhs.err("alternatives are only allowed on the conclusion side"));
        }
        lhs.finish()?;
        let mut rhs = TermParser {
            toks: toks[a + 1..].to_vec(),
            pos: 0,
            line: lineno,
            end_col: body_col + body.chars().count(),
            infix: &infix,
        };
        if rhs.at_end() {
            return Err(syntax(lineno, rhs.end_col, "rule has an empty conclusion"));
        }
        let alternatives = rhs.alternatives()?;
        rhs.finish()?;

        let premise_vars: BTreeSet<Var> = premises.iter().flat_map(Term::variables).collect();
        for conclusions in alternatives {
            for c in &conclusions {
                if let Some(v) = c.variables().difference(&premise_vars).next() {
                    return Err(LogicError::Invalid {
                        line: lineno,
                        message: format!("conclusion variable {v} does not occur in the premises"),
                    });
                }
            }
            for t in premises.iter().chain(&conclusions) {
                pending.push(Pending {
                    line: lineno,
                    theory: theory.name.clone(),
                    term: t.clone(),
                });
            }
            theory.rules.push(Rule {
                id: next_rule_id,
                theory: theory.name.clone(),
                premises: premises.clone(),
                conclusions,
                tag: tag.clone(),
            });
            next_rule_id += 1;
        }
    }

    for (sym, term) in &bindings {
        let mut stack = vec![sym.clone()];
        if let Err(cyc) = term.expand_bindings(&bindings, &mut stack) {
            return Err(LogicError::CyclicBinding {
                symbol: cyc.as_str().to_string(),
            });
        }
    }

    if opts.strict {
        let mut declared: BTreeSet<&Symbol> = BTreeSet::new();
        for t in &theories {
            declared.extend(t.intuitions.iter());
            declared.extend(t.operators.iter());
        }
        for p in &pending {
            let mut syms = BTreeSet::new();
            p.term.content_symbols(&mut syms);
            for s in syms {
                let ok = if s.is_text_symbol() {
                    bindings.contains_key(&s)
                } else {
                    declared.contains(&s)
                };
                if !ok {
                    return Err(LogicError::UndeclaredSymbol {
                        line: p.line,
                        symbol: s.as_str().to_string(),
                        theory: p.theory.clone(),
                    });
                }
            }
        }
        for (sym, term) in &bindings {
            let mut syms = BTreeSet::new();
            term.content_symbols(&mut syms);
            if let Some(s) = syms
                .into_iter()
                .find(|s| !s.is_text_symbol() && !declared.contains(s))
            {
                return Err(LogicError::UndeclaredSymbol {
                    line: binding_lines[sym],
                    symbol: s.as_str().to_string(),
                    theory: String::new(),
                });
            }
        }
    }

    Ok(SemanticLogic {
        theories,
        bindings,
        infix: declared_infix,
    })
}
