use std::collections::BTreeSet;

use serde_json::{json, Value};

use crate::logic::{LogicError, RuleId, SemanticLogic, Term};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeNode {
    pub id: NodeId,
    pub level: usize,
    /// `None` for axioms (initial working-memory terms).
    pub rule: Option<RuleId>,
    pub terms: Vec<Term>,
    pub premises: Vec<NodeId>,
}

/// The leveled derivation DAG. Premises always point at lower node ids,
/// so node order is a topological order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Lattice {
    pub text: String,
    pub logic_id: String,
    pub nodes: Vec<LatticeNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error("malformed lattice JSON: {0}")]
    Json(String),
    #[error("node {node}: {message}")]
    Structure { node: NodeId, message: String },
    #[error("node {node}: {source}")]
    Term {
        node: NodeId,
        #[source]
        source: LogicError,
    },
}

impl Lattice {
    /// Every produced term, in node order.
    pub fn terms(&self) -> Vec<&Term> {
        self.nodes.iter().flat_map(|n| &n.terms).collect()
    }

    /// Terms of the level-1 nodes.
    pub fn initial_terms(&self) -> impl Iterator<Item = &Term> {
        self.nodes.iter().filter(|n| n.level == 1).flat_map(|n| &n.terms)
    }

    pub fn successors(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for n in &self.nodes {
            for &p in &n.premises {
                out[p].push(n.id);
            }
        }
        out
    }

    /// Nodes that no other node uses as a premise.
    pub fn sinks(&self) -> Vec<NodeId> {
        self.successors()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_empty())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn max_level(&self) -> usize {
        self.nodes.iter().map(|n| n.level).max().unwrap_or(0)
    }

    /// Check ids, premise references, the level law, and term uniqueness.
    pub fn validate(&self) -> Result<(), LatticeError> {
        let mut seen = BTreeSet::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let bad = |message: String| LatticeError::Structure { node: n.id, message };
            if n.id != i {
                return Err(bad(format!("id out of sequence (expected {i})")));
            }
            if n.terms.is_empty() {
                return Err(bad("produces no terms".into()));
            }
            if let Some(p) = n.premises.iter().find(|&&p| p >= i) {
                return Err(bad(format!("premise {p} does not precede the node")));
            }
            let expected = n
                .premises
                .iter()
                .map(|&p| self.nodes[p].level)
                .max()
                .map_or(1, |m| m + 1);
            if n.level != expected {
                return Err(bad(format!("level {} but premises imply {expected}", n.level)));
            }
            if n.premises.is_empty() != n.rule.is_none() {
                return Err(bad("axioms have no rule and no premises".into()));
            }
            for t in &n.terms {
                if !t.is_ground() {
                    return Err(bad(format!("term `{t}` is not ground")));
                }
                if !seen.insert(t) {
                    return Err(bad(format!("term `{t}` is produced twice")));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let nodes: Vec<Value> = self
            .nodes
            .iter()
            .map(|n| {
                json!({
                    "id": n.id,
                    "level": n.level,
                    "rule": n.rule.map_or(json!("axiom"), |r| json!(r)),
                    "terms": n.terms.iter().map(Term::to_string).collect::<Vec<_>>(),
                    "premises": n.premises,
                })
            })
            .collect();
        json!({
            "text": self.text,
            "logic_id": self.logic_id,
            "nodes": nodes,
        })
    }

    /// Read a lattice written by [`Lattice::to_json`]. Terms are parsed with
    /// the operator vocabulary of `logic`.
    pub fn from_json(value: &Value, logic: &SemanticLogic) -> Result<Lattice, LatticeError> {
        let field = |v: &Value, key: &str| -> Result<Value, LatticeError> {
            v.get(key)
                .cloned()
                .ok_or_else(|| LatticeError::Json(format!("missing `{key}`")))
        };
        let text = field(value, "text")?
            .as_str()
            .ok_or_else(|| LatticeError::Json("`text` must be a string".into()))?
            .to_string();
        let logic_id = field(value, "logic_id")?
            .as_str()
            .ok_or_else(|| LatticeError::Json("`logic_id` must be a string".into()))?
            .to_string();
        let raw_nodes = field(value, "nodes")?;
        let raw_nodes = raw_nodes
            .as_array()
            .ok_or_else(|| LatticeError::Json("`nodes` must be an array".into()))?;
        let mut nodes = Vec::with_capacity(raw_nodes.len());
        for raw in raw_nodes {
            let uint = |key: &str| -> Result<u64, LatticeError> {
                field(raw, key)?
                    .as_u64()
                    .ok_or_else(|| LatticeError::Json(format!("`{key}` must be a non-negative integer")))
            };
            let id = uint("id")? as NodeId;
            let level = uint("level")? as usize;
            let rule = match field(raw, "rule")? {
                Value::String(s) if s == "axiom" => None,
                Value::Number(n) => Some(
                    n.as_u64()
                        .and_then(|r| RuleId::try_from(r).ok())
                        .ok_or_else(|| LatticeError::Json("bad rule id".into()))?,
                ),
                _ => return Err(LatticeError::Json("`rule` must be an id or \"axiom\"".into())),
            };
            let terms = field(raw, "terms")?
                .as_array()
                .ok_or_else(|| LatticeError::Json("`terms` must be an array".into()))?
                .iter()
                .map(|t| {
                    let s = t
                        .as_str()
                        .ok_or_else(|| LatticeError::Json("terms must be strings".into()))?;
                    logic
                        .parse_term(s)
                        .map_err(|source| LatticeError::Term { node: id, source })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let premises = field(raw, "premises")?
                .as_array()
                .ok_or_else(|| LatticeError::Json("`premises` must be an array".into()))?
                .iter()
                .map(|p| {
                    p.as_u64()
                        .map(|p| p as NodeId)
                        .ok_or_else(|| LatticeError::Json("premises must be node ids".into()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            nodes.push(LatticeNode {
                id,
                level,
                rule,
                terms,
                premises,
            });
        }
        let lattice = Lattice {
            text,
            logic_id,
            nodes,
        };
        lattice.validate()?;
        Ok(lattice)
    }
}
