//! Node values, semantic points, and the scalar complexities built on them.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::derive::{Lattice, NodeId};
use crate::logic::{SemanticLogic, Term};
use crate::report::number;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schema {
    /// Axioms are 1, every other node is 1 + the product of its premise values.
    #[default]
    Product,
    /// As `Product`, with the product scaled by the weight of the firing rule's tag.
    Tagged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueConfig {
    pub schema: Schema,
    /// Weights for rule tags; untagged rules and unlisted tags weigh 1.
    pub tag_weights: BTreeMap<String, f64>,
    pub log_base: f64,
}

impl Default for ValueConfig {
    fn default() -> Self {
        ValueConfig {
            schema: Schema::Product,
            tag_weights: BTreeMap::new(),
            log_base: 2.0,
        }
    }
}

impl ValueConfig {
    pub fn validate(&self) -> Result<(), ComplexityError> {
        if !(self.log_base > 0.0 && self.log_base != 1.0 && self.log_base.is_finite()) {
            return Err(ComplexityError::BadConfig(format!(
                "log base must be positive and not 1, got {}",
                self.log_base
            )));
        }
        if let Some((tag, w)) = self
            .tag_weights
            .iter()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(ComplexityError::BadConfig(format!(
                "weight for tag `{tag}` must be positive, got {w}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ComplexityError {
    #[error("lattice was derived under logic {found}, not {expected}")]
    LogicMismatch { expected: String, found: String },
    #[error("relative complexity needs at least one positive value")]
    AllZero,
    #[error("complexity values must be finite and non-negative")]
    Negative,
    #[error("{0}")]
    BadConfig(String),
}

/// One value per lattice node, indexed by node id.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeValues(pub Vec<f64>);

impl NodeValues {
    pub fn get(&self, id: NodeId) -> f64 {
        self.0[id]
    }

    pub fn max(&self) -> Option<f64> {
        self.0.iter().copied().reduce(f64::max)
    }
}

pub fn node_complexity(lattice: &Lattice, logic: &SemanticLogic, config: &ValueConfig) -> NodeValues {
    let mut values = Vec::with_capacity(lattice.nodes.len());
    for node in &lattice.nodes {
        let v = if node.premises.is_empty() {
            1.0
        } else {
            let product: f64 = node.premises.iter().map(|&p| values[p]).product();
            let weight = match config.schema {
                Schema::Product => 1.0,
                Schema::Tagged => node
                    .rule
                    .and_then(|id| logic.rule(id))
                    .and_then(|r| r.tag.as_ref())
                    .and_then(|t| config.tag_weights.get(t))
                    .copied()
                    .unwrap_or(1.0),
            };
            1.0 + weight * product
        };
        values.push(v);
    }
    NodeValues(values)
}

/// `v ↦ log_base(v + 1)`.
pub fn log_normalize(values: &NodeValues, config: &ValueConfig) -> Vec<f64> {
    values.0.iter().map(|v| (v + 1.0).log(config.log_base)).collect()
}

/// Number of theories involved in the derivation: a theory counts when one of
/// its rules fired or one of its facts or intuitions appears among the initial terms.
pub fn dastex(lattice: &Lattice, logic: &SemanticLogic) -> Result<usize, ComplexityError> {
    let expected = logic.id();
    if lattice.logic_id != expected {
        return Err(ComplexityError::LogicMismatch {
            expected,
            found: lattice.logic_id.clone(),
        });
    }
    let initial: Vec<&Term> = lattice.initial_terms().collect();
    let mut initial_symbols = std::collections::BTreeSet::new();
    for t in &initial {
        initial_symbols.extend(t.symbols());
    }
    let fired: std::collections::BTreeSet<_> = lattice.nodes.iter().filter_map(|n| n.rule).collect();
    let involved = logic
        .theories
        .iter()
        .filter(|th| {
            th.rules.iter().any(|r| fired.contains(&r.id))
                || th.intuitions.iter().any(|s| initial_symbols.contains(s))
                || th.facts.iter().any(|f| {
                    let f = logic.expand(f).expect("bindings validated acyclic");
                    initial.contains(&&f)
                })
        })
        .count();
    Ok(involved)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DimensionPolicy {
    /// Nodes nothing else was derived from.
    #[default]
    Maximal,
    All,
    /// The k highest-valued nodes, ties broken by node id.
    TopK(usize),
}

impl std::str::FromStr for DimensionPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "maximal" => Ok(DimensionPolicy::Maximal),
            "all" => Ok(DimensionPolicy::All),
            _ => match s.strip_prefix("top:").map(str::parse::<usize>) {
                Some(Ok(k)) if k > 0 => Ok(DimensionPolicy::TopK(k)),
                _ => Err(format!("expected maximal, all, or top:K with K > 0, got `{s}`")),
            },
        }
    }
}

/// Coordinates over semantic items, in node order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SemanticPoint {
    pub dims: Vec<(Term, f64)>,
}

pub fn semantic_point(lattice: &Lattice, values: &NodeValues, policy: DimensionPolicy) -> SemanticPoint {
    let mut selected: Vec<NodeId> = match policy {
        DimensionPolicy::Maximal => lattice.sinks(),
        DimensionPolicy::All => (0..lattice.nodes.len()).collect(),
        DimensionPolicy::TopK(k) => {
            let mut ids: Vec<NodeId> = (0..lattice.nodes.len()).collect();
            ids.sort_by(|&a, &b| values.get(b).total_cmp(&values.get(a)).then(a.cmp(&b)));
            ids.truncate(k);
            ids
        }
    };
    selected.sort_unstable();
    let dims = selected
        .into_iter()
        .flat_map(|id| {
            lattice.nodes[id]
                .terms
                .iter()
                .map(move |t| (t.clone(), values.get(id)))
        })
        .collect();
    SemanticPoint { dims }
}

/// Euclidean distance of the point from the origin.
pub fn overall_complexity(point: &SemanticPoint) -> f64 {
    point.dims.iter().fold(0.0, |acc: f64, (_, v)| acc.hypot(*v))
}

/// Each value's share of the total.
pub fn relative_complexity(values: &[f64]) -> Result<Vec<f64>, ComplexityError> {
    if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(ComplexityError::Negative);
    }
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return Err(ComplexityError::AllZero);
    }
    Ok(values.iter().map(|v| v / total).collect())
}

/// Which scalar stands for a sentence when sentences are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Measure {
    #[default]
    Overall,
    Dastex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    pub text: String,
    pub logic_id: String,
    pub values: NodeValues,
    pub normalized: Option<Vec<f64>>,
    pub point: SemanticPoint,
    pub dastex: usize,
    pub overall: f64,
}

impl ComplexityReport {
    pub fn compute(
        lattice: &Lattice,
        logic: &SemanticLogic,
        config: &ValueConfig,
        policy: DimensionPolicy,
        log_normalized: bool,
    ) -> Result<Self, ComplexityError> {
        config.validate()?;
        let dastex = dastex(lattice, logic)?;
        let values = node_complexity(lattice, logic, config);
        let point = semantic_point(lattice, &values, policy);
        Ok(ComplexityReport {
            text: lattice.text.clone(),
            logic_id: lattice.logic_id.clone(),
            normalized: log_normalized.then(|| log_normalize(&values, config)),
            overall: overall_complexity(&point),
            values,
            point,
            dastex,
        })
    }

    pub fn measure(&self, measure: Measure) -> f64 {
        match measure {
            Measure::Overall => self.overall,
            Measure::Dastex => self.dastex as f64,
        }
    }

    pub fn to_json(&self) -> Value {
        let nodes: Vec<Value> = self
            .values
            .0
            .iter()
            .enumerate()
            .map(|(id, v)| {
                let mut node = json!({ "id": id, "value": number(*v) });
                if let Some(norm) = &self.normalized {
                    node["normalized"] = number(norm[id]);
                }
                node
            })
            .collect();
        let dims: Vec<Value> = self
            .point
            .dims
            .iter()
            .map(|(t, v)| json!({ "term": t.to_string(), "value": number(*v) }))
            .collect();
        json!({
            "text": self.text,
            "logic_id": self.logic_id,
            "nodes": nodes,
            "dimensions": dims,
            "dastex": self.dastex,
            "overall": number(self.overall),
        })
    }
}
