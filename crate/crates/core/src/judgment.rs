//! Five-sentence comparison brackets and agreement between automatic and human judgments.
//!
//! The bracket: `a` = s4 vs s5, `b` = s2 vs s3, `c` = a vs b, `d` = c vs s1.
//! A component is the set of sentences that won that comparison; ties keep both.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::report::{number, numbers};

pub type Sentence = u8;

pub const AGREEMENT_LEVELS: [u8; 6] = [0, 20, 40, 60, 80, 100];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JudgmentError {
    #[error("expected 5 sentence values, got {0}")]
    Arity(usize),
    #[error("sentence values must be finite and non-negative")]
    BadValue,
    #[error("no judgments")]
    Empty,
    #[error("row {row}: {message}")]
    Schema { row: usize, message: String },
    #[error("judgment {0} has no agreement level")]
    MissingAgreement(String),
    #[error("bad judgment JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JudgmentVector {
    pub a: BTreeSet<Sentence>,
    pub b: BTreeSet<Sentence>,
    pub c: BTreeSet<Sentence>,
    pub d: BTreeSet<Sentence>,
}

impl JudgmentVector {
    pub fn singleton(a: Sentence, b: Sentence, c: Sentence, d: Sentence) -> Self {
        JudgmentVector {
            a: BTreeSet::from([a]),
            b: BTreeSet::from([b]),
            c: BTreeSet::from([c]),
            d: BTreeSet::from([d]),
        }
    }

    pub fn components(&self) -> [&BTreeSet<Sentence>; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn is_tied(&self) -> bool {
        self.components().iter().any(|c| c.len() > 1)
    }

    pub fn to_json(&self) -> Value {
        json!({ "a": self.a, "b": self.b, "c": self.c, "d": self.d })
    }

    pub fn from_json(value: &Value) -> Result<Self, JudgmentError> {
        let component = |key: &str, allowed: &[Sentence]| -> Result<BTreeSet<Sentence>, JudgmentError> {
            let raw = value
                .get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| JudgmentError::Json(format!("`{key}` must be an array")))?;
            let set: BTreeSet<Sentence> = raw
                .iter()
                .map(|v| {
                    v.as_u64()
                        .and_then(|n| Sentence::try_from(n).ok())
                        .filter(|n| allowed.contains(n))
                        .ok_or_else(|| {
                            JudgmentError::Json(format!("`{key}` holds {v}, expected one of {allowed:?}"))
                        })
                })
                .collect::<Result<_, _>>()?;
            if set.is_empty() {
                return Err(JudgmentError::Json(format!("`{key}` is empty")));
            }
            Ok(set)
        };
        Ok(JudgmentVector {
            a: component("a", &[4, 5])?,
            b: component("b", &[2, 3])?,
            c: component("c", &[2, 3, 4, 5])?,
            d: component("d", &[1, 2, 3, 4, 5])?,
        })
    }
}

type Contender = (BTreeSet<Sentence>, f64);

fn winner(x: Contender, y: Contender) -> Contender {
    if x.1 > y.1 {
        x
    } else if y.1 > x.1 {
        y
    } else {
        let mut both = x.0;
        both.extend(y.0);
        (both, x.1)
    }
}

/// Run the bracket over complexity values of sentences 1..5.
pub fn dast_judge(values: &[f64]) -> Result<JudgmentVector, JudgmentError> {
    if values.len() != 5 {
        return Err(JudgmentError::Arity(values.len()));
    }
    if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(JudgmentError::BadValue);
    }
    let s = |i: Sentence| (BTreeSet::from([i]), values[usize::from(i) - 1]);
    let a = winner(s(4), s(5));
    let b = winner(s(2), s(3));
    let c = winner(a.clone(), b.clone());
    let d = winner(c.clone(), s(1));
    Ok(JudgmentVector {
        a: a.0,
        b: b.0,
        c: c.0,
        d: d.0,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HumanJudgment {
    pub participant: String,
    /// The chosen sentence for a, b, c, d.
    pub choice: [Sentence; 4],
    pub agreement: Option<u8>,
}

impl HumanJudgment {
    /// Check that the choices describe one walk through the bracket.
    fn check(&self) -> Result<(), String> {
        let [a, b, c, d] = self.choice;
        if ![4, 5].contains(&a) {
            return Err(format!("a must be 4 or 5, got {a}"));
        }
        if ![2, 3].contains(&b) {
            return Err(format!("b must be 2 or 3, got {b}"));
        }
        if c != a && c != b {
            return Err(format!("c must be a ({a}) or b ({b}), got {c}"));
        }
        if d != c && d != 1 {
            return Err(format!("d must be c ({c}) or 1, got {d}"));
        }
        if let Some(level) = self.agreement {
            if !AGREEMENT_LEVELS.contains(&level) {
                return Err(format!("agreement must be one of {AGREEMENT_LEVELS:?}, got {level}"));
            }
        }
        Ok(())
    }

    /// Which contender won each of the four comparisons, as a 4-bit path index.
    pub fn path_index(&self) -> usize {
        let [a, b, c, d] = self.choice;
        usize::from(a == 5) << 3 | usize::from(b == 3) << 2 | usize::from(c == b) << 1 | usize::from(d == 1)
    }

    fn matches(&self, dj: &JudgmentVector) -> [bool; 4] {
        let comps = dj.components();
        std::array::from_fn(|i| comps[i].contains(&self.choice[i]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HumanJudgmentSet {
    pub judgments: Vec<HumanJudgment>,
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    participant_id: String,
    a: Sentence,
    b: Sentence,
    c: Sentence,
    d: Sentence,
    #[serde(default)]
    agreement: Option<u8>,
}

impl HumanJudgmentSet {
    pub fn new(judgments: Vec<HumanJudgment>) -> Result<Self, JudgmentError> {
        if judgments.is_empty() {
            return Err(JudgmentError::Empty);
        }
        for (i, j) in judgments.iter().enumerate() {
            j.check().map_err(|message| JudgmentError::Schema { row: i + 1, message })?;
        }
        Ok(HumanJudgmentSet { judgments })
    }

    /// Read `participant_id,a,b,c,d[,agreement]` rows. Row numbers in errors count data rows from 1.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, JudgmentError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut judgments = Vec::new();
        for (i, row) in rdr.deserialize::<CsvRow>().enumerate() {
            let row = row.map_err(|e| JudgmentError::Schema {
                row: i + 1,
                message: e.to_string(),
            })?;
            judgments.push(HumanJudgment {
                participant: row.participant_id,
                choice: [row.a, row.b, row.c, row.d],
                agreement: row.agreement,
            });
        }
        Self::new(judgments)
    }

    pub fn len(&self) -> usize {
        self.judgments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }
}

fn share(count: usize, total: usize) -> f64 {
    count as f64 / total as f64
}

/// Fraction of judgments whose final choice is among the automatic winners.
pub fn overall_result_precision(dj: &JudgmentVector, hj: &HumanJudgmentSet) -> f64 {
    let hits = hj.judgments.iter().filter(|j| j.matches(dj)[3]).count();
    share(hits, hj.len())
}

/// Fraction of judgments agreeing with the automatic judgment on every comparison.
pub fn no_deviation_precision(dj: &JudgmentVector, hj: &HumanJudgmentSet) -> f64 {
    let hits = hj
        .judgments
        .iter()
        .filter(|j| j.matches(dj).iter().all(|&m| m))
        .count();
    share(hits, hj.len())
}

/// Matching comparisons over all judgments, out of four per judgment.
pub fn comp_steps_precision(dj: &JudgmentVector, hj: &HumanJudgmentSet) -> f64 {
    let hits: usize = hj
        .judgments
        .iter()
        .map(|j| j.matches(dj).iter().filter(|&&m| m).count())
        .sum();
    share(hits, 4 * hj.len())
}

fn deviation_counts(dj: &JudgmentVector, hj: &HumanJudgmentSet) -> [usize; 5] {
    let mut counts = [0; 5];
    for j in &hj.judgments {
        let matched = j.matches(dj).iter().filter(|&&m| m).count();
        counts[4 - matched] += 1;
    }
    counts
}

/// Shares of judgments deviating in 0, 1, 2, 3, 4 comparisons.
pub fn deviation_distribution(dj: &JudgmentVector, hj: &HumanJudgmentSet) -> [f64; 5] {
    deviation_counts(dj, hj).map(|c| share(c, hj.len()))
}

/// Share of judgments naming each sentence as the most complex.
pub fn vote_values(hj: &HumanJudgmentSet) -> [f64; 5] {
    let mut counts = [0usize; 5];
    for j in &hj.judgments {
        counts[usize::from(j.choice[3]) - 1] += 1;
    }
    counts.map(|c| share(c, hj.len()))
}

/// Shares of the 16 bracket paths, sorted ascending.
pub fn path_distribution(hj: &HumanJudgmentSet) -> [f64; 16] {
    let mut counts = [0usize; 16];
    for j in &hj.judgments {
        counts[j.path_index()] += 1;
    }
    counts.sort_unstable();
    counts.map(|c| share(c, hj.len()))
}

/// Overall precision within each agreement class present in the data.
pub fn consensus_classes(
    hj: &HumanJudgmentSet,
    dj: &JudgmentVector,
) -> Result<BTreeMap<u8, f64>, JudgmentError> {
    let mut classes: BTreeMap<u8, (usize, usize)> = BTreeMap::new();
    for j in &hj.judgments {
        let level = j
            .agreement
            .ok_or_else(|| JudgmentError::MissingAgreement(j.participant.clone()))?;
        let entry = classes.entry(level).or_default();
        entry.1 += 1;
        if j.matches(dj)[3] {
            entry.0 += 1;
        }
    }
    Ok(classes
        .into_iter()
        .map(|(level, (hits, n))| (level, share(hits, n)))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionReport {
    pub overall: f64,
    pub no_deviation: f64,
    pub comp_steps: f64,
    pub deviation_shares: [f64; 5],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub judgments: usize,
    pub precision: PrecisionReport,
    pub deviation_counts: [usize; 5],
    pub vote_values: [f64; 5],
    pub path_shares: [f64; 16],
    /// Present when every judgment carries an agreement level.
    pub consensus: Option<BTreeMap<u8, f64>>,
}

pub fn score(dj: &JudgmentVector, hj: &HumanJudgmentSet) -> ScoreReport {
    ScoreReport {
        judgments: hj.len(),
        precision: PrecisionReport {
            overall: overall_result_precision(dj, hj),
            no_deviation: no_deviation_precision(dj, hj),
            comp_steps: comp_steps_precision(dj, hj),
            deviation_shares: deviation_distribution(dj, hj),
        },
        deviation_counts: deviation_counts(dj, hj),
        vote_values: vote_values(hj),
        path_shares: path_distribution(hj),
        consensus: consensus_classes(hj, dj).ok(),
    }
}

impl ScoreReport {
    pub fn to_json(&self) -> Value {
        let p = &self.precision;
        json!({
            "judgments": self.judgments,
            "overall": number(p.overall),
            "no_deviation": number(p.no_deviation),
            "comp_steps": number(p.comp_steps),
            "deviation_shares": numbers(&p.deviation_shares),
            "deviation_counts": self.deviation_counts,
            "vote_values": numbers(&self.vote_values),
            "path_shares": numbers(&self.path_shares),
            "consensus": self.consensus.as_ref().map(|c| {
                c.iter()
                    .map(|(k, v)| (k.to_string(), number(*v)))
                    .collect::<serde_json::Map<_, _>>()
            }),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(rows: &[[Sentence; 4]]) -> HumanJudgmentSet {
        HumanJudgmentSet::new(
            rows.iter()
                .enumerate()
                .map(|(i, &choice)| HumanJudgment {
                    participant: format!("p{i}"),
                    choice,
                    agreement: None,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn bracket_examples() {
        assert_eq!(
            dast_judge(&[10.0, 8.0, 6.0, 4.0, 2.0]).unwrap(),
            JudgmentVector::singleton(4, 2, 2, 1)
        );
        let tied = dast_judge(&[1.0, 2.0, 3.0, 5.0, 5.0]).unwrap();
        assert_eq!(tied.a, BTreeSet::from([4, 5]));
        assert_eq!(tied.d, BTreeSet::from([4, 5]));
        let flat = dast_judge(&[1.0; 5]).unwrap();
        assert_eq!(flat.d, BTreeSet::from([1, 2, 3, 4, 5]));
        assert_eq!(flat.c, BTreeSet::from([2, 3, 4, 5]));
        assert_eq!(dast_judge(&[1.0; 4]), Err(JudgmentError::Arity(4)));
    }

    #[test]
    fn precision_on_half_matching_judgment() {
        let dj = JudgmentVector::singleton(5, 2, 2, 1);
        let hj = set(&[[5, 3, 3, 1]]);
        assert_eq!(comp_steps_precision(&dj, &hj), 0.5);
        assert_eq!(overall_result_precision(&dj, &hj), 1.0);
        assert_eq!(no_deviation_precision(&dj, &hj), 0.0);
        assert_eq!(deviation_distribution(&dj, &hj), [0.0, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn full_deviation() {
        let dj = JudgmentVector::singleton(5, 2, 2, 1);
        let hj = set(&[[4, 3, 4, 4]]);
        assert_eq!(deviation_distribution(&dj, &hj), [0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn votes_and_paths() {
        let mut rows = vec![[5, 2, 2, 2]; 5];
        rows.extend([[5, 2, 2, 1]; 3]);
        rows.extend([[5, 2, 5, 5]; 2]);
        let hj = set(&rows);
        assert_eq!(vote_values(&hj), [0.3, 0.5, 0.0, 0.0, 0.2]);
        let paths = path_distribution(&hj);
        assert_eq!(&paths[13..], &[0.2, 0.3, 0.5]);
        assert_eq!(paths[..13].iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn every_path_index_is_reachable() {
        let mut seen = BTreeSet::new();
        for a in [4, 5] {
            for b in [2, 3] {
                for c in [a, b] {
                    for d in [c, 1] {
                        let j = HumanJudgment {
                            participant: String::new(),
                            choice: [a, b, c, d],
                            agreement: None,
                        };
                        j.check().unwrap();
                        seen.insert(j.path_index());
                    }
                }
            }
        }
        assert_eq!(seen.len(), 16);
    }

    #[test]
    fn csv_rows_and_schema_errors() {
        let csv = "participant_id,a,b,c,d,agreement\np1,5,2,2,1,100\np2,4,3,3,1,\n";
        let hj = HumanJudgmentSet::from_csv(csv.as_bytes()).unwrap();
        assert_eq!(hj.judgments[0].agreement, Some(100));
        assert_eq!(hj.judgments[1].agreement, None);
        let bad = "participant_id,a,b,c,d\np1,5,2,4,1\n";
        assert!(matches!(
            HumanJudgmentSet::from_csv(bad.as_bytes()),
            Err(JudgmentError::Schema { row: 1, .. })
        ));
        let bad_level = "participant_id,a,b,c,d,agreement\np1,5,2,2,1,50\n";
        assert!(HumanJudgmentSet::from_csv(bad_level.as_bytes()).is_err());
        let empty = "participant_id,a,b,c,d,agreement\n";
        assert_eq!(HumanJudgmentSet::from_csv(empty.as_bytes()), Err(JudgmentError::Empty));
    }

    #[test]
    fn consensus_by_class() {
        let dj = JudgmentVector::singleton(5, 2, 2, 1);
        let mut hj = set(&[[5, 2, 2, 1], [5, 2, 2, 2], [5, 2, 2, 1]]);
        assert!(consensus_classes(&hj, &dj).is_err());
        for (j, level) in hj.judgments.iter_mut().zip([100, 0, 100]) {
            j.agreement = Some(level);
        }
        let classes = consensus_classes(&hj, &dj).unwrap();
        assert_eq!(classes, BTreeMap::from([(0, 0.0), (100, 1.0)]));
    }

    #[test]
    fn judgment_json_round_trip() {
        let dj = dast_judge(&[1.0, 2.0, 2.0, 0.0, 0.0]).unwrap();
        assert_eq!(JudgmentVector::from_json(&dj.to_json()).unwrap(), dj);
        assert!(JudgmentVector::from_json(&json!({"a": [], "b": [2], "c": [2], "d": [1]})).is_err());
    }
}
