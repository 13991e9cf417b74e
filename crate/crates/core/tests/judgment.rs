mod common;

use std::collections::BTreeSet;

use common::fixture_path;
use dast_core::judgment::{
    comp_steps_precision, consensus_classes, dast_judge, deviation_distribution, no_deviation_precision,
    overall_result_precision, path_distribution, score, vote_values, HumanJudgment, HumanJudgmentSet,
    JudgmentError, JudgmentVector,
};
use proptest::prelude::*;

fn dj_experiment1() -> JudgmentVector {
    let raw = std::fs::read_to_string(fixture_path("dj_experiment1.json")).unwrap();
    JudgmentVector::from_json(&serde_json::from_str(&raw).unwrap()).unwrap()
}

fn humans(name: &str) -> HumanJudgmentSet {
    HumanJudgmentSet::from_csv(std::fs::File::open(fixture_path(name)).unwrap()).unwrap()
}

/// Sentences holding the largest value.
fn argmax_set(values: &[f64]) -> BTreeSet<u8> {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (1..=5u8).filter(|&i| values[usize::from(i) - 1] == max).collect()
}

fn human() -> impl Strategy<Value = HumanJudgment> {
    (prop::bool::ANY, prop::bool::ANY, prop::bool::ANY, prop::bool::ANY, prop::option::of(0usize..6)).prop_map(
        |(a5, b3, c_is_b, d_is_1, level)| {
            let a = if a5 { 5 } else { 4 };
            let b = if b3 { 3 } else { 2 };
            let c = if c_is_b { b } else { a };
            let d = if d_is_1 { 1 } else { c };
            HumanJudgment {
                participant: String::new(),
                choice: [a, b, c, d],
                agreement: level.map(|l| (l * 20) as u8),
            }
        },
    )
}

fn values_with_ties() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0u8..4, 5).prop_map(|v| v.into_iter().map(f64::from).collect())
}

#[test]
fn experiment_1_fixture_counts() {
    let dj = dj_experiment1();
    let hj = humans("experiment1_judgments.csv");
    assert_eq!(hj.len(), 22);
    // 14 final matches, 10 full matches, 71 of 88 comparisons.
    assert_eq!(overall_result_precision(&dj, &hj), 14.0 / 22.0);
    assert_eq!(no_deviation_precision(&dj, &hj), 10.0 / 22.0);
    assert_eq!(comp_steps_precision(&dj, &hj), 71.0 / 88.0);
    let report = score(&dj, &hj);
    assert_eq!(report.deviation_counts.iter().sum::<usize>(), 22);
    assert!(report.consensus.is_some());
}

#[test]
fn perfect_agreement_scores_one() {
    let dj = dj_experiment1();
    let hj = humans("judgments_perfect.csv");
    assert_eq!(overall_result_precision(&dj, &hj), 1.0);
    assert_eq!(no_deviation_precision(&dj, &hj), 1.0);
    assert_eq!(comp_steps_precision(&dj, &hj), 1.0);
    assert_eq!(deviation_distribution(&dj, &hj), [1.0, 0.0, 0.0, 0.0, 0.0]);
}

#[test]
fn other_fixtures() {
    let dj = dj_experiment1();
    let hj = humans("judgments_92.csv");
    assert_eq!(overall_result_precision(&dj, &hj), 72.0 / hj.len() as f64);
    assert!(consensus_classes(&hj, &dj).is_err());
    let hj = humans("experiment3.csv");
    let shares = deviation_distribution(&dj, &hj);
    assert_eq!(shares, [0.54, 0.32, 0.07, 0.05, 0.02]);
}

#[test]
fn csv_errors() {
    let empty = HumanJudgmentSet::from_csv("participant_id,a,b,c,d\n".as_bytes());
    assert_eq!(empty, Err(JudgmentError::Empty));
    let bad = HumanJudgmentSet::from_csv("participant_id,a,b,c,d\np,4,2,2,3\n".as_bytes());
    assert!(matches!(bad, Err(JudgmentError::Schema { row: 1, .. })), "{bad:?}");
}

#[test]
fn engineered_ties_are_joint() {
    let d = |vs: [f64; 5]| dast_judge(&vs).unwrap().d.into_iter().collect::<Vec<_>>();
    assert_eq!(d([9.0, 9.0, 1.0, 1.0, 1.0]), [1, 2]);
    assert_eq!(d([1.0, 9.0, 9.0, 1.0, 1.0]), [2, 3]);
    assert_eq!(d([1.0, 1.0, 1.0, 9.0, 9.0]), [4, 5]);
    assert_eq!(d([1.0, 9.0, 1.0, 9.0, 1.0]), [2, 4]);
    assert_eq!(d([2.0; 5]), [1, 2, 3, 4, 5]);
    let v = dast_judge(&[1.0, 1.0, 1.0, 3.0, 3.0]).unwrap();
    assert_eq!(v.a, BTreeSet::from([4, 5]));
    assert!(v.is_tied());
}

#[test]
fn judge_needs_five_values() {
    assert!(dast_judge(&[1.0; 4]).is_err());
}

proptest! {
    #[test]
    fn bracket_matches_argmax(values in values_with_ties()) {
        let v = dast_judge(&values).unwrap();
        prop_assert_eq!(&v.d, &argmax_set(&values));
        prop_assert_eq!(&v.a, &argmax_set(&[f64::MIN, f64::MIN, f64::MIN, values[3], values[4]]));
        prop_assert_eq!(&v.b, &argmax_set(&[f64::MIN, values[1], values[2], f64::MIN, f64::MIN]));
        let c_pool: Vec<f64> = (0..5).map(|i| if i == 0 { f64::MIN } else { values[i] }).collect();
        prop_assert_eq!(&v.c, &argmax_set(&c_pool));
    }

    #[test]
    fn precision_orderings(
        values in values_with_ties(),
        judgments in prop::collection::vec(human(), 1..40),
    ) {
        let dj = dast_judge(&values).unwrap();
        let hj = HumanJudgmentSet::new(judgments).unwrap();
        let overall = overall_result_precision(&dj, &hj);
        let none = no_deviation_precision(&dj, &hj);
        let steps = comp_steps_precision(&dj, &hj);
        prop_assert!(none <= overall);
        prop_assert!(none <= steps);
        let shares = deviation_distribution(&dj, &hj);
        prop_assert!((shares.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert_eq!(shares[0], none);
        prop_assert!((vote_values(&hj).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let paths = path_distribution(&hj);
        prop_assert!(paths.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!((paths.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn path_index_is_a_bijection(judgments in prop::collection::vec(human(), 16)) {
        for j in &judgments {
            let i = j.path_index();
            let [a, b, c, d] = j.choice;
            prop_assert_eq!(a == 5, i & 8 != 0);
            prop_assert_eq!(b == 3, i & 4 != 0);
            prop_assert_eq!(c == b, i & 2 != 0);
            prop_assert_eq!(d == 1, i & 1 != 0);
        }
    }

    #[test]
    fn judgment_json_round_trips(values in values_with_ties()) {
        let v = dast_judge(&values).unwrap();
        prop_assert_eq!(JudgmentVector::from_json(&v.to_json()).unwrap(), v);
    }
}
