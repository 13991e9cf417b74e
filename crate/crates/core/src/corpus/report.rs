use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use super::{
    dr_curve, dr_error_pct, genre_split_regression, hard_average, overall_difficulty_ratio,
    simple_average, DrCurve, FixationMeasure, GenreFit, PairRecord,
};
use crate::report::{number, numbers};

/// Report row order.
const REPORT_ORDER: [&str; 10] = [
    "dastex",
    "fixation_time_ms",
    "word_count",
    "readability_level",
    "flesch_kincaid",
    "gunning_fog",
    "coleman_liau",
    "smog",
    "ari",
    "dast_eval_time_min",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    /// Round overall ratios to this many decimals before computing error percentages.
    pub dr_decimals: Option<u32>,
    /// Metrics whose ratios serve as references for the error matrix.
    pub references: Vec<String>,
    /// Topics left out of the per-genre regressions.
    pub exclude: Vec<String>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            dr_decimals: None,
            references: vec![
                "fixation_time_ms".into(),
                "word_count".into(),
                "readability_level".into(),
            ],
            exclude: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSummary {
    pub metric: String,
    pub simple_avg: f64,
    pub hard_avg: f64,
    pub dr: f64,
    /// `dr` after rounding to the requested decimals; equal to `dr` when no rounding was asked for.
    pub dr_reported: f64,
    pub curve: Result<DrCurve, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusReport {
    pub pairs: usize,
    pub metrics: Vec<MetricSummary>,
    /// Metric name and the reason it could not be evaluated.
    pub omitted: Vec<(String, String)>,
    /// reference → metric → error percentage.
    pub errors: BTreeMap<String, BTreeMap<String, f64>>,
    /// metric → metric → max-norm distance between curves.
    pub distances: BTreeMap<String, BTreeMap<String, f64>>,
    pub regressions: BTreeMap<&'static str, Result<Vec<GenreFit>, String>>,
}

fn round_to(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (x * scale).round() / scale
}

impl CorpusReport {
    pub fn build(pairs: &[PairRecord], options: &ReportOptions) -> CorpusReport {
        let mut metrics = Vec::new();
        let mut omitted = Vec::new();
        for name in REPORT_ORDER {
            let anywhere = pairs
                .iter()
                .any(|p| p.simple.metrics.contains_key(name) || p.hard.metrics.contains_key(name));
            if !anywhere {
                omitted.push((name.to_string(), "no values".to_string()));
                continue;
            }
            let summary = (|| {
                let dr = overall_difficulty_ratio(name, pairs)?;
                Ok::<_, super::CorpusError>(MetricSummary {
                    metric: name.to_string(),
                    simple_avg: simple_average(name, pairs)?,
                    hard_avg: hard_average(name, pairs)?,
                    dr,
                    dr_reported: options.dr_decimals.map_or(dr, |d| round_to(dr, d)),
                    curve: dr_curve(name, pairs).map_err(|e| e.to_string()),
                })
            })();
            match summary {
                Ok(s) => metrics.push(s),
                Err(e) => omitted.push((name.to_string(), e.to_string())),
            }
        }

        let mut errors = BTreeMap::new();
        for reference in &options.references {
            let Some(r) = metrics.iter().find(|m| &m.metric == reference) else {
                continue;
            };
            let row: BTreeMap<String, f64> = metrics
                .iter()
                .filter_map(|m| {
                    dr_error_pct(m.dr_reported, r.dr_reported)
                        .ok()
                        .map(|e| (m.metric.clone(), e))
                })
                .collect();
            errors.insert(reference.clone(), row);
        }

        let mut distances = BTreeMap::new();
        for m in &metrics {
            let Ok(curve) = &m.curve else { continue };
            let row: BTreeMap<String, f64> = metrics
                .iter()
                .filter_map(|o| {
                    let other = o.curve.as_ref().ok()?;
                    curve.max_distance(other).map(|d| (o.metric.clone(), d))
                })
                .collect();
            distances.insert(m.metric.clone(), row);
        }

        let mut regressions = BTreeMap::new();
        if metrics.iter().any(|m| m.metric == "dastex") && metrics.iter().any(|m| m.metric == "fixation_time_ms") {
            for measure in [FixationMeasure::FixationTime, FixationMeasure::FixationTimePerWord] {
                regressions.insert(
                    measure.as_str(),
                    genre_split_regression(pairs, measure, &options.exclude).map_err(|e| e.to_string()),
                );
            }
        }

        CorpusReport {
            pairs: pairs.len(),
            metrics,
            omitted,
            errors,
            distances,
            regressions,
        }
    }

    pub fn metric(&self, name: &str) -> Option<&MetricSummary> {
        self.metrics.iter().find(|m| m.metric == name)
    }

    pub fn to_json(&self, exclude: &[String]) -> Value {
        let metrics: Vec<Value> = self
            .metrics
            .iter()
            .map(|m| {
                let mut v = json!({
                    "metric": m.metric,
                    "simple_avg": number(m.simple_avg),
                    "hard_avg": number(m.hard_avg),
                    "dr": number(m.dr),
                    "dr_reported": number(m.dr_reported),
                });
                match &m.curve {
                    Ok(c) => v["curve"] = numbers(&c.points),
                    Err(e) => v["curve_error"] = json!(e),
                }
                v
            })
            .collect();
        let matrix = |m: &BTreeMap<String, BTreeMap<String, f64>>| -> Value {
            m.iter()
                .map(|(k, row)| {
                    let row: Map<String, Value> = row.iter().map(|(k, v)| (k.clone(), number(*v))).collect();
                    (k.clone(), Value::Object(row))
                })
                .collect::<Map<_, _>>()
                .into()
        };
        let regressions: Map<String, Value> = self
            .regressions
            .iter()
            .map(|(measure, result)| {
                let v = match result {
                    Ok(fits) => {
                        let by_genre: Map<String, Value> = fits
                            .iter()
                            .map(|g| {
                                (
                                    g.genre.to_string(),
                                    json!({
                                        "points": g.points.len(),
                                        "slope": number(g.fit.slope),
                                        "intercept": number(g.fit.intercept),
                                        "r_squared": number(g.fit.r_squared),
                                    }),
                                )
                            })
                            .collect();
                        Value::Object(by_genre)
                    }
                    Err(e) => json!({ "error": e }),
                };
                (measure.to_string(), v)
            })
            .collect();
        json!({
            "pairs": self.pairs,
            "metrics": metrics,
            "omitted": self.omitted.iter().map(|(m, why)| json!({"metric": m, "reason": why})).collect::<Vec<_>>(),
            "errors": matrix(&self.errors),
            "curve_distances": matrix(&self.distances),
            "regressions": regressions,
            "excluded": exclude,
        })
    }

    /// One row per metric: averages, ratios, and error percentages against each reference.
    pub fn to_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let refs: Vec<&String> = self.errors.keys().collect();
        let mut header = vec![
            "metric".to_string(),
            "simple_avg".into(),
            "hard_avg".into(),
            "dr".into(),
            "dr_reported".into(),
        ];
        header.extend(refs.iter().map(|r| format!("error_vs_{r}")));
        header.push("omitted".into());
        wtr.write_record(&header).expect("in-memory write");
        let fmt = |x: f64| number(x).to_string();
        for m in &self.metrics {
            let mut row = vec![
                m.metric.clone(),
                fmt(m.simple_avg),
                fmt(m.hard_avg),
                fmt(m.dr),
                fmt(m.dr_reported),
            ];
            row.extend(
                refs.iter()
                    .map(|r| self.errors[*r].get(&m.metric).map_or(String::new(), |e| fmt(*e))),
            );
            row.push(String::new());
            wtr.write_record(&row).expect("in-memory write");
        }
        for (metric, why) in &self.omitted {
            let mut row = vec![metric.clone()];
            row.extend(std::iter::repeat_n(String::new(), 4 + refs.len()));
            row.push(why.clone());
            wtr.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
    }
}
