//! Simple/hard paragraph pairs and difficulty ratios of metrics over them.

mod report;
mod text;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;

pub use report::{CorpusReport, MetricSummary, ReportOptions};
pub use text::{flesch_kincaid, flesch_kincaid_text, syllables, text_stats, TextError, TextStats};

use crate::regression::{linear_regression, LinearFit, RegressionError};

/// Metric columns of the corpus CSV, in file order.
pub const METRIC_COLUMNS: [&str; 10] = [
    "word_count",
    "fixation_time_ms",
    "readability_level",
    "flesch_kincaid",
    "gunning_fog",
    "smog",
    "ari",
    "coleman_liau",
    "dastex",
    "dast_eval_time_min",
];

const KEY_COLUMNS: [&str; 4] = ["id", "topic", "genre_class", "variant"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("topic `{topic}` has no {variant} paragraph")]
    MissingVariant { topic: String, variant: Variant },
    #[error("topic `{0}` has more than one simple/hard pair")]
    DuplicatePair(String),
    #[error("topic `{0}` mixes genre classes")]
    GenreMismatch(String),
    #[error("paragraph `{id}` has no `{metric}` value")]
    MissingMetric { metric: String, id: String },
    #[error("`{metric}` is zero on hard paragraph `{id}`")]
    ZeroDenominator { metric: String, id: String },
    #[error("`{0}` averages to zero on hard paragraphs")]
    ZeroAverage(String),
    #[error("difficulty ratio of `{metric}` for `{topic}` is not positive")]
    NonPositiveRatio { metric: String, topic: String },
    #[error("reference ratio must be positive, got {0}")]
    NonPositiveReference(f64),
    #[error("no pairs")]
    NoPairs,
    #[error("excluded pair `{0}` is not in the corpus")]
    UnknownExclusion(String),
    #[error("{genre}: {source}")]
    Regression {
        genre: Genre,
        #[source]
        source: RegressionError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Genre {
    HistoryLiterature,
    GeographyScience,
}

impl Genre {
    pub fn as_str(self) -> &'static str {
        match self {
            Genre::HistoryLiterature => "history-literature",
            Genre::GeographyScience => "geography-science",
        }
    }
}

impl fmt::Display for Genre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Genre {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "history-literature" => Ok(Genre::HistoryLiterature),
            "geography-science" => Ok(Genre::GeographyScience),
            _ => Err(format!("unknown genre class `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Simple,
    Hard,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Simple => "simple",
            Variant::Hard => "hard",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParagraphRecord {
    pub id: String,
    pub topic: String,
    pub genre: Genre,
    pub variant: Variant,
    pub metrics: BTreeMap<String, f64>,
}

impl ParagraphRecord {
    pub fn metric(&self, metric: &str) -> Result<f64, CorpusError> {
        self.metrics
            .get(metric)
            .copied()
            .ok_or_else(|| CorpusError::MissingMetric {
                metric: metric.to_string(),
                id: self.id.clone(),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    pub topic: String,
    pub simple: ParagraphRecord,
    pub hard: ParagraphRecord,
}

impl PairRecord {
    pub fn genre(&self) -> Genre {
        self.simple.genre
    }
}

/// Read paragraph rows and pair them by topic, keeping topics in order of first appearance.
pub fn ingest_corpus<R: Read>(reader: R) -> Result<Vec<PairRecord>, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CorpusError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Ok(Vec::new());
    }
    let mut columns: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, h) in headers.iter().enumerate() {
        if !KEY_COLUMNS.contains(&h) && !METRIC_COLUMNS.contains(&h) {
            return Err(CorpusError::Parse {
                line: 1,
                message: format!("unknown column `{h}`"),
            });
        }
        if columns.insert(h, i).is_some() {
            return Err(CorpusError::Parse {
                line: 1,
                message: format!("duplicate column `{h}`"),
            });
        }
    }
    for key in KEY_COLUMNS {
        if !columns.contains_key(key) {
            return Err(CorpusError::Parse {
                line: 1,
                message: format!("missing column `{key}`"),
            });
        }
    }

    let mut order: Vec<String> = Vec::new();
    let mut slots: BTreeMap<String, (Option<ParagraphRecord>, Option<ParagraphRecord>)> = BTreeMap::new();
    for row in rdr.records() {
        let row = row.map_err(|e| CorpusError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let parse_err = |message: String| CorpusError::Parse { line, message };
        let cell = |name: &str| row.get(columns[name]).unwrap_or("");
        let id = cell("id").to_string();
        let topic = cell("topic").to_string();
        if id.is_empty() || topic.is_empty() {
            return Err(parse_err("id and topic must be non-empty".into()));
        }
        let genre = cell("genre_class").parse().map_err(parse_err)?;
        let variant = match cell("variant") {
            "simple" => Variant::Simple,
            "hard" => Variant::Hard,
            other => return Err(parse_err(format!("variant must be simple or hard, got `{other}`"))),
        };
        let mut metrics = BTreeMap::new();
        for name in METRIC_COLUMNS {
            let Some(&col) = columns.get(name) else { continue };
            let raw = row.get(col).unwrap_or("");
            if raw.is_empty() {
                continue;
            }
            let value: f64 = raw
                .parse()
                .map_err(|_| parse_err(format!("`{name}` is not a number: `{raw}`")))?;
            if !value.is_finite() {
                return Err(parse_err(format!("`{name}` must be finite")));
            }
            if name == "word_count" && value <= 0.0 {
                return Err(parse_err("word_count must be positive".into()));
            }
            metrics.insert(name.to_string(), value);
        }
        let record = ParagraphRecord {
            id,
            topic: topic.clone(),
            genre,
            variant,
            metrics,
        };
        let slot = slots.entry(topic.clone()).or_insert_with(|| {
            order.push(topic.clone());
            (None, None)
        });
        let target = match variant {
            Variant::Simple => &mut slot.0,
            Variant::Hard => &mut slot.1,
        };
        if target.is_some() {
            return Err(CorpusError::DuplicatePair(topic));
        }
        *target = Some(record);
    }

    order
        .into_iter()
        .map(|topic| {
            let (simple, hard) = slots.remove(&topic).expect("every ordered topic has a slot");
            let simple = simple.ok_or_else(|| CorpusError::MissingVariant {
                topic: topic.clone(),
                variant: Variant::Simple,
            })?;
            let hard = hard.ok_or_else(|| CorpusError::MissingVariant {
                topic: topic.clone(),
                variant: Variant::Hard,
            })?;
            if simple.genre != hard.genre {
                return Err(CorpusError::GenreMismatch(topic));
            }
            Ok(PairRecord { topic, simple, hard })
        })
        .collect()
}

/// `F(simple) / F(hard)` for one pair.
pub fn difficulty_ratio(metric: &str, pair: &PairRecord) -> Result<f64, CorpusError> {
    let simple = pair.simple.metric(metric)?;
    let hard = pair.hard.metric(metric)?;
    if hard == 0.0 {
        return Err(CorpusError::ZeroDenominator {
            metric: metric.to_string(),
            id: pair.hard.id.clone(),
        });
    }
    Ok(simple / hard)
}

fn average(values: impl Iterator<Item = Result<f64, CorpusError>>) -> Result<f64, CorpusError> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v?;
        n += 1;
    }
    Ok(sum / n as f64)
}

pub fn simple_average(metric: &str, pairs: &[PairRecord]) -> Result<f64, CorpusError> {
    if pairs.is_empty() {
        return Err(CorpusError::NoPairs);
    }
    average(pairs.iter().map(|p| p.simple.metric(metric)))
}

pub fn hard_average(metric: &str, pairs: &[PairRecord]) -> Result<f64, CorpusError> {
    if pairs.is_empty() {
        return Err(CorpusError::NoPairs);
    }
    average(pairs.iter().map(|p| p.hard.metric(metric)))
}

/// Mean over simple paragraphs divided by mean over hard paragraphs.
pub fn overall_difficulty_ratio(metric: &str, pairs: &[PairRecord]) -> Result<f64, CorpusError> {
    let simple = simple_average(metric, pairs)?;
    let hard = hard_average(metric, pairs)?;
    if hard == 0.0 {
        return Err(CorpusError::ZeroAverage(metric.to_string()));
    }
    Ok(simple / hard)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrCurve {
    pub metric: String,
    /// Per-pair ratios, ascending, divided by their maximum.
    pub points: Vec<f64>,
}

impl DrCurve {
    /// Largest pointwise difference to a curve of the same length.
    pub fn max_distance(&self, other: &DrCurve) -> Option<f64> {
        (self.points.len() == other.points.len()).then(|| {
            self.points
                .iter()
                .zip(&other.points)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
    }
}

pub fn dr_curve(metric: &str, pairs: &[PairRecord]) -> Result<DrCurve, CorpusError> {
    let mut ratios = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let r = difficulty_ratio(metric, pair)?;
        if r.is_nan() || r <= 0.0 {
            return Err(CorpusError::NonPositiveRatio {
                metric: metric.to_string(),
                topic: pair.topic.clone(),
            });
        }
        ratios.push(r);
    }
    ratios.sort_by(f64::total_cmp);
    let max = ratios.last().copied().unwrap_or(1.0);
    Ok(DrCurve {
        metric: metric.to_string(),
        points: ratios.into_iter().map(|r| r / max).collect(),
    })
}

/// `100 · |metric_dr − reference_dr| / reference_dr`.
pub fn dr_error_pct(metric_dr: f64, reference_dr: f64) -> Result<f64, CorpusError> {
    if reference_dr.is_nan() || reference_dr <= 0.0 {
        return Err(CorpusError::NonPositiveReference(reference_dr));
    }
    Ok(100.0 * (metric_dr - reference_dr).abs() / reference_dr)
}

/// Reading-time measure paired against DASTEX in the per-genre regressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixationMeasure {
    /// Total fixation time.
    FixationTime,
    /// Fixation time divided by word count.
    FixationTimePerWord,
}

impl FixationMeasure {
    fn value(self, p: &ParagraphRecord) -> Result<f64, CorpusError> {
        let t = p.metric("fixation_time_ms")?;
        match self {
            FixationMeasure::FixationTime => Ok(t),
            FixationMeasure::FixationTimePerWord => Ok(t / p.metric("word_count")?),
        }
    }

    fn ratio(self, pair: &PairRecord) -> Result<f64, CorpusError> {
        let hard = self.value(&pair.hard)?;
        if hard == 0.0 {
            return Err(CorpusError::ZeroDenominator {
                metric: "fixation_time_ms".into(),
                id: pair.hard.id.clone(),
            });
        }
        Ok(self.value(&pair.simple)? / hard)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FixationMeasure::FixationTime => "fixation_time",
            FixationMeasure::FixationTimePerWord => "fixation_time_per_word",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenreFit {
    pub genre: Genre,
    /// `(measure DR, DASTEX DR)` per included pair.
    pub points: Vec<(f64, f64)>,
    pub fit: LinearFit,
}

/// Per genre class, regress DASTEX ratios on measure ratios, skipping excluded topics.
pub fn genre_split_regression(
    pairs: &[PairRecord],
    measure: FixationMeasure,
    exclude: &[String],
) -> Result<Vec<GenreFit>, CorpusError> {
    if let Some(unknown) = exclude.iter().find(|e| !pairs.iter().any(|p| &p.topic == *e)) {
        return Err(CorpusError::UnknownExclusion(unknown.clone()));
    }
    let mut classes: BTreeMap<Genre, Vec<(f64, f64)>> = BTreeMap::new();
    for pair in pairs.iter().filter(|p| !exclude.contains(&p.topic)) {
        let x = measure.ratio(pair)?;
        let y = difficulty_ratio("dastex", pair)?;
        classes.entry(pair.genre()).or_default().push((x, y));
    }
    classes
        .into_iter()
        .map(|(genre, points)| {
            let fit = linear_regression(&points).map_err(|source| CorpusError::Regression { genre, source })?;
            Ok(GenreFit { genre, points, fit })
        })
        .collect()
}
