//! Correlation and inter-rater agreement statistics.
//!
//! Krippendorff's α uses the ordinal difference function on coincidence counts:
//! for values `c <= k` with marginals `n_g`,
//! `δ²(c, k) = (Σ_{g=c..=k} n_g - (n_c + n_k) / 2)²`, and
//! `α = 1 - (n - 1) Σ o_ck δ²(c,k) / Σ n_c n_k δ²(c,k)`.
//! Only items with at least two present ratings are pairable.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::concept::ParseEnumError;

pub const RATERS: usize = 3;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StatsError {
    #[error("need at least 2 values, got {0}")]
    TooFewValues(usize),
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("series keys differ: `{0}` is missing from one side")]
    KeyMismatch(String),
    #[error("series `{0}` has zero variance; correlation is undefined")]
    ZeroVariance(String),
    #[error("no pairable values (no item has two or more ratings)")]
    NoPairableValues,
    #[error("all pairable ratings share one value; expected disagreement is zero")]
    NoVariation,
    #[error("no items")]
    Empty,
    #[error("rating {value} outside the {question} scale")]
    OutOfScale { question: Question, value: u8 },
    #[error("row {row}: {message}")]
    Input { row: usize, message: String },
}

/// Rated question. Relevance is coded No = 1, Maybe = 2, Yes = 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Question {
    Relevance,
    Faithfulness,
    Realism,
}

impl Question {
    pub const ALL: [Question; 3] = [
        Question::Relevance,
        Question::Faithfulness,
        Question::Realism,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Question::Relevance => "relevance",
            Question::Faithfulness => "faithfulness",
            Question::Realism => "realism",
        }
    }

    pub fn max_value(self) -> u8 {
        match self {
            Question::Relevance => 3,
            Question::Faithfulness | Question::Realism => 5,
        }
    }

    pub fn is_likert(self) -> bool {
        self != Question::Relevance
    }

    /// Parses a rating cell; relevance also accepts `yes`, `maybe` and `no`.
    pub fn parse_value(self, text: &str) -> Result<u8, String> {
        let t = text.trim();
        if self == Question::Relevance {
            match t.to_ascii_lowercase().as_str() {
                "yes" | "y" => return Ok(3),
                "maybe" | "m" => return Ok(2),
                "no" | "n" => return Ok(1),
                _ => {}
            }
        }
        let v: u8 = t
            .parse()
            .map_err(|_| format!("invalid {} rating `{t}`", self.as_str()))?;
        if v == 0 || v > self.max_value() {
            return Err(format!(
                "{} rating {v} outside 1..={}",
                self.as_str(),
                self.max_value()
            ));
        }
        Ok(v)
    }
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Question {
    type Err = ParseEnumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "relevance" => Ok(Question::Relevance),
            "faithfulness" => Ok(Question::Faithfulness),
            "realism" => Ok(Question::Realism),
            _ => Err(ParseEnumError {
                kind: "question",
                value: s.to_string(),
            }),
        }
    }
}

/// Three optional ratings of one item on one question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingTriple {
    pub item_id: String,
    pub question: Question,
    ratings: [Option<u8>; RATERS],
}

impl RatingTriple {
    pub fn new(
        item_id: impl Into<String>,
        question: Question,
        ratings: [Option<u8>; RATERS],
    ) -> Result<Self, StatsError> {
        for value in ratings.iter().flatten() {
            if *value == 0 || *value > question.max_value() {
                return Err(StatsError::OutOfScale {
                    question,
                    value: *value,
                });
            }
        }
        Ok(RatingTriple {
            item_id: item_id.into(),
            question,
            ratings,
        })
    }

    pub fn ratings(&self) -> [Option<u8>; RATERS] {
        self.ratings
    }

    pub fn present(&self) -> impl Iterator<Item = u8> + '_ {
        self.ratings.iter().flatten().copied()
    }

    pub fn present_count(&self) -> usize {
        self.ratings.iter().flatten().count()
    }

    pub fn has_majority(&self) -> bool {
        let r = &self.ratings;
        (0..RATERS).any(|i| r[i].is_some() && (i + 1..RATERS).any(|j| r[j] == r[i]))
    }
}

/// A labelled series of values keyed by group (for example per-country means).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub label: String,
    pub values: Vec<(String, f64)>,
}

impl MetricSeries {
    pub fn new(label: impl Into<String>, values: Vec<(String, f64)>) -> Self {
        MetricSeries {
            label: label.into(),
            values,
        }
    }

    /// Series keyed by position, for unlabeled data.
    pub fn from_values(label: impl Into<String>, values: &[f64]) -> Self {
        let values = values
            .iter()
            .enumerate()
            .map(|(i, v)| (i.to_string(), *v))
            .collect();
        MetricSeries::new(label, values)
    }
}

fn check_variance(label: &str, xs: &[f64]) -> Result<f64, StatsError> {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    if ss == 0.0 || !ss.is_finite() {
        return Err(StatsError::ZeroVariance(label.to_string()));
    }
    Ok(m)
}

/// Sample Pearson correlation of two equally long slices.
pub fn pearson_values(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooFewValues(x.len()));
    }
    let mx = check_variance("x", x)?;
    let my = check_variance("y", y)?;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson correlation of two series aligned on their group keys.
pub fn pearson(x: &MetricSeries, y: &MetricSeries) -> Result<f64, StatsError> {
    if x.values.len() != y.values.len() {
        return Err(StatsError::LengthMismatch(x.values.len(), y.values.len()));
    }
    let lookup: HashMap<&str, f64> = y.values.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let mut xs = Vec::with_capacity(x.values.len());
    let mut ys = Vec::with_capacity(x.values.len());
    for (key, v) in &x.values {
        let other = lookup
            .get(key.as_str())
            .ok_or_else(|| StatsError::KeyMismatch(key.clone()))?;
        xs.push(*v);
        ys.push(*other);
    }
    if xs.len() < 2 {
        return Err(StatsError::TooFewValues(xs.len()));
    }
    check_variance(&x.label, &xs)?;
    check_variance(&y.label, &ys)?;
    pearson_values(&xs, &ys)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsensusScore {
    pub mean: f64,
    /// Population standard deviation of the item means.
    pub std: f64,
    pub items: usize,
    /// Items with no present rating.
    pub excluded: usize,
}

/// Mean and spread of per-item mean ratings.
pub fn consensus_score(triples: &[RatingTriple]) -> Result<ConsensusScore, StatsError> {
    let means: Vec<f64> = triples
        .iter()
        .filter(|t| t.present_count() > 0)
        .map(|t| t.present().map(f64::from).sum::<f64>() / t.present_count() as f64)
        .collect();
    if means.is_empty() {
        return Err(StatsError::Empty);
    }
    let n = means.len() as f64;
    let mean = means.iter().sum::<f64>() / n;
    let std = (means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok(ConsensusScore {
        mean,
        std,
        items: means.len(),
        excluded: triples.len() - means.len(),
    })
}

/// Percentage of items where at least two raters gave the same rating.
pub fn majority_agreement(triples: &[RatingTriple]) -> Result<f64, StatsError> {
    if triples.is_empty() {
        return Err(StatsError::Empty);
    }
    let agreeing = triples.iter().filter(|t| t.has_majority()).count();
    Ok(100.0 * agreeing as f64 / triples.len() as f64)
}

/// Ordinal Krippendorff's α over all pairable ratings.
pub fn krippendorff_alpha_ordinal(triples: &[RatingTriple]) -> Result<f64, StatsError> {
    // Coincidence matrix indexed by rating value.
    let mut o: BTreeMap<(u8, u8), f64> = BTreeMap::new();
    for t in triples {
        let values: Vec<u8> = t.present().collect();
        let m = values.len();
        if m < 2 {
            continue;
        }
        let w = 1.0 / (m - 1) as f64;
        for (i, &c) in values.iter().enumerate() {
            for (j, &k) in values.iter().enumerate() {
                if i != j {
                    *o.entry((c, k)).or_default() += w;
                }
            }
        }
    }
    if o.is_empty() {
        return Err(StatsError::NoPairableValues);
    }
    let mut marginals: BTreeMap<u8, f64> = BTreeMap::new();
    for (&(c, _), &v) in &o {
        *marginals.entry(c).or_default() += v;
    }
    let values: Vec<u8> = marginals.keys().copied().collect();
    let n_of: Vec<f64> = values.iter().map(|v| marginals[v]).collect();
    let n: f64 = n_of.iter().sum();

    let mut prefix = vec![0.0; values.len() + 1];
    for (i, nv) in n_of.iter().enumerate() {
        prefix[i + 1] = prefix[i] + nv;
    }
    let delta2 = |a: usize, b: usize| -> f64 {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let d = prefix[hi + 1] - prefix[lo] - (n_of[lo] + n_of[hi]) / 2.0;
        d * d
    };

    let index: HashMap<u8, usize> = values.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let observed: f64 = o
        .iter()
        .map(|(&(c, k), &count)| count * delta2(index[&c], index[&k]))
        .sum();
    let mut expected = 0.0;
    for a in 0..values.len() {
        for b in 0..values.len() {
            expected += n_of[a] * n_of[b] * delta2(a, b);
        }
    }
    if expected == 0.0 {
        return Err(StatsError::NoVariation);
    }
    Ok(1.0 - (n - 1.0) * observed / expected)
}

/// Reads a ratings CSV with header `item_id,question,rater_index,value`.
///
/// Raters are numbered 1 to 3; an empty value is a missing rating. Triples
/// are returned in order of first appearance.
pub fn read_ratings<R: Read>(reader: R) -> Result<Vec<RatingTriple>, StatsError> {
    #[derive(Deserialize)]
    struct Row {
        item_id: String,
        question: String,
        rater_index: usize,
        value: Option<String>,
    }
    let input = |row: usize, message: String| StatsError::Input { row, message };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut order: Vec<(String, Question)> = Vec::new();
    let mut slots: HashMap<(String, Question), [Option<u8>; RATERS]> = HashMap::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, row) in rdr.deserialize::<Row>().enumerate() {
        let row_no = idx + 1;
        let row = row.map_err(|e| input(row_no, e.to_string()))?;
        let question: Question = row
            .question
            .parse()
            .map_err(|e| input(row_no, format!("{e}")))?;
        if !(1..=RATERS).contains(&row.rater_index) {
            return Err(input(
                row_no,
                format!("rater_index {} outside 1..=3", row.rater_index),
            ));
        }
        if !seen.insert((row.item_id.clone(), question, row.rater_index)) {
            return Err(input(
                row_no,
                format!(
                    "duplicate rating for item `{}` {question} rater {}",
                    row.item_id, row.rater_index
                ),
            ));
        }
        let value = match row.value.as_deref().map(str::trim) {
            None | Some("") => None,
            Some(text) => Some(question.parse_value(text).map_err(|e| input(row_no, e))?),
        };
        let key = (row.item_id, question);
        let slot = slots.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            [None; RATERS]
        });
        slot[row.rater_index - 1] = value;
    }
    order
        .into_iter()
        .map(|key| {
            let ratings = slots[&key];
            RatingTriple::new(key.0, key.1, ratings)
        })
        .collect()
}

/// Reads series from a CSV with header `series,key,value`, in order of first appearance.
pub fn read_series<R: Read>(reader: R) -> Result<Vec<MetricSeries>, StatsError> {
    #[derive(Deserialize)]
    struct Row {
        series: String,
        key: String,
        value: f64,
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out: Vec<MetricSeries> = Vec::new();
    for (idx, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| StatsError::Input {
            row: idx + 1,
            message: e.to_string(),
        })?;
        if !row.value.is_finite() {
            return Err(StatsError::Input {
                row: idx + 1,
                message: "non-finite value".into(),
            });
        }
        match out.iter_mut().find(|s| s.label == row.series) {
            Some(s) => {
                if s.values.iter().any(|(k, _)| *k == row.key) {
                    return Err(StatsError::Input {
                        row: idx + 1,
                        message: format!("duplicate key `{}` in series `{}`", row.key, row.series),
                    });
                }
                s.values.push((row.key, row.value));
            }
            None => out.push(MetricSeries::new(row.series, vec![(row.key, row.value)])),
        }
    }
    Ok(out)
}

/// A statistic that may be undefined on the given data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Maybe<T> {
    pub value: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl<T> From<Result<T, StatsError>> for Maybe<T> {
    fn from(r: Result<T, StatsError>) -> Self {
        match r {
            Ok(v) => Maybe {
                value: Some(v),
                reason: None,
            },
            Err(e) => Maybe {
                value: None,
                reason: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionSummary {
    pub question: Question,
    pub items: usize,
    /// Present only for 1 to 5 questions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consensus: Option<Maybe<ConsensusScore>>,
    pub majority_agreement: Maybe<f64>,
    pub krippendorff_alpha: Maybe<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub x: String,
    pub y: String,
    pub pearson: Maybe<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct StatsReport {
    pub questions: Vec<QuestionSummary>,
    pub correlations: Vec<Correlation>,
}

/// Per-question agreement statistics, in [`Question::ALL`] order, skipping absent questions.
pub fn summarize_ratings(triples: &[RatingTriple]) -> Vec<QuestionSummary> {
    Question::ALL
        .iter()
        .filter_map(|&q| {
            let subset: Vec<RatingTriple> = triples
                .iter()
                .filter(|t| t.question == q)
                .cloned()
                .collect();
            if subset.is_empty() {
                return None;
            }
            Some(QuestionSummary {
                question: q,
                items: subset.len(),
                consensus: q.is_likert().then(|| consensus_score(&subset).into()),
                majority_agreement: majority_agreement(&subset).into(),
                krippendorff_alpha: krippendorff_alpha_ordinal(&subset).into(),
            })
        })
        .collect()
}

/// Pearson correlation for every unordered pair of series.
pub fn correlate_all(series: &[MetricSeries]) -> Vec<Correlation> {
    let mut out = Vec::new();
    for (i, x) in series.iter().enumerate() {
        for y in &series[i + 1..] {
            out.push(Correlation {
                x: x.label.clone(),
                y: y.label.clone(),
                pearson: pearson(x, y).into(),
            });
        }
    }
    out
}
