//! Candidate selection: the alternate furthest from the original in UID
//! terms that still clears the similarity threshold.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::obfuscate::AlternateSet;
use crate::uid::UidScores;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Variance,
    DiffSquared,
}

impl Metric {
    pub const BOTH: [Metric; 2] = [Metric::Variance, Metric::DiffSquared];

    pub fn of(self, scores: &UidScores) -> f64 {
        match self {
            Metric::Variance => scores.variance,
            Metric::DiffSquared => scores.diff_squared,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Variance => "variance",
            Metric::DiffSquared => "diff_squared",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "variance" => Ok(Metric::Variance),
            "diff_squared" | "diff2" | "difference2" => Ok(Metric::DiffSquared),
            other => Err(Error::Config(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub article_id: String,
    pub metric: Metric,
    pub chosen_variant_index: Option<usize>,
    pub chosen_similarity: f64,
    pub chosen_uid_delta: f64,
    pub fallback: bool,
}

/// Variant indices ordered by `|metric(variant) - metric(original)|`
/// descending, ties by index ascending.
pub fn rank_by_delta(set: &AlternateSet, metric: Metric) -> Vec<(usize, f64)> {
    let base = metric.of(&set.original_uid);
    let mut ranked: Vec<(usize, f64)> = set
        .variants
        .iter()
        .enumerate()
        .map(|(i, v)| (i, (metric.of(&v.uid) - base).abs()))
        .collect();
    // stable: equal deltas keep ascending index order
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    ranked
}

pub fn select_candidate(set: &AlternateSet, metric: Metric, threshold: f64) -> SelectionResult {
    let chosen = rank_by_delta(set, metric)
        .into_iter()
        .find(|&(i, _)| set.variants[i].similarity >= threshold);
    match chosen {
        Some((i, delta)) => SelectionResult {
            article_id: set.article_id.clone(),
            metric,
            chosen_variant_index: Some(set.variants[i].index),
            chosen_similarity: set.variants[i].similarity,
            chosen_uid_delta: delta,
            fallback: false,
        },
        None => SelectionResult {
            article_id: set.article_id.clone(),
            metric,
            chosen_variant_index: None,
            chosen_similarity: 1.0,
            chosen_uid_delta: 0.0,
            fallback: true,
        },
    }
}

/// Independent selections for variance and difference².
pub fn select_both_metrics(set: &AlternateSet, threshold: f64) -> (SelectionResult, SelectionResult) {
    (
        select_candidate(set, Metric::Variance, threshold),
        select_candidate(set, Metric::DiffSquared, threshold),
    )
}

/// Similarity floors per method.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub uws: f64,
    pub up: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { uws: 0.98, up: 0.85 }
    }
}
