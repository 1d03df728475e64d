//! Uniform-information-density scores of a surprisal sequence.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scorer::{causal_surprisals, CausalScorer, SurprisalSequence};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UidScores {
    /// Population variance of the surprisals (nats²).
    pub variance: f64,
    /// Mean squared difference of consecutive surprisals (nats²).
    pub diff_squared: f64,
    pub token_count: usize,
}

pub fn variance(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Argument("variance of an empty sequence".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Ok(values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n)
}

pub fn diff_squared(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::Argument(format!(
            "difference² needs at least 2 values, got {}",
            values.len()
        )));
    }
    let sum: f64 = values.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Ok(sum / (values.len() - 1) as f64)
}

pub fn uid_variance(seq: &SurprisalSequence) -> Result<f64> {
    variance(&seq.values())
}

pub fn uid_diff_squared(seq: &SurprisalSequence) -> Result<f64> {
    diff_squared(&seq.values())
}

pub fn scores_from_sequence(seq: &SurprisalSequence) -> Result<UidScores> {
    let values = seq.values();
    Ok(UidScores {
        diff_squared: diff_squared(&values)?,
        variance: variance(&values)?,
        token_count: values.len(),
    })
}

/// Both metrics from a single surprisal pass over `text`.
pub fn uid_scores(text: &str, scorer: &dyn CausalScorer) -> Result<UidScores> {
    let seq = causal_surprisals(text, scorer)?;
    scores_from_sequence(&seq)
}

/// One row of the score export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub article_id: String,
    /// `-1` for the original article.
    pub variant_index: i64,
    pub variance: f64,
    pub diff_squared: f64,
    pub token_count: usize,
}

pub fn write_scores_csv<W: Write>(out: W, rows: &[ScoreRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
