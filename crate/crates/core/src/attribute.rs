//! Detector clients and verdict labelling.

use std::fmt;
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ScorerError};
use crate::scorer::{causal_surprisals, CausalScorer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinaryLabel {
    Human,
    Machine,
}

impl BinaryLabel {
    pub fn from_probability(p: f64) -> Self {
        if p >= 0.5 {
            BinaryLabel::Machine
        } else {
            BinaryLabel::Human
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BinaryLabel::Human => "human",
            BinaryLabel::Machine => "machine",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiveWay {
    VeryUnlikely,
    Unlikely,
    Unclear,
    Possibly,
    Likely,
}

impl FiveWay {
    pub const ALL: [FiveWay; 5] = [
        FiveWay::VeryUnlikely,
        FiveWay::Unlikely,
        FiveWay::Unclear,
        FiveWay::Possibly,
        FiveWay::Likely,
    ];

    /// Lower bounds of the bands, inclusive; the last band also includes 1.0.
    pub const LOWER_BOUNDS: [f64; 5] = [0.0, 0.10, 0.35, 0.65, 0.90];

    pub fn from_probability(p: f64) -> Self {
        let idx = Self::LOWER_BOUNDS
            .iter()
            .rposition(|&lo| p >= lo)
            .unwrap_or(0);
        Self::ALL[idx]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FiveWay::VeryUnlikely => "very_unlikely",
            FiveWay::Unlikely => "unlikely",
            FiveWay::Unclear => "unclear",
            FiveWay::Possibly => "possibly",
            FiveWay::Likely => "likely",
        }
    }
}

/// Which text of an article a verdict refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantKind {
    Original,
    SelectedVariance,
    SelectedDiff2,
    /// Single-output methods (synonym swap) have no selection stage.
    Obfuscated,
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VariantKind::Original => "original",
            VariantKind::SelectedVariance => "selected_variance",
            VariantKind::SelectedDiff2 => "selected_diff2",
            VariantKind::Obfuscated => "obfuscated",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributionResult {
    pub article_id: String,
    pub variant: VariantKind,
    pub detector: String,
    pub machine_probability: f64,
    pub binary_label: BinaryLabel,
    pub five_way: FiveWay,
}

/// Raw verdict from a detector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Detection {
    pub probability: f64,
}

pub trait DetectorClient: Send + Sync {
    fn name(&self) -> &str;

    fn detect(&self, text: &str) -> std::result::Result<Detection, ScorerError>;

    fn is_concurrent(&self) -> bool {
        true
    }
}

/// Thresholds mean surprisal under a causal scorer: text whose mean
/// surprisal is below `tau` is called machine-written. The probability is a
/// logistic in `(tau - mean) / scale`, so it crosses 0.5 exactly at `tau`.
pub struct StubDetector {
    name: String,
    scorer: Arc<dyn CausalScorer>,
    tau: f64,
    scale: f64,
}

impl StubDetector {
    pub fn new(scorer: Arc<dyn CausalScorer>, tau: f64, scale: f64) -> Self {
        StubDetector {
            name: "stub".into(),
            scorer,
            tau,
            scale,
        }
    }

    /// Put `tau` at the median mean surprisal of `texts`, so roughly half
    /// of them fall on each side.
    pub fn calibrated<'a>(
        scorer: Arc<dyn CausalScorer>,
        texts: impl IntoIterator<Item = &'a str>,
        scale: f64,
    ) -> Result<Self> {
        let mut probe = StubDetector::new(scorer, 0.0, scale);
        let mut means = texts
            .into_iter()
            .map(|t| probe.mean_surprisal(t))
            .collect::<Result<Vec<f64>>>()?;
        if means.is_empty() {
            return Err(Error::Argument("cannot calibrate on no texts".into()));
        }
        means.sort_by(f64::total_cmp);
        let mid = means.len() / 2;
        probe.tau = if means.len() % 2 == 1 {
            means[mid]
        } else {
            (means[mid - 1] + means[mid]) / 2.0
        };
        Ok(probe)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn mean_surprisal(&self, text: &str) -> Result<f64> {
        let seq = causal_surprisals(text, self.scorer.as_ref())?;
        if seq.is_empty() {
            return Err(Error::Argument("text has no scorer tokens".into()));
        }
        Ok(seq.total() / seq.len() as f64)
    }
}

impl DetectorClient for StubDetector {
    fn name(&self) -> &str {
        &self.name
    }

    fn detect(&self, text: &str) -> std::result::Result<Detection, ScorerError> {
        let mean = self
            .mean_surprisal(text)
            .map_err(|e| ScorerError::Protocol(e.to_string()))?;
        let z = (self.tau - mean) / self.scale;
        Ok(Detection {
            probability: 1.0 / (1.0 + (-z).exp()),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: usize,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            base_delay: Duration::from_millis(200),
        }
    }
}

impl RetryPolicy {
    pub fn immediate() -> Self {
        RetryPolicy {
            attempts: 3,
            base_delay: Duration::ZERO,
        }
    }
}

/// Query `detector` once for `text`, retrying transport failures with
/// exponential backoff.
pub fn classify(
    article_id: &str,
    variant: VariantKind,
    text: &str,
    detector: &dyn DetectorClient,
    retry: &RetryPolicy,
) -> Result<AttributionResult> {
    let mut attempt = 0;
    loop {
        attempt += 1;
        match detector.detect(text) {
            Ok(d) => {
                let p = d.probability;
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Detector {
                        attempts: attempt,
                        source: ScorerError::Protocol(format!("probability {p} outside [0, 1]")),
                    });
                }
                return Ok(AttributionResult {
                    article_id: article_id.to_string(),
                    variant,
                    detector: detector.name().to_string(),
                    machine_probability: p,
                    binary_label: BinaryLabel::from_probability(p),
                    five_way: FiveWay::from_probability(p),
                });
            }
            Err(ScorerError::Transport(msg)) if attempt < retry.attempts => {
                let delay = retry.base_delay * 2u32.pow(attempt as u32 - 1);
                log::warn!("detector {} transport failure ({msg}); retrying in {delay:?}", detector.name());
                thread::sleep(delay);
            }
            Err(source) => {
                return Err(Error::Detector {
                    attempts: attempt,
                    source,
                })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyItem {
    pub article_id: String,
    pub variant: VariantKind,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyFailure {
    pub article_id: String,
    pub variant: VariantKind,
    pub detector: String,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BatchOutcome {
    pub results: Vec<AttributionResult>,
    pub failures: Vec<ClassifyFailure>,
}

/// Classify every item; order follows the input, failures are collected
/// rather than aborting the batch.
pub fn classify_batch(
    items: &[ClassifyItem],
    detector: &dyn DetectorClient,
    retry: &RetryPolicy,
) -> BatchOutcome {
    let run = |item: &ClassifyItem| classify(&item.article_id, item.variant, &item.text, detector, retry);
    let outcomes: Vec<Result<AttributionResult>> = if detector.is_concurrent() {
        items.par_iter().map(run).collect()
    } else {
        items.iter().map(run).collect()
    };
    let mut batch = BatchOutcome::default();
    for (item, outcome) in items.iter().zip(outcomes) {
        match outcome {
            Ok(r) => batch.results.push(r),
            Err(e) => batch.failures.push(ClassifyFailure {
                article_id: item.article_id.clone(),
                variant: item.variant,
                detector: detector.name().to_string(),
                error: e.to_string(),
            }),
        }
    }
    batch
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn band_boundaries() {
        assert_eq!(FiveWay::from_probability(0.0), FiveWay::VeryUnlikely);
        assert_eq!(FiveWay::from_probability(0.0999), FiveWay::VeryUnlikely);
        assert_eq!(FiveWay::from_probability(0.10), FiveWay::Unlikely);
        assert_eq!(FiveWay::from_probability(0.35), FiveWay::Unclear);
        assert_eq!(FiveWay::from_probability(0.65), FiveWay::Possibly);
        assert_eq!(FiveWay::from_probability(0.90), FiveWay::Likely);
        assert_eq!(FiveWay::from_probability(1.0), FiveWay::Likely);
        assert_eq!(BinaryLabel::from_probability(0.5), BinaryLabel::Machine);
        assert_eq!(BinaryLabel::from_probability(0.4999), BinaryLabel::Human);
    }

    struct Fixed(f64);

    impl DetectorClient for Fixed {
        fn name(&self) -> &str {
            "fixed"
        }
        fn detect(&self, _: &str) -> std::result::Result<Detection, ScorerError> {
            Ok(Detection { probability: self.0 })
        }
    }

    #[test]
    fn probability_extremes() {
        let r = classify("a", VariantKind::Original, "x", &Fixed(0.0), &RetryPolicy::immediate()).unwrap();
        assert_eq!((r.binary_label, r.five_way), (BinaryLabel::Human, FiveWay::VeryUnlikely));
        let r = classify("a", VariantKind::Original, "x", &Fixed(1.0), &RetryPolicy::immediate()).unwrap();
        assert_eq!((r.binary_label, r.five_way), (BinaryLabel::Machine, FiveWay::Likely));
        assert!(classify("a", VariantKind::Original, "x", &Fixed(1.5), &RetryPolicy::immediate()).is_err());
    }

    struct Flaky {
        calls: AtomicUsize,
        fail_first: usize,
    }

    impl DetectorClient for Flaky {
        fn name(&self) -> &str {
            "flaky"
        }
        fn detect(&self, _: &str) -> std::result::Result<Detection, ScorerError> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst);
            if n < self.fail_first {
                Err(ScorerError::Transport("connection reset".into()))
            } else {
                Ok(Detection { probability: 0.7 })
            }
        }
        fn is_concurrent(&self) -> bool {
            false
        }
    }

    #[test]
    fn retries_transport_failures_three_times() {
        let d = Flaky { calls: AtomicUsize::new(0), fail_first: 2 };
        assert!(classify("a", VariantKind::Original, "x", &d, &RetryPolicy::immediate()).is_ok());
        assert_eq!(d.calls.load(Ordering::SeqCst), 3);

        let d = Flaky { calls: AtomicUsize::new(0), fail_first: 3 };
        let err = classify("a", VariantKind::Original, "x", &d, &RetryPolicy::immediate()).unwrap_err();
        assert!(matches!(err, Error::Detector { attempts: 3, source: ScorerError::Transport(_) }));
        assert_eq!(d.calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn batch_records_failures() {
        let d = Flaky { calls: AtomicUsize::new(0), fail_first: 3 };
        let items: Vec<ClassifyItem> = ["a", "b"]
            .iter()
            .map(|id| ClassifyItem {
                article_id: id.to_string(),
                variant: VariantKind::Original,
                text: "x".into(),
            })
            .collect();
        let out = classify_batch(&items, &d, &RetryPolicy::immediate());
        assert_eq!(out.results.len(), 1);
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].article_id, "a");
        assert_eq!(out.results[0].article_id, "b");
        assert!(classify_batch(&[], &d, &RetryPolicy::immediate()).results.is_empty());
    }
}
