//! Confusion matrices, classification metrics, label-shift histograms and
//! scatter data. The positive class is `machine` throughout.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::attribute::{AttributionResult, BinaryLabel, FiveWay};
use crate::corpus::AuthorLabel;
use crate::error::{Error, Result};
use crate::obfuscate::AlternateSet;
use crate::select::SelectionResult;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fn_: u64, fp: u64, tn: u64) -> Self {
        ConfusionMatrix { tp, fn_, fp, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }

    pub fn record(&mut self, truth: BinaryLabel, predicted: BinaryLabel) {
        match (truth, predicted) {
            (BinaryLabel::Machine, BinaryLabel::Machine) => self.tp += 1,
            (BinaryLabel::Machine, BinaryLabel::Human) => self.fn_ += 1,
            (BinaryLabel::Human, BinaryLabel::Machine) => self.fp += 1,
            (BinaryLabel::Human, BinaryLabel::Human) => self.tn += 1,
        }
    }
}

pub fn truth_class(label: &AuthorLabel) -> BinaryLabel {
    if label.is_machine() {
        BinaryLabel::Machine
    } else {
        BinaryLabel::Human
    }
}

fn truth_of<'a>(truths: &'a HashMap<String, AuthorLabel>, id: &str) -> Result<&'a AuthorLabel> {
    truths
        .get(id)
        .ok_or_else(|| Error::Evaluation(format!("no ground truth for article {id:?}")))
}

pub fn confusion(results: &[AttributionResult], truths: &HashMap<String, AuthorLabel>) -> Result<ConfusionMatrix> {
    let mut m = ConfusionMatrix::default();
    for r in results {
        let truth = truth_of(truths, &r.article_id)?;
        m.record(truth_class(truth), r.binary_label);
    }
    Ok(m)
}

/// A ratio that may be undefined (zero denominator); undefined values are
/// reported as 0 with the flag set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub value: f64,
    pub undefined: bool,
}

impl Ratio {
    fn of(num: u64, den: u64) -> Self {
        if den == 0 {
            Ratio {
                value: 0.0,
                undefined: true,
            }
        } else {
            Ratio {
                value: num as f64 / den as f64,
                undefined: false,
            }
        }
    }
}

pub fn accuracy(m: &ConfusionMatrix) -> Result<f64> {
    if m.total() == 0 {
        return Err(Error::Evaluation("accuracy of an empty confusion matrix".into()));
    }
    Ok((m.tp + m.tn) as f64 / m.total() as f64)
}

/// (tp, fp, fn) from the point of view of `class`.
fn counts_for(m: &ConfusionMatrix, class: BinaryLabel) -> (u64, u64, u64) {
    match class {
        BinaryLabel::Machine => (m.tp, m.fp, m.fn_),
        BinaryLabel::Human => (m.tn, m.fn_, m.fp),
    }
}

pub fn precision(m: &ConfusionMatrix, class: BinaryLabel) -> Ratio {
    let (tp, fp, _) = counts_for(m, class);
    Ratio::of(tp, tp + fp)
}

pub fn recall(m: &ConfusionMatrix, class: BinaryLabel) -> Ratio {
    let (tp, _, fn_) = counts_for(m, class);
    Ratio::of(tp, tp + fn_)
}

/// `2tp / (2tp + fp + fn)`, which equals the harmonic mean of precision and
/// recall whenever both are defined.
pub fn f1(m: &ConfusionMatrix, class: BinaryLabel) -> Ratio {
    let (tp, fp, fn_) = counts_for(m, class);
    Ratio::of(2 * tp, 2 * tp + fp + fn_)
}

pub fn macro_f1(m: &ConfusionMatrix) -> Ratio {
    let a = f1(m, BinaryLabel::Machine);
    let b = f1(m, BinaryLabel::Human);
    Ratio {
        value: (a.value + b.value) / 2.0,
        undefined: a.undefined || b.undefined,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: Ratio,
    pub recall: Ratio,
    pub f1: Ratio,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub matrix: ConfusionMatrix,
    pub accuracy: f64,
    pub machine: ClassMetrics,
    pub human: ClassMetrics,
    pub macro_f1: Ratio,
}

pub fn metrics(m: &ConfusionMatrix) -> Result<MetricsReport> {
    let class = |c| ClassMetrics {
        precision: precision(m, c),
        recall: recall(m, c),
        f1: f1(m, c),
    };
    Ok(MetricsReport {
        matrix: *m,
        accuracy: accuracy(m)?,
        machine: class(BinaryLabel::Machine),
        human: class(BinaryLabel::Human),
        macro_f1: macro_f1(m),
    })
}

/// Five-way label counts before and after obfuscation for one truth class.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftHistogram {
    pub before: BTreeMap<FiveWay, u64>,
    pub after: BTreeMap<FiveWay, u64>,
}

impl ShiftHistogram {
    fn zeroed() -> Self {
        let zeros: BTreeMap<FiveWay, u64> = FiveWay::ALL.iter().map(|&l| (l, 0)).collect();
        ShiftHistogram {
            before: zeros.clone(),
            after: zeros,
        }
    }

    pub fn delta(&self, label: FiveWay) -> i64 {
        self.after.get(&label).copied().unwrap_or(0) as i64
            - self.before.get(&label).copied().unwrap_or(0) as i64
    }
}

/// Label histograms keyed by truth class (`human` / `machine`).
pub type LabelShift = BTreeMap<BinaryLabel, ShiftHistogram>;

/// Pair `before` and `after` verdicts by article id and tally five-way
/// labels per truth class. Both sides must cover the same articles.
pub fn label_shift(
    before: &[AttributionResult],
    after: &[AttributionResult],
    truths: &HashMap<String, AuthorLabel>,
) -> Result<LabelShift> {
    let index = |rs: &[AttributionResult]| -> Result<BTreeMap<String, FiveWay>> {
        let mut map = BTreeMap::new();
        for r in rs {
            if map.insert(r.article_id.clone(), r.five_way).is_some() {
                return Err(Error::Evaluation(format!("article {:?} appears twice", r.article_id)));
            }
        }
        Ok(map)
    };
    let b = index(before)?;
    let a = index(after)?;
    if !b.keys().eq(a.keys()) {
        return Err(Error::Evaluation("before/after verdicts cover different articles".into()));
    }
    let mut shift = LabelShift::new();
    for (id, label_before) in &b {
        let truth = truth_class(truth_of(truths, id)?);
        let h = shift.entry(truth).or_insert_with(ShiftHistogram::zeroed);
        *h.before.get_mut(label_before).unwrap() += 1;
        *h.after.get_mut(&a[id]).unwrap() += 1;
    }
    Ok(shift)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointFlag {
    Original,
    Selected,
    Candidate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    /// `None` for the original.
    pub variant_index: Option<usize>,
    pub similarity: f64,
    pub uid: f64,
    pub flag: PointFlag,
}

/// Similarity (x) against the selection's UID metric (y): the original at
/// similarity 1.0 followed by one point per alternate.
pub fn scatter_dataset(set: &AlternateSet, selection: &SelectionResult) -> Vec<ScatterPoint> {
    let metric = selection.metric;
    let mut points = vec![ScatterPoint {
        variant_index: None,
        similarity: 1.0,
        uid: metric.of(&set.original_uid),
        flag: PointFlag::Original,
    }];
    points.extend(set.variants.iter().map(|v| ScatterPoint {
        variant_index: Some(v.index),
        similarity: v.similarity,
        uid: metric.of(&v.uid),
        flag: if selection.chosen_variant_index == Some(v.index) {
            PointFlag::Selected
        } else {
            PointFlag::Candidate
        },
    }));
    points
}
