//! Reference models and metrics checked against straightforward
//! re-implementations written only from their definitions.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use uidobf::attribute::{BinaryLabel, DetectorClient, StubDetector};
use uidobf::corpus::{read_corpus, sentence_spans, word_tokenize};
use uidobf::evaluate::{accuracy, f1, precision, recall, ConfusionMatrix};
use uidobf::scorer::{scorer_tokens, BigramScorer, CausalScorer, MaskedPredictor, SlotFrequencyPredictor};
use uidobf::uid::{uid_scores, variance};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");

fn fixture_texts() -> Vec<String> {
    read_corpus(format!("{FIXTURES}/corpus20.jsonl"))
        .unwrap()
        .articles
        .into_iter()
        .map(|a| a.text)
        .collect()
}

/// Add-one bigram log-probabilities computed from raw string counts.
struct NaiveBigram {
    unigram: BTreeMap<String, f64>,
    pair: BTreeMap<(String, String), f64>,
    out: BTreeMap<String, f64>,
    n: f64,
    v: f64,
}

impl NaiveBigram {
    fn new(texts: &[String]) -> Self {
        let mut unigram = BTreeMap::new();
        let mut pair = BTreeMap::new();
        let mut out = BTreeMap::new();
        let mut n = 0.0;
        for t in texts {
            let toks = scorer_tokens(t);
            for w in &toks {
                *unigram.entry(w.clone()).or_insert(0.0) += 1.0;
                n += 1.0;
            }
            for w in toks.windows(2) {
                *pair.entry((w[0].clone(), w[1].clone())).or_insert(0.0) += 1.0;
                *out.entry(w[0].clone()).or_insert(0.0) += 1.0;
            }
        }
        let v = unigram.len() as f64 + 1.0;
        NaiveBigram { unigram, pair, out, n, v }
    }

    fn surprisals(&self, text: &str) -> Vec<f64> {
        let toks = scorer_tokens(text);
        let known = |w: &String| self.unigram.contains_key(w);
        let mut s = Vec::new();
        for (i, w) in toks.iter().enumerate() {
            let p = if i == 0 {
                let c = if known(w) { self.unigram[w] } else { 0.0 };
                (c + 1.0) / (self.n + self.v)
            } else {
                let prev = &toks[i - 1];
                // unknown words share one slot, so their pair counts are pooled
                let c = if known(prev) && known(w) {
                    self.pair.get(&(prev.clone(), w.clone())).copied().unwrap_or(0.0)
                } else {
                    0.0
                };
                let denom = if known(prev) { self.out.get(prev).copied().unwrap_or(0.0) } else { 0.0 };
                (c + 1.0) / (denom + self.v)
            };
            s.push(-p.ln());
        }
        s
    }
}

#[test]
fn bigram_matches_naive_counts() {
    let texts = fixture_texts();
    let model = BigramScorer::fit(texts.iter().map(String::as_str));
    let oracle = NaiveBigram::new(&texts);
    assert_eq!(model.vocab_size() as f64, oracle.v);
    let probes = [
        texts[3].clone(),
        texts[14].clone(),
        "The zebra council approved a wholly unseen plan.".to_string(),
    ];
    for text in &probes {
        let got = model.surprisals(text).unwrap().values();
        let want = oracle.surprisals(text);
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12, "{g} vs {w}");
        }
        assert!((model.log_joint(text) + want.iter().sum::<f64>()).abs() < 1e-9);
    }
}

#[test]
fn bigram_hand_computed() {
    // tokens: a b a c | stream of 4; vocab {a, b, c} + unk => V = 4, N = 4
    let model = BigramScorer::fit(["a b a c"]);
    let s = model.surprisals("a b x").unwrap().values();
    // a: (2+1)/(4+4); b|a: (1+1)/(2+4); x|b: (0+1)/(1+4)
    let want = [-(3.0f64 / 8.0).ln(), -(2.0f64 / 6.0).ln(), -(1.0f64 / 5.0).ln()];
    for (g, w) in s.iter().zip(want) {
        assert!((g - w).abs() < 1e-12);
    }
    // prefix context is its last token
    let lp = model.word_logprob("we saw a", "c").unwrap();
    assert!((lp - (2.0f64 / 6.0).ln()).abs() < 1e-12);
}

#[test]
fn slot_predictor_matches_brute_force() {
    let texts = fixture_texts();
    let model = SlotFrequencyPredictor::fit(texts.iter().map(String::as_str));
    let sentences: Vec<Vec<String>> = texts
        .iter()
        .flat_map(|t| {
            sentence_spans(t)
                .into_iter()
                .map(|(s, e)| word_tokenize(&t[s..e]).into_iter().map(str::to_lowercase).collect())
                .collect::<Vec<Vec<String>>>()
        })
        .collect();
    let is_word = |w: &str| w.chars().all(char::is_alphabetic);
    let mut unigram: BTreeMap<&str, f64> = BTreeMap::new();
    for s in &sentences {
        for w in s.iter().filter(|w| is_word(w)) {
            *unigram.entry(w).or_insert(0.0) += 1.0;
        }
    }
    let total: f64 = unigram.values().sum();

    let probe: Vec<String> = "The committee [MASK] the housing proposal".split(' ').map(str::to_string).collect();
    let (left, right) = ("committee", "the");
    let mut expected: Vec<(String, f64)> = unigram
        .iter()
        .map(|(w, c)| {
            let slot = sentences
                .iter()
                .flat_map(|s| (1..s.len().saturating_sub(1)).map(move |i| (&s[i - 1], &s[i], &s[i + 1])))
                .filter(|(l, m, r)| l.as_str() == left && m.as_str() == *w && r.as_str() == right)
                .count() as f64;
            (w.to_string(), slot + c / (total + 1.0))
        })
        .collect();
    expected.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let got = model.fills(&probe, 2, 10).unwrap();
    let got: Vec<(String, f64)> = got.into_iter().map(|c| (c.word, c.score)).collect();
    assert_eq!(got.len(), 10);
    for (g, w) in got.iter().zip(&expected) {
        assert_eq!(g.0, w.0);
        assert!((g.1 - w.1).abs() < 1e-12);
    }
    // the slot was seen in the corpus, so its best fill has a whole count
    assert!(got[0].1 >= 1.0);
}

#[test]
fn stub_detector_follows_mean_surprisal() {
    let texts = fixture_texts();
    let scorer: Arc<dyn CausalScorer> = Arc::new(BigramScorer::fit(texts.iter().map(String::as_str)));
    let oracle = NaiveBigram::new(&texts);
    let mean = |t: &str| {
        let s = oracle.surprisals(t);
        s.iter().sum::<f64>() / s.len() as f64
    };
    let tau = 2.9;
    let det = StubDetector::new(scorer.clone(), tau, 0.25);
    for t in &texts {
        let m = mean(t);
        let p = det.detect(t).unwrap().probability;
        assert_eq!(BinaryLabel::from_probability(p) == BinaryLabel::Machine, m <= tau, "mean {m}");
        assert!((p - 1.0 / (1.0 + ((m - tau) / 0.25).exp())).abs() < 1e-12);
    }

    let calibrated = StubDetector::calibrated(scorer, texts.iter().map(String::as_str), 0.25).unwrap();
    let mut means: Vec<f64> = texts.iter().map(|t| mean(t)).collect();
    means.sort_by(f64::total_cmp);
    let median = (means[9] + means[10]) / 2.0;
    assert!((calibrated.tau() - median).abs() < 1e-12);
}

#[test]
fn uid_scores_from_oracle_surprisals() {
    let texts = fixture_texts();
    let model = BigramScorer::fit(texts.iter().map(String::as_str));
    let oracle = NaiveBigram::new(&texts);
    let s = oracle.surprisals(&texts[0]);
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let var = s.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let d2 = s.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum::<f64>() / (n - 1.0);
    let got = uid_scores(&texts[0], &model).unwrap();
    assert!((got.variance - var).abs() < 1e-9);
    assert!((got.diff_squared - d2).abs() < 1e-9);
    assert_eq!(got.token_count, s.len());
    assert!((variance(&s).unwrap() - var).abs() < 1e-12);
}

#[test]
fn reference_matrices() {
    // (tp, fn, fp, tn) and expected accuracy
    let cases = [((4, 96, 2, 98), 0.51), ((2, 98, 0, 100), 0.51), ((8, 92, 0, 100), 0.54), ((0, 100, 0, 100), 0.50)];
    for ((tp, fn_, fp, tn), expected) in cases {
        let m = ConfusionMatrix::new(tp, fn_, fp, tn);
        let acc = accuracy(&m).unwrap();
        assert!((acc - expected).abs() < 1e-12, "{acc} vs {expected}");
        let p = tp as f64 / (tp + fp).max(1) as f64;
        let r = tp as f64 / (tp + fn_) as f64;
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        assert!((f1(&m, BinaryLabel::Machine).value - f).abs() < 1e-12);
        assert_eq!(precision(&m, BinaryLabel::Machine).undefined, tp + fp == 0);
        assert!((recall(&m, BinaryLabel::Machine).value - r).abs() < 1e-12);
    }
    let f = f1(&ConfusionMatrix::new(4, 96, 2, 98), BinaryLabel::Machine).value;
    assert!((f - 0.0754716981).abs() < 1e-9);
}

#[test]
fn vocabulary_is_deterministic() {
    let texts = fixture_texts();
    let a: BTreeSet<String> = texts.iter().flat_map(|t| scorer_tokens(t)).collect();
    let model = BigramScorer::fit(texts.iter().map(String::as_str));
    assert_eq!(model.vocab_size(), a.len() + 1);
}
