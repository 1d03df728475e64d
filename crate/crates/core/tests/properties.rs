use proptest::prelude::*;

use uidobf::attribute::{BinaryLabel, FiveWay};
use uidobf::corpus::{parse_corpus, segment, word_tokenize, Article, AuthorLabel};
use uidobf::evaluate::{accuracy, f1, ConfusionMatrix};
use uidobf::obfuscate::{AlternateSet, Method, ScoredVariant};
use uidobf::select::{select_candidate, Metric};
use uidobf::similarity::{cosine_similarity, vectorize};
use uidobf::uid::{diff_squared, variance, UidScores};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

fn surprisals() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..20.0, 2..60)
}

proptest! {
    #[test]
    fn uid_shift_invariant(xs in surprisals(), c in -5.0f64..5.0) {
        let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
        prop_assert!(close(variance(&xs).unwrap(), variance(&shifted).unwrap()));
        prop_assert!(close(diff_squared(&xs).unwrap(), diff_squared(&shifted).unwrap()));
    }

    #[test]
    fn uid_scale_law(xs in surprisals(), c in 0.1f64..4.0) {
        let scaled: Vec<f64> = xs.iter().map(|x| x * c).collect();
        prop_assert!(close(variance(&scaled).unwrap(), c * c * variance(&xs).unwrap()));
        prop_assert!(close(diff_squared(&scaled).unwrap(), c * c * diff_squared(&xs).unwrap()));
    }

    #[test]
    fn uid_non_negative(xs in surprisals()) {
        prop_assert!(variance(&xs).unwrap() >= 0.0);
        prop_assert!(diff_squared(&xs).unwrap() >= 0.0);
    }

    #[test]
    fn variance_ignores_order(mut xs in surprisals(), seed in any::<u64>()) {
        let before = variance(&xs).unwrap();
        let n = xs.len();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            xs.swap(i, (s >> 33) as usize % (i + 1));
        }
        prop_assert!(close(before, variance(&xs).unwrap()));
    }

    #[test]
    fn cosine_symmetric_and_bounded(a in "[a-e ]{0,40}", b in "[a-e ]{0,40}") {
        let ab = cosine_similarity(&a, &b);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!(close(ab, cosine_similarity(&b, &a)));
        if !vectorize(&a).is_empty() {
            prop_assert!(close(cosine_similarity(&a, &a), 1.0));
        }
    }

    #[test]
    fn segmentation_reconstructs_text(text in "[A-Za-z ,.!?'\"\n-]{1,200}") {
        prop_assume!(!text.trim().is_empty());
        let seg = segment(&Article::new("p", AuthorLabel::Human, text.clone()));
        prop_assert!(!seg.sentences.is_empty());
        prop_assert_eq!(seg.compose(&seg.sentence_texts()), text.clone());
        let mut last_end = 0;
        for s in &seg.sentences {
            prop_assert!(s.start >= last_end && s.end > s.start);
            for t in &s.tokens {
                prop_assert_eq!(&text[t.start..t.end], t.text.as_str());
                prop_assert!(t.start >= last_end);
                last_end = t.end;
            }
        }
        for s in &seg.sentences {
            prop_assert_eq!(
                word_tokenize(&text[s.start..s.end]),
                s.tokens.iter().map(|t| t.text.as_str()).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn corpus_round_trips(texts in prop::collection::vec("[a-z]{1,8}( [a-z]{1,8}){0,6}\\.", 1..12)) {
        let articles: Vec<Article> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let label = if i % 2 == 0 { AuthorLabel::Human } else { AuthorLabel::Machine("gpt3".into()) };
                Article::new(format!("a{i:03}"), label, t.clone())
            })
            .collect();
        let body: String = articles.iter().map(|a| serde_json::to_string(a).unwrap() + "\n").collect();
        prop_assert_eq!(parse_corpus(&body).unwrap().articles, articles);
    }

    #[test]
    fn bands_partition_unit_interval(p in 0.0f64..=1.0) {
        let band = FiveWay::from_probability(p);
        let i = FiveWay::ALL.iter().position(|&b| b == band).unwrap();
        let lo = FiveWay::LOWER_BOUNDS[i];
        let hi = FiveWay::LOWER_BOUNDS.get(i + 1).copied().unwrap_or(f64::INFINITY);
        prop_assert!(lo <= p && p < hi);
        prop_assert_eq!(BinaryLabel::from_probability(p) == BinaryLabel::Machine, p >= 0.5);
    }

    #[test]
    fn metrics_in_unit_range(tp in 0u64..50, fn_ in 0u64..50, fp in 0u64..50, tn in 0u64..50) {
        let m = ConfusionMatrix::new(tp, fn_, fp, tn);
        prop_assume!(m.total() > 0);
        let acc = accuracy(&m).unwrap();
        prop_assert!((0.0..=1.0).contains(&acc));
        for class in [BinaryLabel::Machine, BinaryLabel::Human] {
            prop_assert!((0.0..=1.0).contains(&f1(&m, class).value));
        }
    }
}

fn uid(v: f64) -> UidScores {
    UidScores {
        variance: v,
        diff_squared: v,
        token_count: 1,
    }
}

fn alternate_set() -> impl Strategy<Value = AlternateSet> {
    (
        0.0f64..5.0,
        prop::collection::vec((0.9f64..=1.0, prop::sample::select(vec![0.5, 1.0, 1.5, 2.0, 3.0])), 1..12),
    )
        .prop_map(|(base, vs)| AlternateSet {
            article_id: "a".into(),
            method: Method::Uws,
            original_text: String::new(),
            original_uid: uid(base),
            variants: vs
                .into_iter()
                .enumerate()
                .map(|(index, (similarity, v))| ScoredVariant {
                    index,
                    text: String::new(),
                    similarity,
                    uid: uid(v),
                })
                .collect(),
        })
}

proptest! {
    #[test]
    fn selection_respects_threshold_and_maximises(set in alternate_set(), t in 0.9f64..=1.0) {
        let r = select_candidate(&set, Metric::Variance, t);
        let base = set.original_uid.variance;
        let passing: Vec<&ScoredVariant> = set.variants.iter().filter(|v| v.similarity >= t).collect();
        match r.chosen_variant_index {
            None => {
                prop_assert!(passing.is_empty());
                prop_assert!(r.fallback);
            }
            Some(i) => {
                let chosen = &set.variants[i];
                prop_assert!(chosen.similarity >= t);
                let d = (chosen.uid.variance - base).abs();
                for v in &passing {
                    let dv = (v.uid.variance - base).abs();
                    prop_assert!(dv <= d);
                    if dv == d {
                        prop_assert!(v.index >= i);
                    }
                }
            }
        }
    }

    #[test]
    fn lowering_threshold_never_shrinks_delta(set in alternate_set(), a in 0.9f64..=1.0, b in 0.9f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let strict = select_candidate(&set, Metric::DiffSquared, hi);
        let loose = select_candidate(&set, Metric::DiffSquared, lo);
        prop_assert!(loose.chosen_uid_delta >= strict.chosen_uid_delta);
        prop_assert!(strict.fallback || !loose.fallback);
    }
}
