//! The three obfuscators: Synonym Swap rewrites an article in place; UID
//! Word Swap and UID Paraphrase each build `k` alternate articles, where
//! alternate `i` takes the `i`-th alternative of every sentence that has
//! one and the original text of every sentence that does not.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Article, SegmentedArticle, Sentence};
use crate::error::{Error, Result};
use crate::lexicon::{is_eligible, match_case, SynonymDb, TargetCriteria};
use crate::scorer::{
    causal_word_logprob, diverse_paraphrases, masked_top_k, CausalScorer, MaskedPredictor,
    Paraphraser,
};
use crate::similarity::SimilarityScorer;
use crate::uid::{uid_scores, UidScores};

pub const MASK_TOKEN: &str = "[MASK]";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SynonymSwap,
    Uws,
    Up,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::SynonymSwap => "synonym-swap",
            Method::Uws => "uws",
            Method::Up => "up",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "synonym-swap" => Ok(Method::SynonymSwap),
            "uws" => Ok(Method::Uws),
            "up" => Ok(Method::Up),
            other => Err(Error::Config(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetSelection {
    pub sentence_index: usize,
    pub token_index: Option<usize>,
    pub target_word: Option<String>,
}

/// First eligible token at or right of the sentence midpoint
/// (`floor(n / 2)`); tokens left of the midpoint are never considered.
pub fn select_target(
    sentence: &Sentence,
    sentence_index: usize,
    criteria: &TargetCriteria,
    db: &SynonymDb,
) -> TargetSelection {
    let n = sentence.tokens.len();
    let found = if n < criteria.min_sentence_words {
        None
    } else {
        (n / 2..n).find(|&i| is_eligible(&sentence.tokens[i], criteria, db))
    };
    TargetSelection {
        sentence_index,
        token_index: found,
        target_word: found.map(|i| sentence.tokens[i].text.clone()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Swap {
    pub sentence_index: usize,
    pub token_index: usize,
    pub original: String,
    pub replacement: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwapOutcome {
    pub article: Article,
    pub swaps: Vec<Swap>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SwapOptions {
    pub criteria: TargetCriteria,
    /// Write multiword synonyms with spaces instead of underscores.
    pub underscores_to_spaces: bool,
}

fn surface(word: &str, underscores_to_spaces: bool) -> String {
    if underscores_to_spaces {
        word.replace('_', " ")
    } else {
        word.to_string()
    }
}

/// Replace each sentence's target with the synonym the causal scorer finds
/// most probable after the sentence prefix preceding the target.
pub fn synonym_swap(
    article: &SegmentedArticle,
    synonyms: &SynonymDb,
    scorer: &dyn CausalScorer,
    options: &SwapOptions,
) -> Result<SwapOutcome> {
    let mut sentences = article.sentence_texts();
    let mut swaps = Vec::new();
    for (si, sentence) in article.sentences.iter().enumerate() {
        let sel = select_target(sentence, si, &options.criteria, synonyms);
        let (Some(ti), Some(target)) = (sel.token_index, sel.target_word) else {
            continue;
        };
        let prefix = article.sentence_prefix(si, ti);
        let mut best: Option<(&str, f64)> = None;
        for syn in synonyms.lookup(&target) {
            if syn.eq_ignore_ascii_case(&target) {
                continue;
            }
            let lp = causal_word_logprob(prefix, syn, scorer)?;
            if best.is_none_or(|(_, b)| lp > b) {
                best = Some((syn, lp));
            }
        }
        let Some((syn, _)) = best else { continue };
        let replacement = match_case(&target, &surface(syn, options.underscores_to_spaces));
        sentences[si] = article.sentence_with_replacement(si, ti, &replacement);
        swaps.push(Swap {
            sentence_index: si,
            token_index: ti,
            original: target,
            replacement,
        });
    }
    Ok(SwapOutcome {
        article: Article {
            text: article.compose(&sentences),
            ..article.article.clone()
        },
        swaps,
    })
}

/// Per-sentence alternatives feeding the alternate articles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentenceAlternatives {
    pub original: String,
    /// Token replaced by UID Word Swap, if any.
    pub target_index: Option<usize>,
    /// Alternative `i` goes into alternate article `i`; missing entries
    /// mean the original sentence is used.
    pub alternatives: Vec<String>,
}

/// Unscored alternate articles for one original.
#[derive(Clone, Debug, PartialEq)]
pub struct Alternates {
    pub original: Article,
    pub method: Method,
    pub sentences: Vec<SentenceAlternatives>,
    pub variants: Vec<String>,
}

fn compose_variants(seg: &SegmentedArticle, sentences: &[SentenceAlternatives], k: usize) -> Vec<String> {
    (0..k)
        .map(|i| {
            let parts: Vec<String> = sentences
                .iter()
                .map(|s| s.alternatives.get(i).unwrap_or(&s.original).clone())
                .collect();
            seg.compose(&parts)
        })
        .collect()
}

/// UID Word Swap: mask each sentence's target and let the predictor's top
/// `k` fills make `k` alternative sentences.
pub fn uws_alternates(
    article: &SegmentedArticle,
    predictor: &dyn MaskedPredictor,
    synonyms: &SynonymDb,
    criteria: &TargetCriteria,
    k: usize,
) -> Result<Alternates> {
    if k == 0 {
        return Err(Error::Argument("k must be positive".into()));
    }
    let mut sentences = Vec::with_capacity(article.sentences.len());
    for (si, sentence) in article.sentences.iter().enumerate() {
        let original = article.sentence_text(si).to_string();
        let sel = select_target(sentence, si, criteria, synonyms);
        let Some(ti) = sel.token_index else {
            sentences.push(SentenceAlternatives {
                original,
                target_index: None,
                alternatives: Vec::new(),
            });
            continue;
        };
        let mut masked: Vec<String> = sentence.tokens.iter().map(|t| t.text.clone()).collect();
        let target = std::mem::replace(&mut masked[ti], MASK_TOKEN.to_string());
        let fills = masked_top_k(&masked, ti, k, predictor)?;
        let alternatives = fills
            .iter()
            .map(|f| article.sentence_with_replacement(si, ti, &match_case(&target, &f.word)))
            .collect();
        sentences.push(SentenceAlternatives {
            original,
            target_index: Some(ti),
            alternatives,
        });
    }
    let variants = compose_variants(article, &sentences, k);
    Ok(Alternates {
        original: article.article.clone(),
        method: Method::Uws,
        sentences,
        variants,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParaphraseOptions {
    pub n: usize,
    /// Sentences shorter than this many characters pass through unchanged.
    pub min_chars: usize,
    pub diversity_penalty: f64,
    /// Paraphrases longer than this many characters are discarded in favour
    /// of the original sentence. Off by default.
    pub max_chars: Option<usize>,
}

impl Default for ParaphraseOptions {
    fn default() -> Self {
        ParaphraseOptions {
            n: 10,
            min_chars: 8,
            diversity_penalty: 1.0,
            max_chars: None,
        }
    }
}

/// UID Paraphrase: replace every long-enough sentence in alternate `i` by
/// the `i`-th of `n` diverse paraphrases.
pub fn up_alternates(
    article: &SegmentedArticle,
    paraphraser: &dyn Paraphraser,
    options: &ParaphraseOptions,
) -> Result<Alternates> {
    if options.n == 0 {
        return Err(Error::Argument("n must be positive".into()));
    }
    let mut sentences = Vec::with_capacity(article.sentences.len());
    for si in 0..article.sentences.len() {
        let original = article.sentence_text(si).to_string();
        let alternatives = if original.chars().count() >= options.min_chars {
            diverse_paraphrases(&original, options.n, options.diversity_penalty, paraphraser)?
                .into_iter()
                .map(|p| match options.max_chars {
                    Some(max) if p.chars().count() > max => original.clone(),
                    _ => p,
                })
                .collect()
        } else {
            Vec::new()
        };
        sentences.push(SentenceAlternatives {
            original,
            target_index: None,
            alternatives,
        });
    }
    let variants = compose_variants(article, &sentences, options.n);
    Ok(Alternates {
        original: article.article.clone(),
        method: Method::Up,
        sentences,
        variants,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredVariant {
    pub index: usize,
    pub text: String,
    pub similarity: f64,
    pub uid: UidScores,
}

/// An original article with its scored alternates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlternateSet {
    pub article_id: String,
    pub method: Method,
    pub original_text: String,
    pub original_uid: UidScores,
    pub variants: Vec<ScoredVariant>,
}

pub fn score_alternates(
    alternates: &Alternates,
    scorer: &dyn CausalScorer,
    similarity: &dyn SimilarityScorer,
) -> Result<AlternateSet> {
    let original = &alternates.original.text;
    let original_uid = uid_scores(original, scorer)?;
    let variants = alternates
        .variants
        .iter()
        .enumerate()
        .map(|(index, text)| {
            Ok(ScoredVariant {
                index,
                text: text.clone(),
                similarity: similarity.similarity(original, text)?,
                uid: uid_scores(text, scorer)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AlternateSet {
        article_id: alternates.original.id.clone(),
        method: alternates.method,
        original_text: original.clone(),
        original_uid,
        variants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{segment, AuthorLabel};
    use crate::scorer::{FillCandidate, StubParaphraser};

    fn art(text: &str) -> SegmentedArticle {
        segment(&Article::new("t", AuthorLabel::Human, text))
    }

    #[test]
    fn midpoint_scan() {
        let db = SynonymDb::parse("quick\tfast\nlazy\tidle\njumps\tleaps\n").unwrap();
        // tokens: the quick fox jumps over the lazy dog . (n=9, mid=4 "over")
        let seg = art("The quick fox jumps over the lazy dog.");
        let sel = select_target(&seg.sentences[0], 0, &TargetCriteria::default(), &db);
        assert_eq!(sel.token_index, Some(6));
        assert_eq!(sel.target_word.as_deref(), Some("lazy"));
    }

    #[test]
    fn nothing_eligible() {
        let db = SynonymDb::parse("the\tthis\n").unwrap();
        let seg = art("it is what it is and so on");
        let sel = select_target(&seg.sentences[0], 0, &TargetCriteria::default(), &db);
        assert_eq!(sel.token_index, None);

        let db = SynonymDb::parse("running\tjogging\n").unwrap();
        let seg = art("keep running");
        assert_eq!(select_target(&seg.sentences[0], 0, &TargetCriteria::default(), &db).token_index, None);
    }

    #[test]
    fn excerpt_targets() {
        let db = SynonymDb::parse(
            "president\tPresident_of_the_United_States,chairman\nfreeze\tstop_dead,halt\nexecutive\tofficial\n",
        )
        .unwrap();
        let seg = art("a look at some of donald trump's early activity as president: -- 24: executive orders and memoranda signed. that includes to withdraw the nited states from trade deal, impose federal hiring freeze reduce regulations related health care law enacted under former president barack obama.");
        let c = TargetCriteria::default();
        let first = select_target(&seg.sentences[0], 0, &c, &db);
        assert_eq!(first.target_word.as_deref(), Some("president"));
        let second = select_target(&seg.sentences[1], 1, &c, &db);
        assert_eq!(second.target_word.as_deref(), Some("freeze"));
    }

    struct Table(Vec<(&'static str, f64)>);

    impl CausalScorer for Table {
        fn surprisals(&self, _: &str) -> Result<crate::scorer::SurprisalSequence> {
            unimplemented!()
        }
        fn word_logprob(&self, _: &str, word: &str) -> Result<f64> {
            Ok(self.0.iter().find(|(w, _)| *w == word).map(|p| p.1).unwrap_or(-100.0))
        }
    }

    #[test]
    fn swap_picks_most_probable() {
        let db = SynonymDb::parse("storm\ttempest,gale\n").unwrap();
        let seg = art("A very big storm arrived. Nothing here.");
        let out = synonym_swap(&seg, &db, &Table(vec![("gale", -1.0), ("tempest", -2.0)]), &SwapOptions::default()).unwrap();
        assert_eq!(out.article.text, "A very big gale arrived. Nothing here.");
        assert_eq!(out.swaps.len(), 1);
    }

    struct AllCommon;

    impl crate::corpus::PosTagger for AllCommon {
        fn tag(&self, tokens: &[&str]) -> Vec<crate::corpus::PosTag> {
            vec![crate::corpus::PosTag::Common; tokens.len()]
        }
    }

    #[test]
    fn swap_keeps_case_and_spacing_option() {
        let db = SynonymDb::parse("storm\tgreat_gale\n").unwrap();
        let seg = crate::corpus::segment_with(&Article::new("t", AuthorLabel::Human, "A big Storm came."), &AllCommon);
        let opts = SwapOptions { underscores_to_spaces: true, ..Default::default() };
        let out = synonym_swap(&seg, &db, &Table(vec![]), &opts).unwrap();
        assert_eq!(out.article.text, "A big Great gale came.");
    }

    #[test]
    fn swap_without_targets_is_identity() {
        let db = SynonymDb::new();
        let seg = art("The cat sat on the mat.  It was warm.");
        let out = synonym_swap(&seg, &db, &Table(vec![]), &SwapOptions::default()).unwrap();
        assert_eq!(out.article.text, seg.article.text);
        assert!(out.swaps.is_empty());
    }

    struct Fixed(Vec<&'static str>);

    impl MaskedPredictor for Fixed {
        fn fills(&self, _: &[String], _: usize, k: usize) -> Result<Vec<FillCandidate>> {
            Ok(self
                .0
                .iter()
                .enumerate()
                .take(k)
                .map(|(i, w)| FillCandidate {
                    word: w.to_string(),
                    score: -(i as f64),
                })
                .collect())
        }
    }

    #[test]
    fn uws_variant_i_uses_ith_fill() {
        let db = SynonymDb::parse("storm\tgale\n").unwrap();
        let seg = art("A very big storm arrived. Ok.");
        let fills = Fixed(vec!["gale", "wind", "rain"]);
        let alts = uws_alternates(&seg, &fills, &db, &TargetCriteria::default(), 3).unwrap();
        assert_eq!(
            alts.variants,
            vec!["A very big gale arrived. Ok.", "A very big wind arrived. Ok.", "A very big rain arrived. Ok."]
        );
        // fewer fills than k: remaining variants keep the original sentence
        let alts = uws_alternates(&seg, &fills, &db, &TargetCriteria::default(), 5).unwrap();
        assert_eq!(alts.variants[4], seg.article.text);
    }

    #[test]
    fn up_skips_short_sentences() {
        let db = SynonymDb::parse("arrived\tcame\n").unwrap();
        let p = StubParaphraser::new(db, 1);
        let seg = art("Hi. Go on. Yes!");
        let alts = up_alternates(&seg, &p, &ParaphraseOptions::default()).unwrap();
        assert_eq!(alts.variants.len(), 10);
        assert!(alts.variants.iter().all(|v| v == &seg.article.text));
    }
}
