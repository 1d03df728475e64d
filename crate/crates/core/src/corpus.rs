//! Corpus ingestion, sampling and sentence/word segmentation.
//!
//! Corpus files are line-delimited JSON. An optional first line
//! `{"labels":[...]}` declares the closed label set; every other line is a
//! record `{"id":..,"label":..,"text":..}`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Ground-truth author of an article. Machine labels carry the generator
/// name verbatim (labels are opaque strings apart from `human`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AuthorLabel {
    Human,
    Machine(String),
}

impl AuthorLabel {
    pub fn parse(raw: &str) -> Self {
        if raw == "human" {
            AuthorLabel::Human
        } else {
            AuthorLabel::Machine(raw.to_string())
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            AuthorLabel::Human => "human",
            AuthorLabel::Machine(name) => name,
        }
    }

    pub fn is_machine(&self) -> bool {
        matches!(self, AuthorLabel::Machine(_))
    }
}

impl fmt::Display for AuthorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for AuthorLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for AuthorLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        Ok(AuthorLabel::parse(&raw))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub label: AuthorLabel,
    pub text: String,
}

impl Article {
    pub fn new(id: impl Into<String>, label: AuthorLabel, text: impl Into<String>) -> Self {
        Article {
            id: id.into(),
            label,
            text: text.into(),
        }
    }
}

/// A fully parsed corpus file.
#[derive(Clone, Debug)]
pub struct Corpus {
    /// Declared labels (header) or the labels observed, in first-seen order.
    pub labels: Vec<String>,
    pub articles: Vec<Article>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleSpec {
    pub per_label_count: usize,
    pub seed: u64,
    /// Labels to draw from; `None` means every label in the corpus.
    pub labels: Option<Vec<String>>,
}

#[derive(Deserialize)]
struct RawRecord {
    id: Option<String>,
    label: Option<String>,
    text: Option<String>,
}

/// Parse a corpus from its textual form.
pub fn parse_corpus(content: &str) -> Result<Corpus> {
    let mut declared: Option<Vec<String>> = None;
    let mut observed: Vec<String> = Vec::new();
    let mut seen_ids = HashSet::new();
    let mut articles = Vec::new();
    let mut first_record = true;

    for (idx, line) in content.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|e| Error::CorpusFormat {
                line: line_no,
                msg: e.to_string(),
            })?;
        if first_record {
            first_record = false;
            if let Some(labels) = value.get("labels") {
                if value.get("id").is_none() {
                    let labels: Vec<String> = serde_json::from_value(labels.clone()).map_err(|e| {
                        Error::CorpusFormat {
                            line: line_no,
                            msg: format!("bad header: {e}"),
                        }
                    })?;
                    declared = Some(labels);
                    continue;
                }
            }
        }
        let raw: RawRecord = serde_json::from_value(value).map_err(|e| Error::CorpusFormat {
            line: line_no,
            msg: e.to_string(),
        })?;
        let missing = |field: &str| Error::CorpusFormat {
            line: line_no,
            msg: format!("missing field {field:?}"),
        };
        let id = raw.id.ok_or_else(|| missing("id"))?;
        let label = raw.label.ok_or_else(|| missing("label"))?;
        let text = raw.text.ok_or_else(|| missing("text"))?;
        if id.is_empty() {
            return Err(missing("id"));
        }
        if !seen_ids.insert(id.clone()) {
            return Err(Error::CorpusFormat {
                line: line_no,
                msg: format!("duplicate id {id:?}"),
            });
        }
        if text.trim().is_empty() {
            return Err(Error::CorpusFormat {
                line: line_no,
                msg: format!("article {id:?} has empty text"),
            });
        }
        match &declared {
            Some(labels) if !labels.contains(&label) => {
                return Err(Error::Label {
                    line: line_no,
                    label,
                })
            }
            Some(_) => {}
            None => {
                if !observed.contains(&label) {
                    observed.push(label.clone());
                }
            }
        }
        articles.push(Article {
            id,
            label: AuthorLabel::parse(&label),
            text,
        });
    }

    Ok(Corpus {
        labels: declared.unwrap_or(observed),
        articles,
    })
}

pub fn read_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&content)
}

/// Draw `per_label_count` articles per label, reproducibly from `seed`.
/// The result is ordered by id.
pub fn sample(corpus: &Corpus, spec: &SampleSpec) -> Result<Vec<Article>> {
    let labels = spec.labels.clone().unwrap_or_else(|| corpus.labels.clone());
    let mut by_label: BTreeMap<&str, Vec<&Article>> = BTreeMap::new();
    for article in &corpus.articles {
        by_label
            .entry(article.label.as_str())
            .or_default()
            .push(article);
    }

    let mut out = Vec::new();
    for label in &labels {
        if !corpus.labels.contains(label) {
            return Err(Error::Label {
                line: 0,
                label: label.clone(),
            });
        }
        if spec.per_label_count == 0 {
            continue;
        }
        let mut pool: Vec<&Article> = by_label.get(label.as_str()).cloned().unwrap_or_default();
        if pool.len() < spec.per_label_count {
            return Err(Error::Sampling {
                label: label.clone(),
                requested: spec.per_label_count,
                available: pool.len(),
            });
        }
        pool.sort_by(|a, b| a.id.cmp(&b.id));
        // One stream per label so adding a label never perturbs the others.
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ fnv1a(label.as_bytes()));
        pool.shuffle(&mut rng);
        out.extend(pool.into_iter().take(spec.per_label_count).cloned());
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}

pub fn load_corpus(path: impl AsRef<Path>, spec: &SampleSpec) -> Result<Vec<Article>> {
    let corpus = read_corpus(path)?;
    sample(&corpus, spec)
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

// ---------------------------------------------------------------------------
// Segmentation
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PosTag {
    ProperNoun,
    Common,
    Numeral,
    Punctuation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub tag: PosTag,
    /// Byte offsets into the article text.
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub start: usize,
    pub end: usize,
    pub tokens: Vec<Token>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegmentedArticle {
    pub article: Article,
    pub sentences: Vec<Sentence>,
}

impl SegmentedArticle {
    pub fn sentence_text(&self, index: usize) -> &str {
        let s = &self.sentences[index];
        &self.article.text[s.start..s.end]
    }

    pub fn sentence_texts(&self) -> Vec<String> {
        (0..self.sentences.len())
            .map(|i| self.sentence_text(i).to_string())
            .collect()
    }

    /// Rebuild the article text with each sentence replaced by `sentences[i]`,
    /// keeping the original whitespace between sentences.
    pub fn compose(&self, sentences: &[String]) -> String {
        assert_eq!(sentences.len(), self.sentences.len());
        let text = &self.article.text;
        let mut out = String::with_capacity(text.len());
        let mut cursor = 0;
        for (span, replacement) in self.sentences.iter().zip(sentences) {
            out.push_str(&text[cursor..span.start]);
            out.push_str(replacement);
            cursor = span.end;
        }
        out.push_str(&text[cursor..]);
        out
    }

    /// Sentence `index` with the token at `token_index` replaced by `word`.
    pub fn sentence_with_replacement(&self, index: usize, token_index: usize, word: &str) -> String {
        let s = &self.sentences[index];
        let tok = &s.tokens[token_index];
        let text = &self.article.text;
        let mut out = String::with_capacity(s.end - s.start + word.len());
        out.push_str(&text[s.start..tok.start]);
        out.push_str(word);
        out.push_str(&text[tok.end..s.end]);
        out
    }

    /// Sentence `index` up to (not including) the token at `token_index`.
    pub fn sentence_prefix(&self, index: usize, token_index: usize) -> &str {
        let s = &self.sentences[index];
        &self.article.text[s.start..s.tokens[token_index].start]
    }
}

/// Assigns one tag per token of a sentence.
pub trait PosTagger: Send + Sync {
    fn tag(&self, tokens: &[&str]) -> Vec<PosTag>;
}

const PROPER_NOUNS: &[&str] = &[
    "obama", "barack", "michelle", "trump", "donald", "clinton", "hillary", "biden", "putin",
    "washington", "america", "american", "ohio", "dayton", "chile", "santiago", "vatican",
    "netflix", "cnn", "bbc", "itv", "shanghai", "china", "chinese", "london", "paris", "india",
    "tesco", "rbi", "reuters", "google", "facebook", "twitter", "microsoft", "apple", "amazon",
    "january", "february", "april", "june", "july", "august", "september", "october",
    "november", "december", "monday", "tuesday", "wednesday", "thursday", "friday", "saturday",
    "sunday", "europe", "european", "britain", "british", "france", "germany", "russia",
    "texas", "california", "florida", "york",
];

/// Lexicon lookup plus a capitalisation heuristic: a capitalised word that
/// is not the first word of its sentence is a proper noun.
#[derive(Clone, Debug)]
pub struct ReferenceTagger {
    lexicon: HashMap<String, PosTag>,
}

impl Default for ReferenceTagger {
    fn default() -> Self {
        let mut lexicon: HashMap<String, PosTag> = PROPER_NOUNS
            .iter()
            .map(|w| (w.to_string(), PosTag::ProperNoun))
            .collect();
        lexicon.insert("i".into(), PosTag::Common);
        ReferenceTagger { lexicon }
    }
}

impl ReferenceTagger {
    pub fn with_entry(mut self, word: &str, tag: PosTag) -> Self {
        self.lexicon.insert(word.to_lowercase(), tag);
        self
    }
}

impl PosTagger for ReferenceTagger {
    fn tag(&self, tokens: &[&str]) -> Vec<PosTag> {
        let first_word = tokens
            .iter()
            .position(|t| t.chars().any(char::is_alphanumeric));
        tokens
            .iter()
            .enumerate()
            .map(|(i, tok)| {
                let first = tok.chars().next().unwrap_or(' ');
                if !tok.chars().any(char::is_alphanumeric) {
                    return PosTag::Punctuation;
                }
                if first.is_ascii_digit() {
                    return PosTag::Numeral;
                }
                if let Some(tag) = self.lexicon.get(&tok.to_lowercase()) {
                    return *tag;
                }
                if first.is_uppercase() && Some(i) != first_word {
                    PosTag::ProperNoun
                } else {
                    PosTag::Common
                }
            })
            .collect()
    }
}

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "etc", "inc", "ltd", "co", "corp",
    "gov", "gen", "sen", "rep", "jan", "feb", "mar", "apr", "aug", "sept", "sep", "oct", "nov",
    "dec", "no", "u.s", "u.k", "e.g", "i.e", "a.m", "p.m", "mt", "ft", "approx", "dept",
];

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '…')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '”' | '’' | '»')
}

/// Word immediately preceding byte offset `dot`, lowercased.
fn word_before(text: &str, dot: usize) -> String {
    let head = &text[..dot];
    let start = head
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_whitespace() || matches!(c, '(' | '"' | '“'))
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    head[start..].to_lowercase()
}

/// Byte spans of the sentences of `text`. Whitespace-only gaps separate the
/// spans; no span starts or ends with whitespace.
pub fn sentence_spans(text: &str) -> Vec<(usize, usize)> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if start.is_none() {
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            start = Some(pos);
        }
        if c == '\n' {
            // blank line ends a paragraph and therefore a sentence
            let mut j = i + 1;
            while j < chars.len() && chars[j].1.is_whitespace() && chars[j].1 != '\n' {
                j += 1;
            }
            if j < chars.len() && chars[j].1 == '\n' {
                let end = trim_end(text, start.unwrap(), pos);
                spans.push((start.unwrap(), end));
                start = None;
                i = j;
                continue;
            }
        }
        if is_terminal(c) {
            let mut j = i + 1;
            while j < chars.len() && (is_terminal(chars[j].1) || is_closer(chars[j].1)) {
                j += 1;
            }
            let at_boundary = j == chars.len() || chars[j].1.is_whitespace();
            let abbreviation = c == '.' && j == i + 1 && {
                let w = word_before(text, pos);
                let bare = w.trim_start_matches(|ch: char| !ch.is_alphanumeric());
                ABBREVIATIONS.contains(&bare)
                    || (bare.chars().count() == 1 && bare.chars().all(char::is_alphabetic)
                        && j < chars.len() && next_is_upper(&chars, j))
            };
            if at_boundary && !abbreviation {
                let end = if j == chars.len() { text.len() } else { chars[j].0 };
                spans.push((start.unwrap(), end));
                start = None;
            }
            i = j;
            continue;
        }
        i += 1;
    }
    if let Some(s) = start {
        let end = trim_end(text, s, text.len());
        if end > s {
            spans.push((s, end));
        }
    }
    spans
}

fn next_is_upper(chars: &[(usize, char)], from: usize) -> bool {
    chars[from..]
        .iter()
        .find(|(_, c)| !c.is_whitespace())
        .map(|(_, c)| c.is_uppercase())
        .unwrap_or(false)
}

fn trim_end(text: &str, start: usize, end: usize) -> usize {
    start + text[start..end].trim_end().len()
}

const CLITICS: &[&str] = &["'s", "'re", "'ve", "'ll", "'d", "'m"];

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '’'
}

/// Treebank-style word tokenization of `text`, returning byte spans relative
/// to `text`. Clitics (`'s`, `n't`, ...) are split off; runs of the same
/// punctuation character (`--`, `...`) stay together.
pub fn word_spans(text: &str) -> Vec<(usize, usize)> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let at = |k: usize| chars.get(k).map(|&(_, c)| c);
    let offset = |k: usize| chars.get(k).map(|&(p, _)| p).unwrap_or(text.len());
    let is_word = |c: char| c.is_alphanumeric() || c == '_';

    let mut spans = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i].1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if is_word(c) {
            let mut j = i + 1;
            while let Some(ch) = at(j) {
                if is_word(ch) {
                    j += 1;
                } else if matches!(ch, '-' | '.') && at(j + 1).is_some_and(|n| n.is_alphanumeric()) {
                    j += 2;
                } else if ch == ',' && at(j - 1).is_some_and(|p| p.is_ascii_digit())
                    && at(j + 1).is_some_and(|n| n.is_ascii_digit())
                {
                    j += 2;
                } else if is_apostrophe(ch) && at(j + 1).is_some_and(char::is_alphabetic) {
                    let mut k = j + 1;
                    while at(k).is_some_and(char::is_alphabetic) {
                        k += 1;
                    }
                    let suffix: String = chars[j + 1..k].iter().map(|&(_, c)| c).collect();
                    let suffix = suffix.to_lowercase();
                    let clitic = format!("'{suffix}");
                    if CLITICS.contains(&clitic.as_str()) {
                        break;
                    }
                    if suffix == "t" && j > i + 1 && at(j - 1).is_some_and(|p| p == 'n' || p == 'N') {
                        // "don't" -> "do" + "n't"
                        spans.push((offset(i), offset(j - 1)));
                        spans.push((offset(j - 1), offset(k)));
                        i = k;
                        j = usize::MAX;
                        break;
                    }
                    j = k;
                } else {
                    break;
                }
            }
            if j == usize::MAX {
                continue;
            }
            spans.push((offset(i), offset(j)));
            i = j;
            continue;
        }
        if is_apostrophe(c) && at(i + 1).is_some_and(char::is_alphabetic) {
            let mut k = i + 1;
            while at(k).is_some_and(char::is_alphabetic) {
                k += 1;
            }
            let suffix: String = chars[i + 1..k].iter().map(|&(_, c)| c).collect();
            if CLITICS.contains(&format!("'{}", suffix.to_lowercase()).as_str()) {
                spans.push((offset(i), offset(k)));
                i = k;
                continue;
            }
        }
        let mut j = i + 1;
        while at(j) == Some(c) {
            j += 1;
        }
        spans.push((offset(i), offset(j)));
        i = j;
    }
    spans
}

/// Tokens of `text` as string slices.
pub fn word_tokenize(text: &str) -> Vec<&str> {
    word_spans(text).into_iter().map(|(s, e)| &text[s..e]).collect()
}

pub fn segment(article: &Article) -> SegmentedArticle {
    segment_with(article, &ReferenceTagger::default())
}

pub fn segment_with(article: &Article, tagger: &dyn PosTagger) -> SegmentedArticle {
    let text = &article.text;
    let sentences = sentence_spans(text)
        .into_iter()
        .map(|(start, end)| {
            let body = &text[start..end];
            let spans = word_spans(body);
            let words: Vec<&str> = spans.iter().map(|&(s, e)| &body[s..e]).collect();
            let tags = tagger.tag(&words);
            let tokens = spans
                .iter()
                .zip(tags)
                .map(|(&(s, e), tag)| Token {
                    text: body[s..e].to_string(),
                    tag,
                    start: start + s,
                    end: start + e,
                })
                .collect();
            Sentence { start, end, tokens }
        })
        .collect();
    SegmentedArticle {
        article: article.clone(),
        sentences,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(text: &str) -> Vec<&str> {
        word_tokenize(text)
    }

    #[test]
    fn two_sentences() {
        let art = Article::new("a", AuthorLabel::Human, "Hi. Bye.");
        let seg = segment(&art);
        let words: Vec<Vec<&str>> = seg
            .sentences
            .iter()
            .map(|s| s.tokens.iter().map(|t| t.text.as_str()).collect())
            .collect();
        assert_eq!(words, vec![vec!["Hi", "."], vec!["Bye", "."]]);
    }

    #[test]
    fn no_terminal_punctuation() {
        let art = Article::new("a", AuthorLabel::Human, "  just one clause here  ");
        let seg = segment(&art);
        assert_eq!(seg.sentences.len(), 1);
        assert_eq!(seg.sentence_text(0), "just one clause here");
    }

    #[test]
    fn excerpt_sentence_count() {
        // Hand segmentation: "...signed." / "...barack obama." / "1: blocked." / "an order ban travelers..."
        let text = "a look at some of donald trump's early activity as president: -- 24: executive orders and memoranda signed. that includes to withdraw the nited states from trade deal, impose federal hiring freeze reduce regulations related health care law enacted under former president barack obama. 1: blocked. an order ban travelers…";
        let seg = segment(&Article::new("x", AuthorLabel::Human, text));
        assert_eq!(seg.sentences.len(), 4);
        assert_eq!(seg.sentence_text(2), "1: blocked.");
        let first: Vec<&str> = seg.sentences[0].tokens.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(first.len(), 22);
        assert_eq!(first[11], "president");
        assert_eq!(&first[6..8], &["trump", "'s"]);
        assert_eq!(first[13], "--");
    }

    #[test]
    fn abbreviations_do_not_split() {
        let spans = sentence_spans("Mr. Smith met Dr. Jones in the U.S. yesterday. Then he left.");
        assert_eq!(spans.len(), 2);
    }

    #[test]
    fn tokenizer_rules() {
        assert_eq!(toks("don't stop"), vec!["do", "n't", "stop"]);
        assert_eq!(toks("45,000 people"), vec!["45,000", "people"]);
        assert_eq!(toks("shanghai-based glass..."), vec!["shanghai-based", "glass", "..."]);
        assert_eq!(toks("stop_dead now"), vec!["stop_dead", "now"]);
        assert_eq!(toks("o'brien's"), vec!["o'brien", "'s"]);
    }

    #[test]
    fn tagger_heuristics() {
        let tagger = ReferenceTagger::default();
        let tags = tagger.tag(&["The", "senator", "met", "Alice", "and", "obama", ",", "1999"]);
        assert_eq!(
            tags,
            vec![
                PosTag::Common,
                PosTag::Common,
                PosTag::Common,
                PosTag::ProperNoun,
                PosTag::Common,
                PosTag::ProperNoun,
                PosTag::Punctuation,
                PosTag::Numeral
            ]
        );
    }

    fn corpus_text(human: usize, machine: usize) -> String {
        let mut s = String::from("{\"labels\":[\"human\",\"gpt3\"]}\n");
        for i in 0..human {
            s.push_str(&format!("{{\"id\":\"h{i:03}\",\"label\":\"human\",\"text\":\"human text {i}.\"}}\n"));
        }
        for i in 0..machine {
            s.push_str(&format!("{{\"id\":\"m{i:03}\",\"label\":\"gpt3\",\"text\":\"machine text {i}.\"}}\n"));
        }
        s
    }

    #[test]
    fn sampling_counts_and_determinism() {
        let corpus = parse_corpus(&corpus_text(60, 60)).unwrap();
        let spec = SampleSpec {
            per_label_count: 50,
            seed: 7,
            labels: None,
        };
        let a = sample(&corpus, &spec).unwrap();
        assert_eq!(a.iter().filter(|x| x.label == AuthorLabel::Human).count(), 50);
        assert_eq!(a.iter().filter(|x| x.label.is_machine()).count(), 50);
        assert!(a.windows(2).all(|w| w[0].id < w[1].id));
        assert_eq!(a, sample(&corpus, &spec).unwrap());
        let other = sample(&corpus, &SampleSpec { seed: 8, ..spec.clone() }).unwrap();
        assert_ne!(a, other);

        let empty = sample(&corpus, &SampleSpec { per_label_count: 0, ..spec }).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn sampling_errors() {
        let corpus = parse_corpus(&corpus_text(3, 3)).unwrap();
        let spec = SampleSpec {
            per_label_count: 4,
            seed: 0,
            labels: None,
        };
        assert!(matches!(sample(&corpus, &spec), Err(Error::Sampling { available: 3, .. })));
    }

    #[test]
    fn format_errors() {
        let dup = "{\"id\":\"a\",\"label\":\"human\",\"text\":\"x\"}\n{\"id\":\"a\",\"label\":\"human\",\"text\":\"y\"}";
        assert!(matches!(parse_corpus(dup), Err(Error::CorpusFormat { line: 2, .. })));
        let missing = "{\"label\":\"human\",\"text\":\"x\"}";
        assert!(matches!(parse_corpus(missing), Err(Error::CorpusFormat { line: 1, .. })));
        let unknown = "{\"labels\":[\"human\"]}\n{\"id\":\"a\",\"label\":\"grover\",\"text\":\"x\"}";
        assert!(matches!(parse_corpus(unknown), Err(Error::Label { line: 2, .. })));
        let blank = "{\"id\":\"a\",\"label\":\"human\",\"text\":\"   \"}";
        assert!(matches!(parse_corpus(blank), Err(Error::CorpusFormat { .. })));
    }
}
